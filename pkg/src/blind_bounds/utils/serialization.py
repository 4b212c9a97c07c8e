"""JSON and CSV helpers for exact and floating values."""

import csv
import io
import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, TextIO, Union

import numpy as np


def format_number(value: Any) -> str:
    """Render a number for interchange.

    Fractions become "num/den" (integers stay "n"); everything else uses 17
    significant digits, which round-trips float64.
    """
    if value is None:
        return ""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def parse_number(text: Union[str, int, float]) -> Union[Fraction, float]:
    """Inverse of :func:`format_number` for a single value."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    text = str(text).strip()
    if "/" in text:
        return Fraction(text)
    return float(text)


def parse_number_list(items: Sequence[Union[str, int, float]]) -> List[Union[Fraction, float]]:
    """Parse a list of numbers; if any entry is a "num/den" string the whole
    list is read exactly."""
    texts = [str(item).strip() for item in items]
    if any("/" in t for t in texts):
        return [Fraction(t) for t in texts]
    return [float(t) for t in texts]


def to_jsonable(value: Any) -> Any:
    """Recursively convert numpy/Fraction containers to JSON-ready values."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, Fraction):
        return format_number(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def dump_json(data: Any, target: Optional[Union[Path, TextIO]] = None) -> str:
    """Serialize to indented JSON; also write it when a target is given.

    Args:
        data: Data to serialize
        target: Optional path or open text stream

    Returns:
        The JSON text
    """
    text = json.dumps(to_jsonable(data), indent=2, ensure_ascii=False)
    if isinstance(target, Path):
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, 'w', encoding='utf-8') as f:
            f.write(text + "\n")
    elif target is not None:
        target.write(text + "\n")
    return text


def load_json(path: Path) -> Any:
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def header_lines(version: str, command: str, seed: Optional[int] = None) -> List[str]:
    """Comment header for output files. No timestamps, so repeat runs match."""
    seed_part = f" seed={seed}" if seed is not None else ""
    return [f"# blind-bounds {version}{seed_part} command={command}"]


def render_csv(columns: Sequence[str], rows: Iterable[Dict[str, Any]],
               header: Sequence[str] = ()) -> str:
    """Render rows to CSV text with an optional comment header."""
    buffer = io.StringIO()
    for line in header:
        buffer.write(line + "\n")
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n",
                            extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        values = {k: row.get(k) for k in columns}
        writer.writerow({k: v if isinstance(v, str) else format_number(v)
                         for k, v in values.items()})
    return buffer.getvalue()


def write_text(text: str, target: Optional[Union[Path, TextIO]]):
    """Write text to a path (creating parents) or a stream."""
    if target is None:
        return
    if isinstance(target, Path):
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, 'w', encoding='utf-8', newline="") as f:
            f.write(text)
    else:
        target.write(text)
