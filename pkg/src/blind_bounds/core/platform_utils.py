"""Platform utilities: standard directories and worker counts."""

import os
from pathlib import Path

APP_DIR_NAME = "blind-bounds"
THREADS_ENV_VAR = "BLIND_BOUNDS_THREADS"


class PlatformManager:
    """Per-user directories and the worker count."""

    @staticmethod
    def get_default_config_dir() -> Path:
        """Get the per-user configuration directory.

        Returns:
            Path to config directory
        """
        from platformdirs import user_config_dir
        return Path(user_config_dir(APP_DIR_NAME, appauthor=False))

    @staticmethod
    def get_default_log_dir() -> Path:
        """Get the per-user log directory.

        Returns:
            Path to log directory
        """
        from platformdirs import user_log_dir
        return Path(user_log_dir(APP_DIR_NAME, appauthor=False))

    @staticmethod
    def get_thread_count() -> int:
        """Number of worker threads for parallel sweeps and restarts.

        Reads ``BLIND_BOUNDS_THREADS`` first, then the physical core count.

        Returns:
            Positive worker count
        """
        raw = os.environ.get(THREADS_ENV_VAR, "").strip()
        if raw:
            try:
                value = int(raw)
            except ValueError:
                value = 0
            if value > 0:
                return value

        import psutil
        cores = psutil.cpu_count(logical=False) or psutil.cpu_count() or 1
        return max(1, int(cores))
