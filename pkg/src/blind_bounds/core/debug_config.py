"""Debug configuration and audit fault-injection hooks."""

DEFAULT_SHIFT_CONSTANT = 4


class DebugConfig:
    """Global debug configuration."""

    _debug_mode = False
    _shift_constant = DEFAULT_SHIFT_CONSTANT

    @classmethod
    def set_debug_mode(cls, enabled: bool):
        """Set debug mode on/off.

        Args:
            enabled: True to enable verbose logging
        """
        cls._debug_mode = enabled

    @classmethod
    def is_debug_mode(cls) -> bool:
        """Check if debug mode is enabled."""
        return cls._debug_mode

    @classmethod
    def inject_faulty_shift_constant(cls, constant: int):
        """Replace the constant k of the k*d*eps column shift in the doubly-stochastic
        approximation N = (M + (k*d*eps - alpha)/d) / (1 + 4*d*eps).

        Anything other than 4 breaks the construction; the audit injects 11
        to check that it notices.

        Args:
            constant: Faulty shift constant (4 is correct)
        """
        cls._shift_constant = constant

    @classmethod
    def get_shift_constant(cls) -> int:
        return cls._shift_constant

    @classmethod
    def clear_faulty_shift_constant(cls):
        cls._shift_constant = DEFAULT_SHIFT_CONSTANT

    @classmethod
    def reset(cls):
        """Restore defaults."""
        cls._debug_mode = False
        cls._shift_constant = DEFAULT_SHIFT_CONSTANT
