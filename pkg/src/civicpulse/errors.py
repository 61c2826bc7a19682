"""Exception hierarchy shared across the package.

The CLI maps these onto distinct exit codes, so raising the right family
matters: configuration problems must not masquerade as data problems.
"""


class CivicPulseError(Exception):
    """Base class for all package errors."""


class ConfigError(CivicPulseError):
    """Invalid or unreadable configuration (schema config, run config)."""


class DataError(CivicPulseError):
    """Input data missing, unreadable, or failing validation as a whole."""


class ComputationError(CivicPulseError):
    """A computation cannot proceed (degenerate input, divergence)."""
