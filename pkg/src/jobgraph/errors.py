"""Exception taxonomy shared across the package.

The CLI maps these onto process exit codes, so library code should raise the
most specific class that applies rather than bare ValueError.
"""

from __future__ import annotations


class JobGraphError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(JobGraphError):
    """Invalid configuration value or incompatible option combination."""


class InputError(JobGraphError):
    """Malformed or invalid input data (parse, validation, format errors)."""


class ConsistencyError(JobGraphError):
    """Internally inconsistent state, e.g. mismatched node sets or indices."""


class NumericError(JobGraphError):
    """Non-finite or otherwise unusable numeric values."""


class SamplingError(JobGraphError):
    """A sampling request that cannot be satisfied, e.g. too few negative pairs."""
