"""Error types shared across the package.

The CLI maps these onto process exit codes: ConfigError (and other bad
input) exits 2, DataError exits 3.
"""


class ShapeError(ValueError):
    """Operands have incompatible or invalid dimensions."""


class ConfigError(ValueError):
    """Invalid configuration value or unparsable input file."""


class DataError(ValueError):
    """Dataset content violates a structural requirement."""


class CsvHeaderError(DataError):
    """CSV header is missing or malformed."""


class CsvParseError(DataError):
    """A CSV data row failed to parse."""


class EmptyDatasetError(DataError):
    """File contains a header but no data rows."""
