"""Exception types shared across the package."""


class DataError(ValueError):
    """Input data is malformed, incomplete or inconsistent."""


class SchemaError(DataError):
    """Two feature schemas that must agree do not."""

    def __init__(self, message: str, missing=(), extra=()):
        self.missing = tuple(missing)
        self.extra = tuple(extra)
        parts = [message]
        if self.missing:
            parts.append(f"missing: {', '.join(self.missing)}")
        if self.extra:
            parts.append(f"extra: {', '.join(self.extra)}")
        super().__init__("; ".join(parts))


class BenchmarkError(ValueError):
    """The benchmark cannot be run with the given data and configuration."""
