from django.core.exceptions import ValidationError

__all__ = ['ValidationError', 'EnumerationCapExceeded']


class EnumerationCapExceeded(RuntimeError):
    """An exact enumeration would produce more atoms than allowed."""

    def __init__(self, size, cap, what='atoms'):
        self.size = size
        self.cap = cap
        super().__init__(
            f'Exact enumeration needs {size} {what}, above the cap of {cap}; '
            f'raise DECOUPLE_CAP or use Monte Carlo estimation instead.'
        )
