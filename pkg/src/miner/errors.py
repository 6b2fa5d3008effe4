"""Exception types shared across the package."""
from __future__ import annotations

import datetime as _dt


class MinerError(Exception):
    pass


class InputError(MinerError):
    """Bad user input: missing paths, non-repositories, refused overwrites."""


class FormatError(MinerError):
    """A file on disk or a response body does not have the expected shape."""


class UnsupportedVersionError(FormatError):
    pass


class NetworkError(MinerError):
    def __init__(self, message: str, status: int | None = None) -> None:
        super().__init__(message)
        self.status = status


class RateLimitError(NetworkError):
    def __init__(self, reset_time: int | None, status: int | None = 403) -> None:
        self.reset_time = reset_time
        if reset_time is None:
            when = "unknown"
        else:
            iso = _dt.datetime.fromtimestamp(reset_time, tz=_dt.timezone.utc).isoformat()
            when = f"{reset_time} ({iso})"
        super().__init__(f"GitHub API rate limit exhausted; resets at {when}", status)


class QueryRuntimeError(MinerError):
    """Evaluation failure inside one project's run (bounds, overflow, division)."""

    def __init__(self, message: str, pos: tuple[int, int] = (0, 0)) -> None:
        super().__init__(message)
        self.message = message
        self.pos = pos


class RegistrationError(MinerError):
    pass
