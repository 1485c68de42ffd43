from typing import Any


class FucikError(Exception):
    """Base error of the toolkit.

    Every error carries the process exit status used by the command line and a
    human readable detail, the same pair an HTTP error carries.
    """

    status_code: int = 1

    def __init__(self, detail: str, status_code: int | None = None):
        super().__init__(detail)
        self.detail = detail
        if status_code is not None:
            self.status_code = status_code

    def to_dict(self) -> dict[str, Any]:
        return {
            "type": type(self).__name__,
            "status_code": self.status_code,
            "detail": self.detail,
        }


class DegenerateInputError(FucikError):
    """A field (or a step) collapsed to zero where a nonzero field is needed."""

    status_code = 4


class ConstraintViolationError(FucikError):
    """A field claimed to lie on the unit L^p sphere does not."""

    status_code = 4


class PreconditionError(FucikError):
    """A hypothesis of the requested computation does not hold."""

    status_code = 5


class OnSpectrumBandError(PreconditionError):
    """The queried point is too close to the computed spectrum."""


class ExtrapolationError(FucikError):
    status_code = 6

    def __init__(self, detail: str, needed_s: float):
        super().__init__(detail)
        self.needed_s = needed_s

    def to_dict(self) -> dict[str, Any]:
        data = super().to_dict()
        data["needed_s"] = self.needed_s
        return data


class ConvergenceError(FucikError):
    """Iteration budget exhausted. The best iterate is attached when one exists."""

    status_code = 7

    def __init__(self, detail: str, best: Any = None, residual: float | None = None):
        super().__init__(detail)
        self.best = best
        self.residual = residual

    def to_dict(self) -> dict[str, Any]:
        data = super().to_dict()
        data["residual"] = self.residual
        return data
