"""CheckReport: the unit of output for every property check."""
from dataclasses import asdict, dataclass, field
from typing import Any, Optional

import numpy as np


@dataclass
class CheckReport:
    name: str
    passed: bool
    max_deviation: float
    tolerance: float
    samples: int
    argmax: Any = None
    t: Optional[float] = None
    k: Optional[int] = None
    skipped: bool = False
    details: dict = field(default_factory=dict)

    @classmethod
    def from_deviations(cls, name, deviations, tolerance, labels=None, fail_above=True, **kw):
        """Summarize per-sample deviations.

        With ``fail_above`` (the usual case) the check passes when every
        deviation is below ``tolerance``; otherwise it passes when the largest
        deviation exceeds it (witness-style checks).
        """
        devs = np.asarray(deviations, dtype=float).reshape(-1)
        if devs.size == 0:
            return cls(name, True, 0.0, float(tolerance), 0, **kw)
        i = int(np.nanargmax(devs)) if not np.all(np.isnan(devs)) else 0
        worst = float(devs[i])
        ok = bool(worst < tolerance) if fail_above else bool(worst > tolerance)
        if np.isnan(worst):
            ok = False
        arg = labels[i] if labels is not None else i
        return cls(name, ok, worst, float(tolerance), int(devs.size), arg, **kw)

    @classmethod
    def skip(cls, name, reason, **kw):
        return cls(name, True, 0.0, float("nan"), 0, skipped=True, details={"reason": reason}, **kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("max_deviation", "tolerance"):
            d[key] = _jsonable(d[key])
        d["argmax"] = _jsonable(d["argmax"])
        d["details"] = _jsonable(d["details"])
        return d

    def line(self) -> str:
        tag = "SKIP" if self.skipped else ("PASS" if self.passed else "FAIL")
        grid = "" if self.t is None else f" t={self.t:g} k={self.k}"
        return f"{tag} {self.name}{grid}: max_dev={self.max_deviation:.3e} tol={self.tolerance:.1e} n={self.samples}"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    if isinstance(x, float) and not np.isfinite(x):
        return None
    return x
