"""Numeric audits of the elicitation-accuracy assumptions.

Three conditions on the normalized evaluation v0(t) = v(t, 0) govern which
list format recovers quality without distortion:

* injective: distinct positive values get distinct v0 values;
* symmetry: v0(t) = -v0(-t) for positive t;
* linearity: v0(t - s) = v(t, s) - v(s, t) for t > s > 0.

Each check runs over a finite grid and reports a grid-certified verdict: a
violation always carries a concrete witness pair; "holds" is a certificate
on the grid, not a proof.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .models import ModelSpec, _pair_values

__all__ = [
    "Verdict",
    "AuditGrid",
    "CheckOutcome",
    "AuditReport",
    "check_injective",
    "check_symmetry",
    "check_linearity",
    "audit",
]


class Verdict(str, Enum):
    HOLDS = "holds"
    VIOLATED = "violated"
    INDETERMINATE = "indeterminate"

    def __str__(self) -> str:  # pragma: no cover - display helper
        return self.value


@dataclass(frozen=True)
class AuditGrid:
    """Evaluation grid and tolerance for the assumption checks.

    The tolerance is absolute-plus-relative: two quantities a, b count as
    equal when |a - b| <= tolerance * max(1, |a|, |b|).
    """

    lo: float = 0.01
    hi: float = 10.0
    count: int = 1000
    tolerance: float = 1e-9

    def __post_init__(self) -> None:
        if not self.lo > 0:
            raise ValueError("lo must be positive")
        if not self.hi > self.lo:
            raise ValueError("hi must exceed lo")
        if self.count < 2:
            raise ValueError("count must be at least 2")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")

    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / (self.count - 1)


@dataclass(frozen=True)
class CheckOutcome:
    """One assumption verdict, with a witness pair when violated."""

    verdict: Verdict
    witness: tuple[float, ...] | None = None
    gap: float | None = None

    @property
    def holds(self) -> bool:
        return self.verdict is Verdict.HOLDS


@dataclass(frozen=True)
class AuditReport:
    injective: CheckOutcome
    symmetry: CheckOutcome
    linearity: CheckOutcome
    grid: AuditGrid = field(default_factory=AuditGrid)

    def accuracy(self) -> dict[str, bool]:
        """Which list formats elicit accurately, implied by the verdicts.

        The money list needs injectivity alone; the price list needs
        symmetry on top when the endowment is ignored or kept separate, and
        linearity on top when it is combined with price.
        """
        a1 = self.injective.holds
        return {
            "m": a1,
            "p_ignore_or_separate": a1 and self.symmetry.holds,
            "p_combine": a1 and self.linearity.holds,
        }


def _normalized(model: ModelSpec, ts: np.ndarray) -> np.ndarray:
    return _pair_values(model, ts, np.zeros_like(ts))


def check_injective(model: ModelSpec, grid: AuditGrid = AuditGrid()) -> CheckOutcome:
    """Violated when two non-adjacent grid points share a v0 value.

    Holds only under the stronger certificate that v0 is strictly
    increasing across the grid; indeterminate otherwise.
    """
    ts = grid.points()
    v0 = _normalized(model, ts)
    if not np.all(np.isfinite(v0)):
        return CheckOutcome(Verdict.INDETERMINATE)
    diff = np.abs(v0[:, None] - v0[None, :])
    mags = np.maximum(np.abs(v0)[:, None], np.abs(v0)[None, :])
    close = diff <= grid.tolerance * np.maximum(1.0, mags)
    # pairs at least two grid steps apart (row index = larger t)
    i, j = np.tril_indices(len(ts), k=-2)
    hits = np.flatnonzero(close[i, j])
    if hits.size:
        a, b = i[hits[0]], j[hits[0]]
        return CheckOutcome(
            Verdict.VIOLATED, (float(ts[a]), float(ts[b])), float(diff[a, b])
        )
    if np.all(np.diff(v0) > 0):
        return CheckOutcome(Verdict.HOLDS)
    return CheckOutcome(Verdict.INDETERMINATE)


def check_symmetry(model: ModelSpec, grid: AuditGrid = AuditGrid()) -> CheckOutcome:
    """Violated when v0(t) + v0(-t) exceeds tolerance for some grid t."""
    ts = grid.points()
    pos = _normalized(model, ts)
    neg = _normalized(model, -ts)
    if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(neg))):
        return CheckOutcome(Verdict.INDETERMINATE)
    resid = np.abs(pos + neg)
    bad = resid > grid.tolerance * np.maximum(1.0, np.abs(pos))
    if bad.any():
        k = int(np.argmax(bad))
        return CheckOutcome(Verdict.VIOLATED, (float(ts[k]),), float(resid[k]))
    return CheckOutcome(Verdict.HOLDS)


def check_linearity(model: ModelSpec, grid: AuditGrid = AuditGrid()) -> CheckOutcome:
    """Violated when v0(t-s) differs from v(t,s) - v(s,t) for grid t > s."""
    ts = grid.points()
    i, j = np.tril_indices(len(ts), k=-1)
    t, s = ts[i], ts[j]
    lhs = _pair_values(model, t - s, np.zeros_like(t))
    rhs = _pair_values(model, t, s) - _pair_values(model, s, t)
    if not (np.all(np.isfinite(lhs)) and np.all(np.isfinite(rhs))):
        return CheckOutcome(Verdict.INDETERMINATE)
    resid = np.abs(lhs - rhs)
    scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    bad = resid > grid.tolerance * scale
    if bad.any():
        k = int(np.argmax(bad))
        return CheckOutcome(
            Verdict.VIOLATED, (float(t[k]), float(s[k])), float(resid[k])
        )
    return CheckOutcome(Verdict.HOLDS)


def audit(model: ModelSpec, grid: AuditGrid = AuditGrid()) -> AuditReport:
    """Run all three checks and bundle the verdicts."""
    return AuditReport(
        injective=check_injective(model, grid),
        symmetry=check_symmetry(model, grid),
        linearity=check_linearity(model, grid),
        grid=grid,
    )
