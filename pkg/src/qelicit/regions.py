"""Prediction regions over a two-product price plane.

Given elicited quality values for a low- and a high-quality product, a
range-weighted model predicts, for every price pair, which of the three
alternatives is chosen: the high-quality product, the low-quality product,
or the outside option (zero quality, zero price).  The per-attribute weight
of a three-option menu is the utility range across the three values raised
to gamma, zero when all three coincide.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import (
    Alternative,
    Menu,
    ModelError,
    ModelSpec,
    _range_weight_multi,
    _utility_values,
    evaluate,
)

__all__ = [
    "RegionSpec",
    "Cell",
    "RegionGrid",
    "NoBoundaryError",
    "predict_choice",
    "region_grid",
    "boundary_trace",
]

LABELS = ("h", "l", "o")


class NoBoundaryError(ValueError):
    """The requested pair of regions shares no edge on the grid."""


def _grid_values(lo: float, hi: float, step: float) -> np.ndarray:
    if not step > 0:
        raise ValueError("grid step must be positive")
    if hi < lo:
        raise ValueError("grid upper bound below lower bound")
    n = int(round((hi - lo) / step))
    if abs(lo + n * step - hi) > 1e-9:
        raise ValueError("grid bounds must be a whole number of steps apart")
    return lo + np.arange(n + 1) * step


@dataclass(frozen=True)
class RegionSpec:
    """Elicited qualities, a model, and the price grids to label."""

    lq: float
    hq: float
    model: ModelSpec
    lp_grid: tuple[float, float, float] = (0.0, 25.0, 0.25)
    hp_grid: tuple[float, float, float] = (0.0, 25.0, 0.25)

    def __post_init__(self) -> None:
        if not self.lq > 0:
            raise ValueError("lq must be positive")
        if not self.hq > self.lq:
            raise ValueError("hq must exceed lq")
        if self.model.weight.family != "range":
            raise ModelError(
                "prediction regions need a range-weighted model for the "
                "three-option menu"
            )
        _grid_values(*self.lp_grid)
        _grid_values(*self.hp_grid)

    def menu(self, lp: float, hp: float) -> Menu:
        return Menu(
            (
                Alternative((self.hq, -hp)),
                Alternative((self.lq, -lp)),
                Alternative((0.0, 0.0)),
            )
        )


@dataclass(frozen=True)
class Cell:
    """One labeled grid cell; exact ties are flagged, not broken silently."""

    label: str
    tie: bool
    v_h: float
    v_l: float

    @property
    def v_o(self) -> float:
        return 0.0


def _values_at(spec: RegionSpec, lp, hp) -> tuple[np.ndarray, np.ndarray]:
    """(V_h, V_l) over broadcast price arrays; V_o is identically 0."""
    lp = np.asarray(lp, dtype=np.float64)
    hp = np.asarray(hp, dtype=np.float64)
    lp, hp = np.broadcast_arrays(lp, hp)
    if np.any(lp < 0) or np.any(hp < 0):
        raise ValueError("prices must be nonnegative")
    model = spec.model
    qualities = np.broadcast_to(
        np.array([spec.hq, spec.lq, 0.0]), lp.shape + (3,)
    )
    prices = np.stack([-hp, -lp, np.zeros_like(lp)], axis=-1)
    w_q = _range_weight_multi(model, qualities)
    w_p = _range_weight_multi(model, prices)
    u = model.utility
    v_h = _utility_values(u, np.float64(spec.hq)) * w_q + _utility_values(u, -hp) * w_p
    v_l = _utility_values(u, np.float64(spec.lq)) * w_q + _utility_values(u, -lp) * w_p
    return v_h, v_l


def _label(v_h: float, v_l: float) -> tuple[str, bool]:
    values = {"h": v_h, "l": v_l, "o": 0.0}
    best = max(values.values())
    winners = [k for k in LABELS if values[k] == best]
    return winners[0], len(winners) > 1


def predict_choice(spec: RegionSpec, lp: float, hp: float) -> Cell:
    """Label one price pair by the argmax of the three evaluations."""
    v_h, v_l = _values_at(spec, float(lp), float(hp))
    v_h, v_l = float(v_h), float(v_l)
    label, tie = _label(v_h, v_l)
    return Cell(label, tie, v_h, v_l)


@dataclass(frozen=True)
class RegionGrid:
    """Labels over the full price grid; axis 0 is lp, axis 1 is hp."""

    spec: RegionSpec
    lp_values: np.ndarray
    hp_values: np.ndarray
    labels: np.ndarray
    ties: np.ndarray
    v_h: np.ndarray
    v_l: np.ndarray

    def cell(self, i: int, j: int) -> Cell:
        return Cell(
            str(self.labels[i, j]),
            bool(self.ties[i, j]),
            float(self.v_h[i, j]),
            float(self.v_l[i, j]),
        )

    def iter_cells(self):
        for i, lp in enumerate(self.lp_values):
            for j, hp in enumerate(self.hp_values):
                yield float(lp), float(hp), self.cell(i, j)


def region_grid(spec: RegionSpec) -> RegionGrid:
    """Label every cell of the price grid."""
    lps = _grid_values(*spec.lp_grid)
    hps = _grid_values(*spec.hp_grid)
    lp_mesh, hp_mesh = np.meshgrid(lps, hps, indexing="ij")
    v_h, v_l = _values_at(spec, lp_mesh, hp_mesh)
    stacked = np.stack([v_h, v_l, np.zeros_like(v_h)], axis=-1)
    best = stacked.max(axis=-1)
    is_best = stacked == best[..., None]
    labels = np.array(LABELS)[np.argmax(is_best, axis=-1)]
    ties = is_best.sum(axis=-1) > 1
    return RegionGrid(spec, lps, hps, labels, ties, v_h, v_l)


def _value_of(spec: RegionSpec, label: str, lp: float, hp: float) -> float:
    if label == "o":
        return 0.0
    v_h, v_l = _values_at(spec, lp, hp)
    return float(v_h) if label == "h" else float(v_l)


def _refine(
    spec: RegionSpec,
    a: str,
    b: str,
    p0: tuple[float, float],
    p1: tuple[float, float],
    value_tol: float,
    pos_tol: float,
) -> tuple[float, float] | None:
    """Bisect V(a) - V(b) along the segment p0 -> p1."""

    def gap(point):
        return _value_of(spec, a, *point) - _value_of(spec, b, *point)

    g0, g1 = gap(p0), gap(p1)
    if g0 == 0:
        return p0
    if g1 == 0:
        return p1
    if (g0 > 0) == (g1 > 0):
        return None
    lo, hi = np.array(p0), np.array(p1)
    g_lo = g0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        g_mid = gap(tuple(mid))
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
        if (
            abs(g_mid) <= value_tol
            and float(np.hypot(*(hi - lo))) <= pos_tol
        ):
            return float(mid[0]), float(mid[1])
    mid = 0.5 * (lo + hi)
    return float(mid[0]), float(mid[1])


def boundary_trace(
    grid: RegionGrid,
    pair: tuple[str, str],
    value_tol: float = 1e-6,
    pos_tol: float = 1e-4,
) -> list[tuple[float, float]]:
    """Indifference points between the two labeled regions, as a polyline.

    Every pair of edge-adjacent cells carrying the two labels contributes
    one bisection-refined point on the segment between the cell centers,
    at which the two evaluations agree within ``value_tol``.  Points come
    back sorted by (lp, hp).  Raises NoBoundaryError when the regions never
    touch.
    """
    a, b = pair
    if a not in LABELS or b not in LABELS or a == b:
        raise ValueError(f"pair must name two distinct labels from {LABELS}")
    labels = grid.labels
    points: list[tuple[float, float]] = []
    n_lp, n_hp = labels.shape
    for i in range(n_lp):
        for j in range(n_hp):
            here = labels[i, j]
            for di, dj in ((1, 0), (0, 1)):
                ni, nj = i + di, j + dj
                if ni >= n_lp or nj >= n_hp:
                    continue
                there = labels[ni, nj]
                if {here, there} != {a, b}:
                    continue
                p0 = (float(grid.lp_values[i]), float(grid.hp_values[j]))
                p1 = (float(grid.lp_values[ni]), float(grid.hp_values[nj]))
                first, second = (a, b) if here == a else (b, a)
                point = _refine(grid.spec, first, second, p0, p1, value_tol, pos_tol)
                if point is not None:
                    points.append(point)
    if not points:
        raise NoBoundaryError(f"no {a}/{b} boundary on this grid")
    return sorted(points)
