"""Price-list encodings and switch-point elicitation.

Two list formats are supported: a money list that trades a product against
rising cash amounts, and a price list where an endowed subject decides
whether to buy at rising prices.  The price list can be encoded three ways
depending on how the subject treats the endowment (ignore it, keep it as a
separate attribute, or fold it into an earnings attribute).

A switch point is the first row value at which the no-product alternative
is weakly preferred.  The row scan works on the discrete grid; bisection
refines the underlying indifference value on the continuous interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .models import (
    Alternative,
    Menu,
    ModelError,
    ModelSpec,
    ASSUMPTION_STATUS,
    catalog_name,
    margin_rows,
)

__all__ = [
    "MplSpec",
    "Scenario",
    "ElicitationResult",
    "NoCrossingError",
    "encode_row",
    "elicit_rowscan",
    "elicit_bisect",
    "implied_quality",
    "elicit_marginal_attribute",
]

M_MONEY = "m"
P_IGNORE = "p_ignore"
P_SEPARATE = "p_separate"
P_COMBINE = "p_combine"

_P_TAGS = (P_IGNORE, P_SEPARATE, P_COMBINE)


class NoCrossingError(RuntimeError):
    """The preference margin never changes sign over the price grid."""


@dataclass(frozen=True)
class MplSpec:
    """A price-list grid: ascending row values from min to max by increment."""

    min_value: float = 0.01
    max_value: float = 10.0
    increment: float = 0.01

    def __post_init__(self) -> None:
        if not self.min_value > 0:
            raise ValueError("min_value must be positive")
        if not self.max_value > self.min_value:
            raise ValueError("max_value must exceed min_value")
        if not self.increment > 0:
            raise ValueError("increment must be positive")
        span = self.max_value - self.min_value
        steps = round(span / self.increment)
        if abs(steps * self.increment - span) > 1e-9:
            raise ValueError(
                "max_value - min_value must be an integer multiple of increment"
            )

    @property
    def n_rows(self) -> int:
        return round((self.max_value - self.min_value) / self.increment) + 1

    def row_values(self) -> np.ndarray:
        return self.min_value + np.arange(self.n_rows) * self.increment

    def snap(self, value: float) -> float:
        """Round ``value`` onto the grid (nearest row)."""
        k = round((value - self.min_value) / self.increment)
        k = min(max(k, 0), self.n_rows - 1)
        return self.min_value + k * self.increment


@dataclass(frozen=True)
class Scenario:
    """A list format plus endowment treatment and optional constant attributes.

    ``extra_constants`` are appended to both alternatives of every row; by
    additive separability they never move a switch point (a show-up fee kept
    apart from money and price is the canonical example).
    """

    tag: str
    endowment: float | None = None
    extra_constants: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.tag not in (M_MONEY,) + _P_TAGS:
            raise ValueError(f"unknown scenario tag {self.tag!r}")
        needs_e = self.tag in (P_SEPARATE, P_COMBINE)
        if needs_e:
            if self.endowment is None or not self.endowment > 0:
                raise ValueError(f"scenario {self.tag} requires an endowment > 0")
        elif self.endowment is not None:
            raise ValueError(f"scenario {self.tag} takes no endowment")
        object.__setattr__(
            self, "extra_constants", tuple(float(c) for c in self.extra_constants)
        )
        if not all(math.isfinite(c) for c in self.extra_constants):
            raise ValueError("extra constants must be finite")

    @classmethod
    def m_money(cls, extra_constants=()) -> "Scenario":
        return cls(M_MONEY, extra_constants=tuple(extra_constants))

    @classmethod
    def p_ignore(cls, extra_constants=()) -> "Scenario":
        return cls(P_IGNORE, extra_constants=tuple(extra_constants))

    @classmethod
    def p_separate(cls, endowment: float, extra_constants=()) -> "Scenario":
        return cls(P_SEPARATE, float(endowment), tuple(extra_constants))

    @classmethod
    def p_combine(cls, endowment: float, extra_constants=()) -> "Scenario":
        return cls(P_COMBINE, float(endowment), tuple(extra_constants))

    def check_against(self, mpl: MplSpec) -> None:
        """Endowed scenarios need E >= max row value so earnings stay >= 0."""
        if self.tag in (P_SEPARATE, P_COMBINE) and self.endowment < mpl.max_value:
            raise ValueError(
                f"endowment {self.endowment} is below the maximum row value "
                f"{mpl.max_value}"
            )


@dataclass(frozen=True)
class ElicitationResult:
    """A switch point with diagnostics.

    ``switch_point`` is None when the product is preferred on every row
    (clamped == "at_max").  ``crossing_count`` counts strict sign
    alternations of the preference margin; anything other than 1 is a
    diagnostic.  ``plateau`` marks a margin that is identically zero.
    """

    switch_point: float | None
    crossing_count: int
    clamped: str  # "no" | "at_min" | "at_max"
    method: str  # "row_scan" | "bisection"
    plateau: bool = False

    @property
    def degenerate(self) -> bool:
        return self.crossing_count != 1


def _row_alternatives(scenario: Scenario, q: float, value: float):
    if scenario.tag == M_MONEY:
        x, y = (q, 0.0), (0.0, value)
    elif scenario.tag == P_IGNORE:
        x, y = (q, -value), (0.0, 0.0)
    elif scenario.tag == P_SEPARATE:
        e = scenario.endowment
        x, y = (q, -value, e), (0.0, 0.0, e)
    else:  # P_COMBINE
        e = scenario.endowment
        x, y = (q, e - value), (0.0, e)
    extras = scenario.extra_constants
    return x + extras, y + extras


def encode_row(scenario: Scenario, q: float, row_value: float) -> Menu:
    """The binary menu for one list row: product alternative first."""
    if not (math.isfinite(q) and q >= 0):
        raise ValueError("q must be finite and nonnegative")
    if not row_value > 0:
        raise ValueError("row_value must be positive")
    if scenario.tag in (P_SEPARATE, P_COMBINE) and row_value > scenario.endowment:
        raise ValueError("row_value exceeds the endowment")
    x, y = _row_alternatives(scenario, q, row_value)
    return Menu((Alternative(x), Alternative(y)))


def _row_matrices(scenario: Scenario, q: float, values: np.ndarray):
    """Stacked (x, y) attribute matrices for all rows at once."""
    n = len(values)
    zeros = np.zeros(n)

    def col(v):
        return np.full(n, float(v))

    if scenario.tag == M_MONEY:
        x_cols = [col(q), zeros]
        y_cols = [zeros, values]
    elif scenario.tag == P_IGNORE:
        x_cols = [col(q), -values]
        y_cols = [zeros, zeros]
    elif scenario.tag == P_SEPARATE:
        e = scenario.endowment
        x_cols = [col(q), -values, col(e)]
        y_cols = [zeros, zeros, col(e)]
    else:
        e = scenario.endowment
        x_cols = [col(q), e - values]
        y_cols = [zeros, col(e)]
    for c in scenario.extra_constants:
        x_cols.append(col(c))
        y_cols.append(col(c))
    return np.column_stack(x_cols), np.column_stack(y_cols)


def _margins(model: ModelSpec, scenario: Scenario, q: float, values) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    x, y = _row_matrices(scenario, q, values)
    return margin_rows(model, x, y)


def _count_crossings(margins: np.ndarray) -> int:
    signs = np.sign(margins)
    signs = signs[signs != 0]
    if signs.size < 2:
        return 0
    return int(np.count_nonzero(np.diff(signs) != 0))


def _validate_inputs(model, scenario, q, mpl) -> None:
    if not isinstance(model, ModelSpec):
        raise ModelError("model must be a ModelSpec")
    if not (math.isfinite(q) and q >= 0):
        raise ValueError("q must be finite and nonnegative")
    scenario.check_against(mpl)


def elicit_rowscan(
    model: ModelSpec, scenario: Scenario, q: float, mpl: MplSpec = MplSpec()
) -> ElicitationResult:
    """Scan rows in ascending order; switch at the first weakly-preferred row.

    The switch point is the row value at which the no-product side first
    attains a margin <= 0 (ties switch).  A product preferred on every row
    clamps at the top with switch_point None; a first-row switch clamps at
    the bottom.
    """
    _validate_inputs(model, scenario, q, mpl)
    rows = mpl.row_values()
    margins = _margins(model, scenario, q, rows)
    crossings = _count_crossings(margins)
    plateau = bool(np.all(margins == 0))
    switched = margins <= 0
    if not switched.any():
        return ElicitationResult(None, crossings, "at_max", "row_scan", plateau)
    idx = int(np.argmax(switched))
    clamped = "at_min" if idx == 0 else "no"
    return ElicitationResult(float(rows[idx]), crossings, clamped, "row_scan", plateau)


_COARSE_POINTS = 257


def elicit_bisect(
    model: ModelSpec,
    scenario: Scenario,
    q: float,
    mpl: MplSpec = MplSpec(),
    tol: float = 1e-6,
) -> ElicitationResult:
    """Refine the indifference row value by bisection on the margin.

    A coarse scan checks the single-crossing precondition.  With more than
    one sign change the first crossing is refined and the count reported.
    Raises NoCrossingError when the product side stays strictly preferred
    through the top row.  A margin already nonpositive at the bottom row
    returns a bottom-clamped result, mirroring the row scan.
    """
    _validate_inputs(model, scenario, q, mpl)
    if not tol > 0:
        raise ValueError("tol must be positive")
    coarse = np.linspace(mpl.min_value, mpl.max_value, _COARSE_POINTS)
    margins = _margins(model, scenario, q, coarse)
    crossings = _count_crossings(margins)
    plateau = bool(np.all(margins == 0))
    if margins[0] <= 0:
        return ElicitationResult(
            mpl.min_value, crossings, "at_min", "bisection", plateau
        )
    nonpos = margins <= 0
    if not nonpos.any():
        raise NoCrossingError(
            "preference margin never changes sign on the price grid"
        )
    hi_idx = int(np.argmax(nonpos))
    lo, hi = float(coarse[hi_idx - 1]), float(coarse[hi_idx])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if float(_margins(model, scenario, q, [mid])[0]) <= 0:
            hi = mid
        else:
            lo = mid
    return ElicitationResult(hi, crossings, "no", "bisection", plateau)


def implied_quality(
    model: ModelSpec, scenario: Scenario, switch_point: float
) -> float | None:
    """The model-implied quality behind an observed switch point.

    Returns the switch point unchanged for (model, scenario) pairs that
    elicit accurately, applies the closed-form inversion where one exists
    (kinked-utility range normalization on ignore/separate lists; power
    range normalization and generalized pairwise normalization on combined
    lists), and returns None otherwise.
    """
    name = catalog_name(model)
    if name is None:
        return None
    if not (math.isfinite(switch_point) and switch_point > 0):
        raise ValueError("switch_point must be finite and positive")
    injective, symmetry, linearity = ASSUMPTION_STATUS[name]
    tag = scenario.tag
    if tag == M_MONEY:
        return switch_point if injective else None
    if tag in (P_IGNORE, P_SEPARATE):
        if injective and symmetry:
            return switch_point
        if name == "rn-kinked":
            return model.utility.lam * switch_point
        return None
    # combined endowment
    if injective and linearity:
        return switch_point
    e = scenario.endowment
    if switch_point > e:
        raise ValueError("switch_point exceeds the endowment")
    if name == "rn-power":
        a = model.utility.alpha
        return (e**a - (e - switch_point) ** a) ** (1.0 / a)
    if name == "gpn":
        s = model.weight.sigma
        return s * switch_point / (s + 2.0 * e - 2.0 * switch_point)
    return None


def elicit_marginal_attribute(
    model: ModelSpec,
    base: Alternative,
    upgraded: Alternative,
    attribute_index: int,
    mpl: MplSpec = MplSpec(),
) -> ElicitationResult:
    """Elicit one attribute-value gap by the upgrading method.

    ``base`` and ``upgraded`` must agree everywhere except at
    ``attribute_index``, where ``upgraded`` is strictly larger.  Each row
    compares the upgraded alternative (bonus 0) against the base
    alternative plus a rising bonus; the switch point estimates the gap.
    """
    if not isinstance(base, Alternative):
        base = Alternative(base)
    if not isinstance(upgraded, Alternative):
        upgraded = Alternative(upgraded)
    if len(base) != len(upgraded):
        raise ValueError("base and upgraded must have equal attribute counts")
    diffs = [
        i for i, (b, u) in enumerate(zip(base.values, upgraded.values)) if b != u
    ]
    if diffs != [attribute_index]:
        raise ValueError(
            "base and upgraded must differ exactly at attribute_index "
            f"(differ at {diffs})"
        )
    if not upgraded.values[attribute_index] > base.values[attribute_index]:
        raise ValueError("upgraded must be strictly larger at attribute_index")
    for b, u in zip(base.values, upgraded.values):
        if b * u < 0:
            raise ModelError("base and upgraded attribute values share signs")

    rows = mpl.row_values()
    n = len(rows)
    x = np.column_stack(
        [np.full(n, v) for v in upgraded.values] + [np.zeros(n)]
    )
    y = np.column_stack([np.full(n, v) for v in base.values] + [rows])
    margins = margin_rows(model, x, y)
    crossings = _count_crossings(margins)
    plateau = bool(np.all(margins == 0))
    switched = margins <= 0
    if not switched.any():
        return ElicitationResult(None, crossings, "at_max", "row_scan", plateau)
    idx = int(np.argmax(switched))
    clamped = "at_min" if idx == 0 else "no"
    return ElicitationResult(float(rows[idx]), crossings, clamped, "row_scan", plateau)
