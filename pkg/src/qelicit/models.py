"""Multi-attribute choice models with context-dependent attribute weights.

An alternative is a vector of attribute values expressed in a common unit
(dollars).  A model evaluates an alternative inside a menu by summing
per-attribute evaluations v(t, s), where t is the evaluated attribute value
and s the comparable value from the other alternative.  Two model classes
are supported:

* weighted models: v(t, s) = u(t) * w(t, s) with a fixed utility function
  u and a nonnegative weight function w (range normalization, pairwise
  normalization, and their generalizations);
* menu-dependent concave models: v(t, s) given directly by a contextual
  concavity form (plain or range-renormalized).

Evaluation of an all-zero alternative is exactly 0, and v(0, s) = 0 for
every s, for every model in the catalog.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModelError",
    "Alternative",
    "Menu",
    "UtilitySpec",
    "WeightSpec",
    "ModelSpec",
    "WEIGHTED",
    "GENERAL",
    "evaluate",
    "evaluate_margin",
    "normalized_utility",
    "attribute_evaluation",
    "rn_linear",
    "rn_kinked",
    "rn_power",
    "pn",
    "gpn",
    "gpn_power",
    "cc",
    "ncc",
    "CATALOG",
    "ASSUMPTION_STATUS",
    "catalog_name",
]


class ModelError(ValueError):
    """Invalid model parameters or an unsupported model/menu combination."""


# Model kinds: "weighted" models evaluate v(t,s) = u(t)*w(t,s); "general"
# models use a menu-dependent utility (contextual concavity family).
WEIGHTED = "weighted"
GENERAL = "general"


# ---------------------------------------------------------------------------
# Alternatives and menus
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Alternative:
    """An alternative: a tuple of finite attribute values in dollars."""

    values: tuple[float, ...]

    def __init__(self, values) -> None:
        vals = tuple(float(v) for v in values)
        if len(vals) < 1:
            raise ModelError("an alternative needs at least one attribute")
        if not all(math.isfinite(v) for v in vals):
            raise ModelError(f"attribute values must be finite, got {vals}")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class Menu:
    """A menu of two or three equal-length alternatives.

    Within each attribute, values from different alternatives may not have
    opposite signs (quality values are nonnegative, prices nonpositive, and
    so on).  Three-alternative menus are accepted, but only range-weighted
    models can evaluate them.
    """

    alternatives: tuple[Alternative, ...]

    def __init__(self, alternatives) -> None:
        alts = tuple(
            a if isinstance(a, Alternative) else Alternative(a) for a in alternatives
        )
        if len(alts) not in (2, 3):
            raise ModelError(f"a menu holds 2 or 3 alternatives, got {len(alts)}")
        n = len(alts[0])
        if any(len(a) != n for a in alts):
            raise ModelError("all alternatives in a menu must have equal length")
        for i in range(len(alts)):
            for j in range(i + 1, len(alts)):
                for k in range(n):
                    if alts[i].values[k] * alts[j].values[k] < 0:
                        raise ModelError(
                            f"attribute {k}: values {alts[i].values[k]} and "
                            f"{alts[j].values[k]} have opposite signs"
                        )
        object.__setattr__(self, "alternatives", alts)

    @property
    def n_attributes(self) -> int:
        return len(self.alternatives[0])

    def others(self, target: Alternative) -> tuple[Alternative, ...]:
        """All alternatives except ``target`` (which must be a member)."""
        if target not in self.alternatives:
            raise ModelError("target alternative is not a member of the menu")
        picked = False
        rest = []
        for a in self.alternatives:
            if not picked and a == target:
                picked = True
                continue
            rest.append(a)
        return tuple(rest)


# ---------------------------------------------------------------------------
# Model specifications
# ---------------------------------------------------------------------------

_UTILITY_FAMILIES = ("linear", "kinked", "power", "cc")
_WEIGHT_FAMILIES = (
    "constant",
    "range",
    "pairwise",
    "gen_pairwise",
    "gen_pairwise_power",
    "ncc_range",
)


@dataclass(frozen=True)
class UtilitySpec:
    """A utility family with its parameter.

    linear   u(t) = t
    kinked   u(t) = t for gains, lam * t for losses (lam > 1)
    power    u(t) = sign(t) * |t|^alpha (alpha > 0, alpha != 1)
    cc       menu-dependent concave evaluation with exponent theta in (0, 1)
    """

    family: str
    lam: float | None = None
    alpha: float | None = None
    theta: float | None = None

    def __post_init__(self) -> None:
        if self.family not in _UTILITY_FAMILIES:
            raise ModelError(f"unknown utility family {self.family!r}")
        given = {
            "lam": self.lam,
            "alpha": self.alpha,
            "theta": self.theta,
        }
        wanted = {"linear": None, "kinked": "lam", "power": "alpha", "cc": "theta"}[
            self.family
        ]
        for name, value in given.items():
            if name == wanted:
                continue
            if value is not None:
                raise ModelError(
                    f"parameter {name!r} does not apply to {self.family} utility"
                )
        if self.family == "kinked":
            if self.lam is None or not self.lam > 1:
                raise ModelError("kinked utility requires lam > 1")
        elif self.family == "power":
            if self.alpha is None or not self.alpha > 0 or self.alpha == 1:
                raise ModelError("power utility requires alpha > 0 and alpha != 1")
        elif self.family == "cc":
            if self.theta is None or not 0 < self.theta < 1:
                raise ModelError("concave evaluation requires theta in (0, 1)")

    @classmethod
    def linear(cls) -> "UtilitySpec":
        return cls("linear")

    @classmethod
    def kinked(cls, lam: float) -> "UtilitySpec":
        return cls("kinked", lam=float(lam))

    @classmethod
    def power(cls, alpha: float) -> "UtilitySpec":
        return cls("power", alpha=float(alpha))

    @classmethod
    def cc_concavity(cls, theta: float) -> "UtilitySpec":
        return cls("cc", theta=float(theta))


@dataclass(frozen=True)
class WeightSpec:
    """A weight family with its parameters.

    constant            w(t, s) = 1
    range               w(t, s) = |u(t) - u(s)|^gamma, 0 at equal utilities
                        (gamma > -1)
    pairwise            w(t, s) = 1 / (|t| + |s|)
    gen_pairwise        w(t, s) = 1 / (sigma + |t| + |s|), sigma > 0
    gen_pairwise_power  w(t, s) = 1 / (sigma^alpha + |t|^alpha + |s|^alpha)
    ncc_range           w(t, s) = |t - s|^(1 - theta), theta in (0, 1)
    """

    family: str
    gamma: float | None = None
    sigma: float | None = None
    alpha: float | None = None
    theta: float | None = None

    def __post_init__(self) -> None:
        if self.family not in _WEIGHT_FAMILIES:
            raise ModelError(f"unknown weight family {self.family!r}")
        allowed = {
            "constant": (),
            "range": ("gamma",),
            "pairwise": (),
            "gen_pairwise": ("sigma",),
            "gen_pairwise_power": ("sigma", "alpha"),
            "ncc_range": ("theta",),
        }[self.family]
        for name in ("gamma", "sigma", "alpha", "theta"):
            if getattr(self, name) is not None and name not in allowed:
                raise ModelError(
                    f"parameter {name!r} does not apply to {self.family} weight"
                )
        if self.family == "range":
            if self.gamma is None or not self.gamma > -1:
                raise ModelError("range weight requires gamma > -1")
        elif self.family == "gen_pairwise":
            if self.sigma is None or not self.sigma > 0:
                raise ModelError("generalized pairwise weight requires sigma > 0")
        elif self.family == "gen_pairwise_power":
            if self.sigma is None or not self.sigma > 0:
                raise ModelError("generalized pairwise weight requires sigma > 0")
            if self.alpha is None or not self.alpha > 0:
                raise ModelError("generalized pairwise power weight requires alpha > 0")
        elif self.family == "ncc_range":
            if self.theta is None or not 0 < self.theta < 1:
                raise ModelError("renormalizing range weight requires theta in (0, 1)")

    @classmethod
    def constant(cls) -> "WeightSpec":
        return cls("constant")

    @classmethod
    def range_norm(cls, gamma: float) -> "WeightSpec":
        return cls("range", gamma=float(gamma))

    @classmethod
    def pairwise_norm(cls) -> "WeightSpec":
        return cls("pairwise")

    @classmethod
    def gen_pairwise_norm(cls, sigma: float) -> "WeightSpec":
        return cls("gen_pairwise", sigma=float(sigma))

    @classmethod
    def gen_pairwise_norm_power(cls, sigma: float, alpha: float) -> "WeightSpec":
        return cls("gen_pairwise_power", sigma=float(sigma), alpha=float(alpha))

    @classmethod
    def ncc_range(cls, theta: float) -> "WeightSpec":
        return cls("ncc_range", theta=float(theta))


@dataclass(frozen=True)
class ModelSpec:
    """A fully parameterized choice model: utility + weight + model kind."""

    utility: UtilitySpec
    weight: WeightSpec
    kind: str = WEIGHTED

    def __post_init__(self) -> None:
        if self.kind not in (WEIGHTED, GENERAL):
            raise ModelError(f"unknown model kind {self.kind!r}")
        u, w = self.utility.family, self.weight.family
        if (u == "cc") != (self.kind == GENERAL):
            raise ModelError(
                "concave menu-dependent utility requires (and is required by) "
                "the general model kind"
            )
        if w == "pairwise" and u != "linear":
            raise ModelError("pairwise normalization uses linear utility")
        if w == "gen_pairwise" and u != "linear":
            raise ModelError("generalized pairwise normalization uses linear utility")
        if w == "gen_pairwise_power":
            if u != "power":
                raise ModelError(
                    "power-form pairwise normalization uses power utility"
                )
            if self.weight.alpha != self.utility.alpha:
                raise ModelError(
                    "power-form pairwise normalization needs matching alpha in "
                    "utility and weight"
                )
        if w == "ncc_range":
            if u != "cc":
                raise ModelError("renormalizing range weight pairs with cc utility")
            if self.weight.theta != self.utility.theta:
                raise ModelError(
                    "renormalizing range weight needs matching theta in utility "
                    "and weight"
                )
        if self.kind == GENERAL and w not in ("constant", "ncc_range"):
            raise ModelError(
                f"{w} weight is not defined for the general model kind"
            )


# ---------------------------------------------------------------------------
# Catalog constructors
# ---------------------------------------------------------------------------


def rn_linear(gamma: float = 0.0) -> ModelSpec:
    """Range normalization with linear utility."""
    return ModelSpec(UtilitySpec.linear(), WeightSpec.range_norm(gamma))


def rn_kinked(gamma: float, lam: float) -> ModelSpec:
    """Range normalization with a loss-averse kinked utility (lam > 1)."""
    return ModelSpec(UtilitySpec.kinked(lam), WeightSpec.range_norm(gamma))


def rn_power(gamma: float, alpha: float) -> ModelSpec:
    """Range normalization with power utility (alpha > 0, alpha != 1)."""
    return ModelSpec(UtilitySpec.power(alpha), WeightSpec.range_norm(gamma))


def pn() -> ModelSpec:
    """Basic pairwise normalization."""
    return ModelSpec(UtilitySpec.linear(), WeightSpec.pairwise_norm())


def gpn(sigma: float) -> ModelSpec:
    """Generalized pairwise normalization with saturation constant sigma."""
    return ModelSpec(UtilitySpec.linear(), WeightSpec.gen_pairwise_norm(sigma))


def gpn_power(sigma: float, alpha: float) -> ModelSpec:
    """Generalized pairwise normalization with power utility."""
    return ModelSpec(
        UtilitySpec.power(alpha), WeightSpec.gen_pairwise_norm_power(sigma, alpha)
    )


def cc(theta: float) -> ModelSpec:
    """Contextual concavity: menu-dependent concave evaluation."""
    return ModelSpec(UtilitySpec.cc_concavity(theta), WeightSpec.constant(), GENERAL)


def ncc(theta: float) -> ModelSpec:
    """Normalized contextual concavity: cc evaluation times a range weight."""
    return ModelSpec(
        UtilitySpec.cc_concavity(theta), WeightSpec.ncc_range(theta), GENERAL
    )


#: Catalog constructors keyed by the names used in configs and reports.
CATALOG = {
    "rn-linear": rn_linear,
    "rn-kinked": rn_kinked,
    "rn-power": rn_power,
    "pn": pn,
    "gpn": gpn,
    "gpn-power": gpn_power,
    "cc": cc,
    "ncc": ncc,
}

#: Analytic status of the (injective, symmetry, linearity) assumptions for
#: each catalog family.  The numeric audit must reproduce these.
ASSUMPTION_STATUS = {
    "rn-linear": (True, True, True),
    "rn-kinked": (True, False, True),
    "rn-power": (True, True, False),
    "pn": (False, True, False),
    "gpn": (True, True, False),
    "gpn-power": (True, True, False),
    "cc": (True, True, True),
    "ncc": (True, True, True),
}


def catalog_name(model: ModelSpec) -> str | None:
    """Catalog family name of ``model``, or None for off-catalog combinations."""
    key = (model.utility.family, model.weight.family)
    return {
        ("linear", "range"): "rn-linear",
        ("kinked", "range"): "rn-kinked",
        ("power", "range"): "rn-power",
        ("linear", "pairwise"): "pn",
        ("linear", "gen_pairwise"): "gpn",
        ("power", "gen_pairwise_power"): "gpn-power",
        ("cc", "constant"): "cc",
        ("cc", "ncc_range"): "ncc",
    }.get(key)


# ---------------------------------------------------------------------------
# Vectorized evaluation core
#
# All pieces below accept and return float64 arrays (or scalars broadcast to
# 0-d arrays).  The scalar API wraps these, so scalar and array paths produce
# bitwise-identical values.
# ---------------------------------------------------------------------------


def _utility_values(spec: UtilitySpec, t: np.ndarray) -> np.ndarray:
    if spec.family == "linear":
        return +t
    if spec.family == "kinked":
        return np.where(t >= 0, t, spec.lam * t)
    if spec.family == "power":
        return np.sign(t) * np.abs(t) ** spec.alpha
    raise ModelError("cc utility has no menu-free value; use the pair form")


def _cc_values(theta: float, t: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Contextual concavity pair evaluation.

    Gains evaluate as (t - min(t, s))^theta; losses mirror as
    -(max(t, s) - t)^theta.  Within an attribute t and s may not have
    opposite signs.
    """
    if np.any((t > 0) & (s < 0)) or np.any((t < 0) & (s > 0)):
        raise ModelError(
            "contextual concavity needs same-sign attribute values (or zero)"
        )
    gain = np.clip(t - np.minimum(t, s), 0.0, None) ** theta
    loss = -((np.clip(np.maximum(t, s) - t, 0.0, None)) ** theta)
    return np.where(t >= 0, gain, loss)


def _pair_values(model: ModelSpec, t, s) -> np.ndarray:
    """v(t, s): the evaluation of attribute value t against comparator s."""
    t = np.asarray(t, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    w = model.weight
    if model.kind == GENERAL:
        base = _cc_values(model.utility.theta, t, s)
        if w.family == "constant":
            return np.where(t == 0, 0.0, base)
        # ncc_range
        out = base * np.abs(t - s) ** (1.0 - w.theta)
        return np.where(t == 0, 0.0, out)

    u_t = _utility_values(model.utility, t)
    if w.family == "constant":
        return np.where(t == 0, 0.0, u_t)
    if w.family == "range":
        span = np.abs(u_t - _utility_values(model.utility, s))
        with np.errstate(divide="ignore", invalid="ignore"):
            weight = span ** w.gamma
            out = np.where(span == 0, 0.0, u_t * weight)
        return np.where(t == 0, 0.0, out)
    if w.family == "pairwise":
        denom = np.abs(t) + np.abs(s)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = u_t * (1.0 / denom)
        return np.where(t == 0, 0.0, out)
    if w.family == "gen_pairwise":
        out = u_t * (1.0 / (w.sigma + np.abs(t) + np.abs(s)))
        return np.where(t == 0, 0.0, out)
    if w.family == "gen_pairwise_power":
        denom = w.sigma**w.alpha + np.abs(t) ** w.alpha + np.abs(s) ** w.alpha
        out = u_t * (1.0 / denom)
        return np.where(t == 0, 0.0, out)
    raise ModelError(f"unhandled weight family {w.family!r}")


def _range_weight_multi(model: ModelSpec, values: np.ndarray) -> np.ndarray:
    """Range weight across a full attribute column of a 3-option menu.

    ``values`` has shape (..., n_alternatives); the weight is the utility
    range raised to gamma, and exactly 0 when all utilities coincide.
    """
    if model.weight.family != "range":
        raise ModelError(
            "menus with three alternatives are only defined for range-weighted "
            "models"
        )
    u = _utility_values(model.utility, values)
    span = u.max(axis=-1) - u.min(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        weight = span ** model.weight.gamma
    return np.where(span == 0, 0.0, weight)


def margin_rows(model: ModelSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """V(x) - V(y) for stacked binary menus, accumulated attribute by attribute.

    ``x`` and ``y`` have shape (n_rows, n_attributes).  Summation runs in
    attribute order so that an attribute shared by both alternatives
    contributes an exact 0.0 and never perturbs the result.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ModelError("alternative matrices must have identical shapes")
    acc = np.zeros(x.shape[0], dtype=np.float64)
    for n in range(x.shape[1]):
        acc = acc + (_pair_values(model, x[:, n], y[:, n])
                     - _pair_values(model, y[:, n], x[:, n]))
    return acc


# ---------------------------------------------------------------------------
# Scalar operations
# ---------------------------------------------------------------------------


def attribute_evaluation(model: ModelSpec, t: float, s: float) -> float:
    """v(t, s): evaluation of attribute value t with comparator s.

    For weighted models this is exactly u(t) * w(t, s); v(0, s) = 0 always.
    """
    if not (math.isfinite(t) and math.isfinite(s)):
        raise ModelError("attribute values must be finite")
    return float(_pair_values(model, t, s))


def normalized_utility(model: ModelSpec, t: float) -> float:
    """v(t, 0): marginal evaluation of t against a zero comparator."""
    return attribute_evaluation(model, t, 0.0)


def evaluate(model: ModelSpec, target: Alternative, menu: Menu) -> float:
    """Evaluation V(target | menu) of a member alternative.

    Binary menus sum v(x_n, y_n) over attributes.  Three-option menus are
    supported for range-weighted models only: each attribute gets the weight
    of the full utility range across the three values.
    """
    if not isinstance(target, Alternative):
        target = Alternative(target)
    others = menu.others(target)
    if len(others) == 1:
        x = np.asarray(target.values, dtype=np.float64)
        y = np.asarray(others[0].values, dtype=np.float64)
        total = 0.0
        for n in range(len(x)):
            total += float(_pair_values(model, x[n], y[n]))
        return total
    # three alternatives: stack per-attribute columns
    columns = np.asarray(
        [[a.values[n] for a in menu.alternatives] for n in range(menu.n_attributes)],
        dtype=np.float64,
    )
    weights = _range_weight_multi(model, columns)
    u_target = _utility_values(
        model.utility, np.asarray(target.values, dtype=np.float64)
    )
    total = 0.0
    for n in range(menu.n_attributes):
        if target.values[n] == 0:
            continue
        total += float(u_target[n] * weights[n])
    return total


def evaluate_margin(model: ModelSpec, x: Alternative, y: Alternative) -> float:
    """V(x | {x, y}) - V(y | {y, x}) accumulated attribute by attribute.

    Equivalent to evaluate(x) - evaluate(y) in exact arithmetic; computing
    the difference per attribute makes shared constant attributes cancel
    bitwise, which keeps switch points invariant to appended constants.
    """
    if not isinstance(x, Alternative):
        x = Alternative(x)
    if not isinstance(y, Alternative):
        y = Alternative(y)
    Menu((x, y))  # validates lengths and sign consistency
    xs = np.asarray([x.values], dtype=np.float64)
    ys = np.asarray([y.values], dtype=np.float64)
    return float(margin_rows(model, xs, ys)[0])
