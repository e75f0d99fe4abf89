"""Synthetic cohorts: heterogeneous subjects reporting switch points.

Each subject carries a choice model, a treatment order, an endowment
scenario for the price block, and a true quality per product.  Simulation
runs both list formats per product, optionally perturbs the switch point
with Gaussian noise, rounds to the cent grid, and clamps into the reporting
range.  Everything is deterministic given the master seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .elicitation import MplSpec, Scenario, elicit_rowscan
from .models import ModelSpec

__all__ = [
    "Product",
    "SubjectProfile",
    "SubjectRecord",
    "Dataset",
    "DEFAULT_PRODUCTS",
    "derive_subject_seed",
    "round_to_cents",
    "simulate_subject",
    "simulate_cohort",
    "uniform_quality_profiles",
]

BLOCKS = ("m", "p")
TREATMENTS = ("mp", "pm")

# Reporting range of the experiment's switch points, in dollars.
REPORT_MIN = 0.01
REPORT_MAX = 10.0


def _is_cents(value: float) -> bool:
    return abs(value * 100.0 - round(value * 100.0)) <= 1e-6


def round_to_cents(value: float) -> float:
    """Round to two decimals, halves away from zero."""
    return math.copysign(math.floor(abs(value) * 100.0 + 0.5) / 100.0, value)


@dataclass(frozen=True)
class Product:
    product_id: int
    name: str
    market_price: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.market_price) and self.market_price >= 0):
            raise ValueError("market_price must be finite and nonnegative")
        if not _is_cents(self.market_price):
            raise ValueError("market_price must be a cent multiple")


# Thirty snack products for the default catalog.  The prices are synthetic
# defaults chosen to look like grocery-store price tags; they only feed the
# Price covariate of the analysis.
DEFAULT_PRODUCTS: tuple[Product, ...] = tuple(
    Product(i + 1, name, price)
    for i, (name, price) in enumerate(
        [
            ("Apple Chips (3.4 oz)", 3.49),
            ("Cheetos Crunchy (8.5 oz)", 4.79),
            ("Cheez-It Original (12.4 oz)", 4.49),
            ("Chips Ahoy Original (13 oz)", 4.29),
            ("Coke (12 fl oz)", 0.99),
            ("Coke Zero Sugar (12 fl oz)", 0.99),
            ("Doritos Nacho Cheese (9.25 oz)", 4.99),
            ("Chocolate Covered Pretzels (7.5 oz)", 4.19),
            ("Goldfish Cheddar (6.6 oz)", 2.89),
            ("Gummi Candy (8 oz)", 2.49),
            ("Milk Chocolate Bar (1.55 oz)", 1.29),
            ("Peppermint Cubes (3.24 oz)", 3.59),
            ("Caramel Almond Bar (1.4 oz)", 1.99),
            ("Dark Chocolate Nut Bar (1.4 oz)", 1.99),
            ("Classic Potato Chips (8 oz)", 4.39),
            ("Biscoff Cookies (8.8 oz)", 3.89),
            ("Double Dark Chocolate Cookies (7.5 oz)", 4.59),
            ("Milk Chocolate Cookies (6 oz)", 4.59),
            ("Milk Chocolate Candies (3.14 oz)", 2.59),
            ("Chocolate Sandwich Cookies (14.3 oz)", 4.99),
            ("Chocolate Cream Sticks (2.47 oz)", 2.79),
            ("Strawberry Cream Sticks (2.47 oz)", 2.79),
            ("Frosted Cookies and Creme Pastries (13.5 oz)", 3.99),
            ("Frosted Smores Pastries (13.5 oz)", 3.99),
            ("Stacked Chips Original (5.2 oz)", 2.29),
            ("Stacked Chips Sour Cream (5.5 oz)", 2.29),
            ("Fruit Candies (2.17 oz)", 1.49),
            ("Chocolate Nougat Bar (1.86 oz)", 1.39),
            ("Sprite (12 fl oz)", 0.99),
            ("Caramel Cookie Bar (1.79 oz)", 1.39),
        ]
    )
)


@dataclass(frozen=True)
class SubjectProfile:
    """One synthetic subject: model, scenario, treatment, and true qualities."""

    subject_id: int
    model: ModelSpec
    p_scenario: Scenario
    true_qualities: Mapping[int, float]
    noise_sd: float = 0.0
    treatment: str = "mp"

    def __post_init__(self) -> None:
        if self.p_scenario.tag == "m":
            raise ValueError("p_scenario must be one of the price-list scenarios")
        if self.treatment not in TREATMENTS:
            raise ValueError(f"treatment must be one of {TREATMENTS}")
        if not self.noise_sd >= 0:
            raise ValueError("noise_sd must be nonnegative")
        qualities = dict(self.true_qualities)
        for pid, q in qualities.items():
            if not (math.isfinite(q) and q >= 0):
                raise ValueError(f"true quality for product {pid} must be >= 0")
        object.__setattr__(self, "true_qualities", qualities)


@dataclass(frozen=True)
class SubjectRecord:
    """One reported switch point: subject x product x block."""

    subject_id: int
    product_id: int
    treatment: str
    block: str
    switch_point: float
    market_price: float
    flag: str = ""

    def __post_init__(self) -> None:
        if self.block not in BLOCKS:
            raise ValueError(f"block must be one of {BLOCKS}")
        if self.treatment not in TREATMENTS:
            raise ValueError(f"treatment must be one of {TREATMENTS}")
        sp = self.switch_point
        if not (REPORT_MIN - 1e-9 <= sp <= REPORT_MAX + 1e-9):
            raise ValueError(f"switch_point {sp} outside [{REPORT_MIN}, {REPORT_MAX}]")
        if not _is_cents(sp):
            raise ValueError(f"switch_point {sp} is not a cent multiple")
        if not _is_cents(self.market_price):
            raise ValueError("market_price must be a cent multiple")

    def sort_key(self):
        return (self.subject_id, self.product_id, self.block)


@dataclass(frozen=True)
class Dataset:
    """Records plus the product catalog backing their market prices."""

    records: tuple[SubjectRecord, ...]
    products: tuple[Product, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "products", tuple(self.products))
        seen: set[tuple[int, int, str]] = set()
        per_pair: dict[tuple[int, int], int] = {}
        prices = {p.product_id: p.market_price for p in self.products}
        for r in self.records:
            key = (r.subject_id, r.product_id, r.block)
            if key in seen:
                raise ValueError(f"duplicate record for {key}")
            seen.add(key)
            per_pair[key[:2]] = per_pair.get(key[:2], 0) + 1
            if r.product_id not in prices:
                raise ValueError(f"record references unknown product {r.product_id}")
            if prices[r.product_id] != r.market_price:
                raise ValueError(
                    f"market price mismatch for product {r.product_id}"
                )
        bad = [pair for pair, n in per_pair.items() if n != 2]
        if bad:
            raise ValueError(
                f"each (subject, product) pair needs one record per block: {bad[:5]}"
            )

    @property
    def subject_ids(self) -> tuple[int, ...]:
        return tuple(sorted({r.subject_id for r in self.records}))

    def sorted_records(self) -> tuple[SubjectRecord, ...]:
        return tuple(sorted(self.records, key=SubjectRecord.sort_key))


def derive_subject_seed(master_seed: int, subject_id: int) -> int:
    """Per-subject seed: first 64-bit word of SeedSequence((master, id))."""
    if master_seed < 0 or subject_id < 0:
        raise ValueError("seeds and subject ids must be nonnegative")
    ss = np.random.SeedSequence((master_seed, subject_id))
    return int(ss.generate_state(1, np.uint64)[0])


def _record_switch(result, noise_sd: float, rng) -> tuple[float, str]:
    flag = ""
    if result.switch_point is None:
        value, flag = REPORT_MAX, "at_max"
    else:
        value = result.switch_point
    if result.plateau:
        flag = "plateau"
    elif result.crossing_count > 1:
        flag = "multi_crossing"
    if noise_sd > 0:
        value = value + rng.normal(0.0, noise_sd)
        value = round_to_cents(value)
    return min(max(value, REPORT_MIN), REPORT_MAX), flag


def simulate_subject(
    profile: SubjectProfile,
    mpl: MplSpec = MplSpec(),
    rng_seed: int = 0,
    products: Sequence[Product] = DEFAULT_PRODUCTS,
) -> list[SubjectRecord]:
    """Both blocks for every product of one subject, in (product, block) order.

    Noise draws happen in product order, money block first, so results are
    reproducible from the seed alone.
    """
    prices = {p.product_id: p.market_price for p in products}
    missing = sorted(set(profile.true_qualities) - set(prices))
    if missing:
        raise ValueError(f"no market price for products {missing}")
    rng = np.random.default_rng(rng_seed)
    m_scenario = Scenario.m_money()
    records = []
    for pid in sorted(profile.true_qualities):
        q = profile.true_qualities[pid]
        for block, scenario in (("m", m_scenario), ("p", profile.p_scenario)):
            result = elicit_rowscan(profile.model, scenario, q, mpl)
            value, flag = _record_switch(result, profile.noise_sd, rng)
            records.append(
                SubjectRecord(
                    subject_id=profile.subject_id,
                    product_id=pid,
                    treatment=profile.treatment,
                    block=block,
                    switch_point=value,
                    market_price=prices[pid],
                    flag=flag,
                )
            )
    return records


def simulate_cohort(
    profiles: Sequence[SubjectProfile],
    mpl: MplSpec = MplSpec(),
    master_seed: int = 0,
    products: Sequence[Product] = DEFAULT_PRODUCTS,
) -> Dataset:
    """Simulate all subjects with seeds split off the master seed."""
    if not profiles:
        raise ValueError("profiles must be nonempty")
    ids = [p.subject_id for p in profiles]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate subject_ids in profiles")
    records: list[SubjectRecord] = []
    for profile in profiles:
        seed = derive_subject_seed(master_seed, profile.subject_id)
        records.extend(simulate_subject(profile, mpl, seed, products))
    records.sort(key=SubjectRecord.sort_key)
    used = {r.product_id for r in records}
    catalog = tuple(p for p in products if p.product_id in used)
    return Dataset(tuple(records), catalog)


def uniform_quality_profiles(
    n_subjects: int,
    model: ModelSpec,
    p_scenario: Scenario,
    products: Sequence[Product] = DEFAULT_PRODUCTS,
    master_seed: int = 0,
    noise_sd: float = 0.0,
    q_low: float = 0.0,
    q_high: float = 8.0,
) -> list[SubjectProfile]:
    """A cohort sharing one model, with uniform true qualities per product.

    Quality draws use SeedSequence((master_seed, subject_id, 1)) so they
    never collide with the per-subject noise streams.  Treatments alternate
    mp, pm, mp, ... by subject id.
    """
    if n_subjects < 1:
        raise ValueError("n_subjects must be positive")
    profiles = []
    for i in range(1, n_subjects + 1):
        rng = np.random.default_rng(np.random.SeedSequence((master_seed, i, 1)))
        qualities = {
            p.product_id: float(rng.uniform(q_low, q_high)) for p in products
        }
        profiles.append(
            SubjectProfile(
                subject_id=i,
                model=model,
                p_scenario=p_scenario,
                true_qualities=qualities,
                noise_sd=noise_sd,
                treatment=TREATMENTS[(i - 1) % 2],
            )
        )
    return profiles
