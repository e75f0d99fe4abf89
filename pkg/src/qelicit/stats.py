"""Analysis pipeline for switch-point datasets.

Covers product filtering, individual switch points, the exact binomial sign
test and its per-subject threshold scores, type classification with
equal-value bounds, empirical CDFs, and fixed-effects OLS with clustered
standard errors.  The binomial tail is computed with exact rationals; the
auxiliary location tests use plain normal approximations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from statistics import NormalDist
from typing import Iterable, Sequence

import numpy as np

from .cohort import Dataset, SubjectRecord, REPORT_MIN

__all__ = [
    "AnalysisConfig",
    "SubjectSummary",
    "GroupMeans",
    "RegressionResult",
    "AnalysisReport",
    "binom_tail",
    "sign_test_counts",
    "sign_test",
    "threshold_score",
    "summarize_subjects",
    "cohort_means",
    "cdf_points",
    "fe_ols",
    "paired_t_test",
    "wilcoxon_signed_rank",
    "wilcoxon_rank_sum",
    "run_analysis",
    "format_report",
]

_EQUAL_VALUE_RULES = ("discard", "equal_split", "proportional_split")
_FE_SPECS = ("none", "subject", "subject_product")

M_HIGH = "m_high"
P_HIGH = "p_high"
UNCLASSIFIED = "unclassified"


# ---------------------------------------------------------------------------
# Exact binomial machinery
# ---------------------------------------------------------------------------


def binom_tail(i: int, k: int) -> Fraction:
    """G(i, k) = P(X >= k) for X ~ Binomial(i, 1/2), as an exact rational."""
    if i < 1:
        raise ValueError("i must be at least 1")
    if not 0 <= k <= i:
        raise ValueError(f"k must lie in [0, {i}], got {k}")
    return Fraction(sum(math.comb(i, j) for j in range(k, i + 1)), 1 << i)


def sign_test_counts(n_m_higher: int, n_p_higher: int) -> float:
    """Two-sided sign-test p-value from directional counts, capped at 1."""
    total = n_m_higher + n_p_higher
    if total == 0:
        raise ValueError("sign test needs at least one directional subject")
    p = 2 * binom_tail(total, max(n_m_higher, n_p_higher))
    return float(min(p, Fraction(1)))


def sign_test(summaries: Iterable["SubjectSummary"]) -> float:
    """Two-sided sign test on individual switch-point differences.

    Subjects with equal (or missing) individual switch points carry no
    direction and are dropped.
    """
    n_m, n_p = _directional_counts(summaries)
    return sign_test_counts(n_m, n_p)


def _directional_counts(summaries) -> tuple[int, int]:
    n_m = n_p = 0
    for s in summaries:
        if s.individual_m is None or s.individual_p is None:
            continue
        if s.individual_m > s.individual_p:
            n_m += 1
        elif s.individual_p > s.individual_m:
            n_p += 1
    return n_m, n_p


def threshold_score(k_total: int, significance: float = 0.05) -> int | None:
    """Smallest score whose two-sided tail beats ``significance``.

    Every score at or above the returned value is significant; None when
    even a perfect score k_total is not (k_total <= 5 at the 5% level).
    """
    if k_total < 0:
        raise ValueError("k_total must be nonnegative")
    if not 0 < significance < 1:
        raise ValueError("significance must lie strictly between 0 and 1")
    if k_total == 0:
        return None
    for k in range(k_total + 1):
        if 2 * binom_tail(k_total, k) < significance:
            return k
    return None


# ---------------------------------------------------------------------------
# Subject summaries and classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnalysisConfig:
    """Filtering and scoring options for the analysis pipeline.

    ``include_nonpositive`` switches the individual switch points (and the
    regression sample) to the entire dataset; the directional scores are
    unaffected because bottom-coded products have equal values in both
    blocks and never carry a direction.  ``outlier_abs_diff`` optionally
    drops subjects whose individual switch points differ by at least the
    cutoff; it defaults to off.
    """

    include_nonpositive: bool = False
    significance: float = 0.05
    equal_value_rule: str = "discard"
    outlier_abs_diff: float | None = None

    def __post_init__(self) -> None:
        if not 0 < self.significance < 1:
            raise ValueError("significance must lie strictly between 0 and 1")
        if self.equal_value_rule not in _EQUAL_VALUE_RULES:
            raise ValueError(
                f"equal_value_rule must be one of {_EQUAL_VALUE_RULES}"
            )
        if self.outlier_abs_diff is not None and not self.outlier_abs_diff > 0:
            raise ValueError("outlier_abs_diff must be positive when set")


@dataclass(frozen=True)
class SubjectSummary:
    """Per-subject aggregates, scores, threshold, and type."""

    subject_id: int
    treatment: str
    individual_m: float | None
    individual_p: float | None
    n_positive: int
    n_nonpositive: int
    n_equal_value: int
    abs_m_score: int
    abs_p_score: int
    adj_m_score: int
    adj_p_score: int
    k_effective: int
    threshold: int | None
    subject_type: str


def _pairs_by_subject(records: Sequence[SubjectRecord]):
    table: dict[int, dict[int, dict[str, float]]] = {}
    treatments: dict[int, str] = {}
    for r in records:
        table.setdefault(r.subject_id, {}).setdefault(r.product_id, {})[
            r.block
        ] = r.switch_point
        treatments[r.subject_id] = r.treatment
    for sid, prods in table.items():
        for pid, blocks in prods.items():
            if set(blocks) != {"m", "p"}:
                raise ValueError(
                    f"subject {sid} product {pid} is missing a block record"
                )
    return table, treatments


def _split_equal(n_eq: int, m_score: int, p_score: int) -> tuple[int, int]:
    """Split equal-value products half and half; odd leftover to the smaller
    score (to the p-score on a tied split)."""
    half, extra = divmod(n_eq, 2)
    if extra == 0:
        return half, half
    if m_score < p_score:
        return half + 1, half
    return half, half + 1


def _split_proportional(n_eq: int, m_score: int, p_score: int) -> tuple[int, int]:
    """Split by score ratio with largest-remainder rounding."""
    total = m_score + p_score
    if total == 0:
        return _split_equal(n_eq, m_score, p_score)
    exact_m = Fraction(n_eq * m_score, total)
    add_m = math.floor(exact_m)
    add_p = math.floor(Fraction(n_eq * p_score, total))
    leftover = n_eq - add_m - add_p
    if leftover:
        rem_m = exact_m - add_m
        rem_p = Fraction(n_eq * p_score, total) - add_p
        if rem_m > rem_p or (rem_m == rem_p and m_score >= p_score):
            add_m += leftover
        else:
            add_p += leftover
    return add_m, add_p


def summarize_subjects(
    dataset: Dataset | Sequence[SubjectRecord],
    config: AnalysisConfig = AnalysisConfig(),
) -> list[SubjectSummary]:
    """Aggregate each subject's records into scores, threshold, and type.

    Products bottom-coded in both blocks are excluded from the individual
    switch points unless ``include_nonpositive`` is set.  Equal-value
    products (equal above-minimum switch points) enter the scores per the
    configured rule; discarding them is the baseline.
    """
    records = dataset.records if isinstance(dataset, Dataset) else tuple(dataset)
    table, treatments = _pairs_by_subject(records)
    summaries = []
    for sid in sorted(table):
        m_vals, p_vals, m_all, p_all = [], [], [], []
        m_score = p_score = n_eq = n_nonpos = 0
        for pid in sorted(table[sid]):
            m, p = table[sid][pid]["m"], table[sid][pid]["p"]
            m_all.append(m)
            p_all.append(p)
            if m == REPORT_MIN and p == REPORT_MIN:
                n_nonpos += 1
                continue
            m_vals.append(m)
            p_vals.append(p)
            if m > p:
                m_score += 1
            elif p > m:
                p_score += 1
            else:
                n_eq += 1
        n_pos = len(m_vals)
        if config.include_nonpositive:
            ind_m, ind_p = float(np.mean(m_all)), float(np.mean(p_all))
        elif n_pos:
            ind_m, ind_p = float(np.mean(m_vals)), float(np.mean(p_vals))
        else:
            ind_m = ind_p = None

        rule = config.equal_value_rule
        if rule == "discard":
            add_m = add_p = 0
            k_eff = m_score + p_score
        else:
            split = _split_equal if rule == "equal_split" else _split_proportional
            add_m, add_p = split(n_eq, m_score, p_score)
            k_eff = m_score + p_score + n_eq
        adj_m, adj_p = m_score + add_m, p_score + add_p
        threshold = threshold_score(k_eff, config.significance) if k_eff else None
        if threshold is not None and adj_m >= threshold:
            subject_type = M_HIGH
        elif threshold is not None and adj_p >= threshold:
            subject_type = P_HIGH
        else:
            subject_type = UNCLASSIFIED
        summaries.append(
            SubjectSummary(
                subject_id=sid,
                treatment=treatments[sid],
                individual_m=ind_m,
                individual_p=ind_p,
                n_positive=n_pos,
                n_nonpositive=n_nonpos,
                n_equal_value=n_eq,
                abs_m_score=m_score,
                abs_p_score=p_score,
                adj_m_score=adj_m,
                adj_p_score=adj_p,
                k_effective=k_eff,
                threshold=threshold,
                subject_type=subject_type,
            )
        )
    return summaries


# ---------------------------------------------------------------------------
# Cohort means and CDFs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroupMeans:
    group: str
    n_subjects: int
    mean_m: float
    sd_m: float
    mean_p: float
    sd_p: float


def cohort_means(
    summaries: Sequence[SubjectSummary], by: str = "treatment"
) -> list[GroupMeans]:
    """Means and (population) SDs of individual switch points per group."""
    if by not in ("treatment", "pooled"):
        raise ValueError("by must be 'treatment' or 'pooled'")
    usable = [s for s in summaries if s.individual_m is not None]
    groups: dict[str, list[SubjectSummary]] = {}
    if by == "treatment":
        for s in usable:
            groups.setdefault(s.treatment, []).append(s)
    else:
        groups["pooled"] = list(usable)
    out = []
    for name in sorted(groups):
        members = groups[name]
        if not members:
            raise ValueError(f"group {name} is empty")
        ms = np.array([s.individual_m for s in members])
        ps = np.array([s.individual_p for s in members])
        out.append(
            GroupMeans(
                group=name,
                n_subjects=len(members),
                mean_m=float(ms.mean()),
                sd_m=float(ms.std()),
                mean_p=float(ps.mean()),
                sd_p=float(ps.std()),
            )
        )
    return out


def cdf_points(values: Sequence[float]) -> list[tuple[float, float]]:
    """Right-continuous empirical CDF support points (value, fraction)."""
    vals = sorted(values)
    if not vals:
        raise ValueError("cdf_points needs a nonempty input")
    n = len(vals)
    out: list[tuple[float, float]] = []
    for i, v in enumerate(vals, start=1):
        if i == n or vals[i] != v:
            out.append((v, i / n))
    return out


# ---------------------------------------------------------------------------
# Fixed-effects OLS with clustered standard errors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegressionResult:
    """Coefficients and cluster-robust standard errors for one FE spec."""

    fixed_effects: str
    coefficients: dict[str, float]
    std_errors: dict[str, float]
    n_obs: int
    n_clusters: int
    dropped: tuple[str, ...] = ()


def _group_demean(values: np.ndarray, codes: np.ndarray) -> np.ndarray:
    counts = np.bincount(codes)
    sums = np.bincount(codes, weights=values)
    return values - (sums / counts)[codes]


def _within_transform(values: np.ndarray, code_sets: list[np.ndarray]) -> np.ndarray:
    """Project out group means (iterating for two-way), keep the grand mean."""
    grand = values.mean()
    centered = values - grand
    if len(code_sets) == 1:
        centered = _group_demean(centered, code_sets[0])
    else:
        for _ in range(200):
            before = centered
            for codes in code_sets:
                centered = _group_demean(centered, codes)
            if np.max(np.abs(centered - before)) < 1e-12:
                break
    return centered + grand


def fe_ols(
    dataset: Dataset | Sequence[SubjectRecord], fixed_effects: str = "none"
) -> RegressionResult:
    """Switch ~ Block + Price + Block x Price with absorbed fixed effects.

    Fixed effects are removed by within-group demeaning (alternating
    projections for the two-way case), with grand means added back so a
    constant is reported.  Standard errors are clustered at the subject
    level with the G/(G-1) * (N-1)/(N-K) small-sample scaling, where K
    counts slopes, constant, and absorbed group intercepts.  Market price
    is collinear with product fixed effects and is dropped from that spec.
    """
    if fixed_effects not in _FE_SPECS:
        raise ValueError(f"fixed_effects must be one of {_FE_SPECS}")
    records = dataset.records if isinstance(dataset, Dataset) else tuple(dataset)
    if not records:
        raise ValueError("no records to regress on")
    y = np.array([r.switch_point for r in records])
    block = np.array([1.0 if r.block == "p" else 0.0 for r in records])
    price = np.array([r.market_price for r in records])
    subj = np.array([r.subject_id for r in records])
    prod = np.array([r.product_id for r in records])
    subj_codes = np.unique(subj, return_inverse=True)[1]
    prod_codes = np.unique(prod, return_inverse=True)[1]
    n_subj = subj_codes.max() + 1
    n_prod = prod_codes.max() + 1
    if n_subj < 2:
        raise ValueError("clustered errors need at least 2 subjects")

    if fixed_effects == "subject_product":
        names = ["block", "block_price"]
        slopes = [block, block * price]
        dropped = ("price",)
        code_sets = [subj_codes, prod_codes]
        absorbed = (n_subj - 1) + (n_prod - 1)
    elif fixed_effects == "subject":
        names = ["block", "price", "block_price"]
        slopes = [block, price, block * price]
        dropped = ()
        code_sets = [subj_codes]
        absorbed = n_subj - 1
    else:
        names = ["block", "price", "block_price"]
        slopes = [block, price, block * price]
        dropped = ()
        code_sets = []
        absorbed = 0

    if code_sets:
        y_t = _within_transform(y, code_sets)
        slopes = [_within_transform(z, code_sets) for z in slopes]
    else:
        y_t = y
    x = np.column_stack([np.ones(len(y))] + slopes)
    if np.linalg.matrix_rank(x) < x.shape[1]:
        raise ValueError("design matrix is rank deficient")

    xtx = x.T @ x
    beta = np.linalg.solve(xtx, x.T @ y_t)
    resid = y_t - x @ beta

    bread = np.linalg.inv(xtx)
    meat = np.zeros_like(xtx)
    for g in range(n_subj):
        mask = subj_codes == g
        score = x[mask].T @ resid[mask]
        meat += np.outer(score, score)
    n_obs = len(y)
    k_model = x.shape[1] + absorbed
    scale = (n_subj / (n_subj - 1)) * ((n_obs - 1) / (n_obs - k_model))
    cov = scale * bread @ meat @ bread
    se = np.sqrt(np.diag(cov))

    all_names = ["const"] + names
    return RegressionResult(
        fixed_effects=fixed_effects,
        coefficients={n: float(b) for n, b in zip(all_names, beta)},
        std_errors={n: float(s) for n, s in zip(all_names, se)},
        n_obs=n_obs,
        n_clusters=int(n_subj),
        dropped=dropped,
    )


# ---------------------------------------------------------------------------
# Secondary location tests (normal approximations)
# ---------------------------------------------------------------------------

_PHI = NormalDist()


def _two_sided(z: float) -> float:
    return 2.0 * (1.0 - _PHI.cdf(abs(z)))


def paired_t_test(diffs: Sequence[float]) -> tuple[float, float]:
    """Paired location test on differences; normal-approximation p-value."""
    d = np.asarray(diffs, dtype=float)
    if d.size < 2:
        raise ValueError("need at least 2 differences")
    sd = d.std(ddof=1)
    if sd == 0:
        return 0.0 if d.mean() == 0 else math.inf, 1.0 if d.mean() == 0 else 0.0
    stat = d.mean() / (sd / math.sqrt(d.size))
    return float(stat), _two_sided(stat)


def _ranks_with_ties(values: np.ndarray) -> tuple[np.ndarray, float]:
    """Average ranks and the tie-correction term sum(t^3 - t)."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values))
    tie_term = 0.0
    i = 0
    sorted_vals = values[order]
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        avg = (i + j) / 2 + 1
        ranks[order[i : j + 1]] = avg
        t = j - i + 1
        if t > 1:
            tie_term += t**3 - t
        i = j + 1
    return ranks, tie_term


def wilcoxon_signed_rank(diffs: Sequence[float]) -> tuple[float, float]:
    """Signed-rank test on paired differences, zeros dropped."""
    d = np.asarray(diffs, dtype=float)
    d = d[d != 0]
    n = d.size
    if n < 1:
        return 0.0, 1.0
    ranks, tie_term = _ranks_with_ties(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    mu = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term / 48.0
    if var <= 0:
        return w_plus, 1.0
    z = (w_plus - mu) / math.sqrt(var)
    return w_plus, _two_sided(z)


def wilcoxon_rank_sum(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Two-sample rank-sum test with the normal approximation."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n_x, n_y = x.size, y.size
    if n_x < 1 or n_y < 1:
        raise ValueError("both samples must be nonempty")
    combined = np.concatenate([x, y])
    ranks, tie_term = _ranks_with_ties(combined)
    n = n_x + n_y
    u = float(ranks[:n_x].sum()) - n_x * (n_x + 1) / 2.0
    mu = n_x * n_y / 2.0
    var = n_x * n_y * (n + 1) / 12.0
    if tie_term:
        var -= n_x * n_y * tie_term / (12.0 * n * (n - 1))
    if var <= 0:
        return u, 1.0
    z = (u - mu) / math.sqrt(var)
    return u, _two_sided(z)


# ---------------------------------------------------------------------------
# Full pipeline
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnalysisReport:
    config: AnalysisConfig
    summaries: tuple[SubjectSummary, ...]
    means: tuple[GroupMeans, ...]
    pooled: GroupMeans
    n_m_higher: int
    n_p_higher: int
    sign_test_p: float
    diff_cdf: tuple[tuple[float, float], ...]
    regressions: tuple[RegressionResult, ...]
    secondary: dict[str, float | None]
    type_counts: dict[str, int]
    n_outliers_dropped: int = 0


def _analysis_records(
    dataset: Dataset, config: AnalysisConfig, keep_subjects: set[int] | None = None
) -> list[SubjectRecord]:
    """Records entering the regressions under the config's filters."""
    table, _ = _pairs_by_subject(dataset.records)
    keep_pairs = set()
    for sid, prods in table.items():
        if keep_subjects is not None and sid not in keep_subjects:
            continue
        for pid, blocks in prods.items():
            nonpos = blocks["m"] == REPORT_MIN and blocks["p"] == REPORT_MIN
            if config.include_nonpositive or not nonpos:
                keep_pairs.add((sid, pid))
    return [r for r in dataset.records if (r.subject_id, r.product_id) in keep_pairs]


def run_analysis(dataset: Dataset, config: AnalysisConfig = AnalysisConfig()):
    """Run the full pipeline: summaries, means, tests, CDF, regressions."""
    summaries = summarize_subjects(dataset, config)
    if config.outlier_abs_diff is not None:
        kept = []
        for s in summaries:
            if s.individual_m is None or s.individual_p is None:
                kept.append(s)
                continue
            if abs(s.individual_m - s.individual_p) < config.outlier_abs_diff:
                kept.append(s)
        n_dropped = len(summaries) - len(kept)
        summaries = kept
    else:
        n_dropped = 0

    usable = [s for s in summaries if s.individual_m is not None]
    if not usable:
        raise ValueError("no subjects with usable individual switch points")
    pooled = cohort_means(usable, by="pooled")[0]
    by_treatment = cohort_means(usable, by="treatment")

    n_m, n_p = _directional_counts(usable)
    sign_p = sign_test_counts(n_m, n_p) if (n_m + n_p) else 1.0

    diffs = [s.individual_m - s.individual_p for s in usable]
    diff_cdf = tuple(cdf_points(diffs))

    reg_records = _analysis_records(
        dataset, config, keep_subjects={s.subject_id for s in summaries}
    )
    regressions = []
    if len({r.subject_id for r in reg_records}) >= 2:
        for spec in _FE_SPECS:
            regressions.append(fe_ols(reg_records, spec))

    secondary: dict[str, float | None] = {}
    _, secondary["paired_t"] = paired_t_test(diffs)
    _, secondary["signed_rank"] = wilcoxon_signed_rank(diffs)
    for block_attr, key in (
        ("individual_m", "rank_sum_m_by_treatment"),
        ("individual_p", "rank_sum_p_by_treatment"),
    ):
        mp = [getattr(s, block_attr) for s in usable if s.treatment == "mp"]
        pm = [getattr(s, block_attr) for s in usable if s.treatment == "pm"]
        if mp and pm:
            _, secondary[key] = wilcoxon_rank_sum(mp, pm)
        else:
            secondary[key] = None

    type_counts = {M_HIGH: 0, P_HIGH: 0, UNCLASSIFIED: 0}
    for s in summaries:
        type_counts[s.subject_type] += 1

    return AnalysisReport(
        config=config,
        summaries=tuple(summaries),
        means=tuple(by_treatment),
        pooled=pooled,
        n_m_higher=n_m,
        n_p_higher=n_p,
        sign_test_p=sign_p,
        diff_cdf=diff_cdf,
        regressions=tuple(regressions),
        secondary=secondary,
        type_counts=type_counts,
        n_outliers_dropped=n_dropped,
    )


def _fmt_p(p: float | None) -> str:
    if p is None:
        return "n/a"
    if p < 1e-4:
        return "<0.0001"
    return f"{p:.4f}"


def format_report(report: AnalysisReport) -> str:
    """Fixed-format text rendering of an AnalysisReport."""
    lines = []
    lines.append("== Switch-point analysis ==")
    lines.append(
        f"subjects: {len(report.summaries)}   "
        f"outliers dropped: {report.n_outliers_dropped}"
    )
    lines.append("")
    lines.append("-- Means of individual switch points --")
    lines.append(f"{'group':<12}{'n':>5}{'mean_m':>10}{'sd_m':>9}{'mean_p':>10}{'sd_p':>9}")
    for g in list(report.means) + [report.pooled]:
        lines.append(
            f"{g.group:<12}{g.n_subjects:>5}{g.mean_m:>10.2f}{g.sd_m:>9.2f}"
            f"{g.mean_p:>10.2f}{g.sd_p:>9.2f}"
        )
    lines.append("")
    lines.append(
        f"sign test: {report.n_m_higher} m-higher vs {report.n_p_higher} p-higher, "
        f"two-sided p = {_fmt_p(report.sign_test_p)}"
    )
    lines.append(
        "types: "
        f"{report.type_counts[M_HIGH]} m-high, "
        f"{report.type_counts[P_HIGH]} p-high, "
        f"{report.type_counts[UNCLASSIFIED]} unclassified "
        f"(rule: {report.config.equal_value_rule})"
    )
    for key, label in (
        ("paired_t", "paired location test"),
        ("signed_rank", "signed-rank test"),
        ("rank_sum_m_by_treatment", "rank-sum, m-block by treatment"),
        ("rank_sum_p_by_treatment", "rank-sum, p-block by treatment"),
    ):
        lines.append(f"{label}: p = {_fmt_p(report.secondary[key])}")
    lines.append("")
    lines.append("-- Regressions: Switch ~ Block + Price + Block x Price --")
    for reg in report.regressions:
        lines.append(f"[fixed effects: {reg.fixed_effects}]")
        for name in ("block", "price", "block_price", "const"):
            if name in reg.coefficients:
                lines.append(
                    f"  {name:<12} {reg.coefficients[name]:>9.3f}  "
                    f"({reg.std_errors[name]:.3f})"
                )
            elif name in reg.dropped:
                lines.append(f"  {name:<12} {'-':>9}  (absorbed)")
        lines.append(f"  obs {reg.n_obs}, clusters {reg.n_clusters}")
    return "\n".join(lines) + "\n"
