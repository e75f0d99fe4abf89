"""Assumption-audit verdicts, witnesses, and the accuracy matrix."""

import numpy as np
import pytest

from qelicit.audit import (
    AuditGrid,
    Verdict,
    audit,
    check_injective,
    check_linearity,
    check_symmetry,
)
from qelicit.models import (
    attribute_evaluation,
    cc,
    gpn,
    normalized_utility,
    pn,
    rn_kinked,
    rn_linear,
    rn_power,
)

from conftest import EXPECTED_ACCURACY


class TestInjective:
    def test_pn_flat_normalized_utility_is_violated(self):
        outcome = check_injective(pn())
        assert outcome.verdict is Verdict.VIOLATED
        t, s = outcome.witness
        assert t > s > 0

    def test_identity_holds(self):
        assert check_injective(rn_linear(0.0)).verdict is Verdict.HOLDS

    def test_gpn_strictly_increasing_on_grid(self):
        # independent oracle: t / (1 + t) evaluated directly on the grid
        ts = AuditGrid().points()
        vals = ts / (1.0 + ts)
        assert (np.diff(vals) > 0).all()
        assert check_injective(gpn(1.0)).verdict is Verdict.HOLDS


class TestSymmetry:
    def test_kinked_gains_losses_asymmetric(self):
        outcome = check_symmetry(rn_kinked(0.0, 2.0))
        assert outcome.verdict is Verdict.VIOLATED
        (t,) = outcome.witness
        model = rn_kinked(0.0, 2.0)
        assert abs(normalized_utility(model, t) + normalized_utility(model, -t)) > 1e-9

    def test_power_is_symmetric(self):
        assert check_symmetry(rn_power(-0.5, 0.5)).verdict is Verdict.HOLDS
        assert check_symmetry(rn_power(1.0, 2.0)).verdict is Verdict.HOLDS


class TestLinearity:
    def test_power_curvature_breaks_linearity(self):
        assert check_linearity(rn_power(-0.5, 0.5)).verdict is Verdict.VIOLATED

    def test_kinked_is_linear_on_gains(self):
        assert check_linearity(rn_kinked(-0.5, 2.0)).verdict is Verdict.HOLDS

    def test_cc_one_sided_evaluation_is_linear(self):
        assert check_linearity(cc(0.5)).verdict is Verdict.HOLDS


class TestAudit:
    def test_rn_linear_and_ncc_pass_everything(self, catalog):
        for name in ("rn-linear", "ncc"):
            report = audit(catalog[name])
            assert report.injective.holds
            assert report.symmetry.holds
            assert report.linearity.holds

    def test_pn_report(self):
        report = audit(pn())
        assert report.injective.verdict is Verdict.VIOLATED
        assert report.symmetry.verdict is Verdict.HOLDS
        assert report.linearity.verdict in (Verdict.VIOLATED, Verdict.INDETERMINATE)

    def test_matrix_reproduction(self, catalog):
        for name, model in catalog.items():
            acc = audit(model).accuracy()
            got = (acc["m"], acc["p_ignore_or_separate"], acc["p_combine"])
            assert got == EXPECTED_ACCURACY[name], name

    def test_witness_validity(self, catalog):
        grid = AuditGrid()
        for model in catalog.values():
            report = audit(model, grid)
            if report.injective.verdict is Verdict.VIOLATED:
                t, s = report.injective.witness
                a = normalized_utility(model, t)
                b = normalized_utility(model, s)
                assert abs(a - b) <= grid.tolerance * max(1.0, abs(a), abs(b))
                assert t - s > grid.spacing
            if report.symmetry.verdict is Verdict.VIOLATED:
                (t,) = report.symmetry.witness
                a = normalized_utility(model, t)
                b = normalized_utility(model, -t)
                assert abs(a + b) > grid.tolerance * max(1.0, abs(a))
            if report.linearity.verdict is Verdict.VIOLATED:
                t, s = report.linearity.witness
                lhs = normalized_utility(model, t - s)
                rhs = attribute_evaluation(model, t, s) - attribute_evaluation(
                    model, s, t
                )
                assert abs(lhs - rhs) > grid.tolerance * max(1.0, abs(lhs), abs(rhs))

    def test_refinement_never_flips_violated_to_holds(self):
        violators = [pn(), rn_kinked(0.0, 2.0), rn_power(-0.5, 0.5), gpn(1.0)]
        checks = (check_injective, check_symmetry, check_linearity)
        for model in violators:
            base = AuditGrid(count=100)
            coarse = [c(model, base).verdict for c in checks]
            for count in (200, 400, 1000):
                fine = [
                    c(model, AuditGrid(count=count)).verdict for c in checks
                ]
                for was, now in zip(coarse, fine):
                    if was is Verdict.VIOLATED:
                        assert now is Verdict.VIOLATED

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            AuditGrid(lo=0.0)
        with pytest.raises(ValueError):
            AuditGrid(count=1)
        with pytest.raises(ValueError):
            AuditGrid(tolerance=0.0)
