import math

import numpy as np
import pytest

from angleguard import (
    AngleRadians,
    BoundedAngle,
    HypothesisNotMet,
    Provenance,
    SectorBound,
    StabilityCertificate,
    Verdict,
    cascade_angle_bound,
    certificate_to_dict,
    certified_angle_upper_bound,
    cyclic_small_angle,
    dense_angle_oracle,
    feedback_angle_closure,
    incremental_small_angle,
    l2e_small_angle,
    multiplier_small_angle,
    nonlinear_small_angle,
    sector_angle_bound,
    validate_certificate_dict,
)
from angleguard.certificates import inputs_digest
from helpers import random_complex_matrix


def up(x):
    return BoundedAngle.analytic(AngleRadians(x))


class TestNonlinearSmallAngle:
    def test_comfortable_sum_certifies(self):
        cert = nonlinear_small_angle(up(math.pi / 3), up(math.pi / 3))
        assert cert.certified
        assert cert.margin == pytest.approx(math.pi / 3, abs=1e-12)
        assert cert.method == "thm1"

    def test_boundary_sum_is_inconclusive(self):
        cert = nonlinear_small_angle(up(math.pi / 2), up(math.pi / 2))
        assert cert.verdict is Verdict.INCONCLUSIVE
        assert cert.margin == 0.0

    def test_sector_bound_with_passive_partner(self):
        theta_p = BoundedAngle.analytic(sector_angle_bound(SectorBound(1.0, 3.0)))
        cert = nonlinear_small_angle(theta_p, up(math.pi / 2))
        assert cert.certified
        assert cert.margin == pytest.approx(math.pi / 3, abs=1e-12)

    def test_sampled_lower_bound_rejected(self):
        sampled = BoundedAngle.sampled(AngleRadians(0.3))
        with pytest.raises(ValueError, match="lower bound"):
            nonlinear_small_angle(sampled, up(0.3))

    def test_loop_convention_recorded(self):
        cert = nonlinear_small_angle(up(0.1), up(0.1), loop_convention="e1=0")
        assert cert.witnesses["loop_convention"] == "e1=0"
        with pytest.raises(ValueError):
            nonlinear_small_angle(up(0.1), up(0.1), loop_convention="e3=0")


class TestCyclicSmallAngle:
    def test_three_quarter_turns(self):
        cert = cyclic_small_angle([up(math.pi / 4)] * 3)
        assert cert.certified
        assert cert.margin == pytest.approx(math.pi / 4, abs=1e-12)
        assert cert.method == "cor1"

    def test_six_sector_blocks_hit_the_boundary(self):
        theta = BoundedAngle.analytic(sector_angle_bound(SectorBound(1.0, 3.0)))
        cert = cyclic_small_angle([theta] * 6)
        assert cert.verdict is Verdict.INCONCLUSIVE

    def test_single_block(self):
        cert = cyclic_small_angle([up(math.pi / 2)])
        assert cert.certified
        assert cert.margin == pytest.approx(math.pi / 2, abs=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            cyclic_small_angle([])


class TestMultiplierSmallAngle:
    def test_reduces_to_plain_rule_under_identity(self):
        a, b = up(0.8), up(1.1)
        plain = nonlinear_small_angle(a, b)
        lifted = multiplier_small_angle(a, b, m1_unitary=True, m1_is_identity=True)
        assert lifted.verdict == plain.verdict
        assert lifted.margin == plain.margin
        assert lifted.method == "cor4"

    def test_margin_arithmetic(self):
        cert = multiplier_small_angle(up(math.pi / 2 + 0.1), up(math.pi / 2 - 0.2),
                                      m1_unitary=True)
        assert cert.certified
        assert cert.margin == pytest.approx(0.1, abs=1e-12)
        assert cert.method == "thm4"

    def test_nonunitary_first_multiplier_not_applicable(self):
        cert = multiplier_small_angle(up(0.1), up(0.1), m1_unitary=False)
        assert cert.verdict is Verdict.NOT_APPLICABLE


class TestFlavoredRules:
    def test_l2e_rule(self):
        assert l2e_small_angle(up(1.0), up(1.5)).certified
        assert l2e_small_angle(up(1.0), up(1.5)).method == "l2e"
        boundary = l2e_small_angle(up(math.pi / 2), up(math.pi / 2))
        assert boundary.verdict is Verdict.INCONCLUSIVE

    def test_incremental_rule(self):
        assert incremental_small_angle(up(1.0), up(1.0)).certified
        assert incremental_small_angle(up(1.0), up(1.0)).method == "cor5"
        with pytest.raises(ValueError):
            incremental_small_angle(BoundedAngle.sampled(AngleRadians(0.1)), up(0.1))


class TestAngleAlgebra:
    def test_cascade_zero_plus_zero(self):
        out = cascade_angle_bound(up(0.0), up(0.0))
        assert out.value == 0.0

    def test_cascade_clamps_at_pi(self):
        out = cascade_angle_bound(up(math.pi / 2), up(3 * math.pi / 4))
        assert out.value == math.pi

    def test_cascade_of_two_sector_blocks(self):
        theta = BoundedAngle.analytic(sector_angle_bound(SectorBound(1.0, 3.0)))
        assert cascade_angle_bound(theta, theta).value == pytest.approx(
            math.pi / 3, abs=1e-12)

    def test_provenance_weakens_to_certified(self):
        mixed = cascade_angle_bound(BoundedAngle.analytic(AngleRadians(0.1)),
                                    BoundedAngle.certified(AngleRadians(0.1)))
        assert mixed.provenance is Provenance.CERTIFIED_OVER_APPROX

    def test_closure_takes_max(self):
        assert feedback_angle_closure(up(math.pi / 4), up(math.pi / 4)).value == (
            math.pi / 4)
        assert feedback_angle_closure(up(2 * math.pi / 3), up(math.pi / 4)).value == (
            2 * math.pi / 3)

    def test_closure_hypothesis_enforced(self):
        with pytest.raises(HypothesisNotMet):
            feedback_angle_closure(up(3 * math.pi / 4), up(3 * math.pi / 4))


class TestCertificateInvariants:
    def test_certified_requires_positive_margin(self):
        with pytest.raises(ValueError):
            StabilityCertificate(verdict=Verdict.CERTIFIED, method="thm1", margin=0.0)

    def test_monotone_in_angles(self):
        # shrinking any input angle never flips certified to inconclusive
        rng = np.random.default_rng(1)
        for _ in range(200):
            a, b = rng.uniform(0, math.pi, 2)
            before = nonlinear_small_angle(up(a), up(b))
            smaller = nonlinear_small_angle(up(a * rng.uniform(0, 1)), up(b))
            if before.certified:
                assert smaller.certified

    def test_digest_is_stable_and_input_sensitive(self):
        a = inputs_digest([0.1, 0.2], "thm1")
        b = inputs_digest([0.1, 0.2], "thm1")
        c = inputs_digest([0.1, 0.3], "thm1")
        assert a == b
        assert a != c

    def test_schema_round_trip(self):
        cert = nonlinear_small_angle(up(0.5), up(0.5))
        doc = certificate_to_dict(cert)
        validate_certificate_dict(doc)
        assert doc["verdict"] == "certified"
        assert doc["method"] == "thm1"

    def test_schema_rejects_unknown_method(self):
        doc = {"verdict": "certified", "method": "thm99", "margin_rad": 1.0}
        with pytest.raises(Exception):
            validate_certificate_dict(doc)


class TestCompositionSoundness:
    def test_certified_matrix_instances_have_invertible_loops(self):
        # when the rule certifies from certified matrix-angle bounds, the
        # return difference must be nonsingular
        rng = np.random.default_rng(7)
        certified = 0
        for k in range(60):
            n = int(rng.integers(2, 4))
            A = random_complex_matrix(rng, n, kind=1)
            B = random_complex_matrix(rng, n, kind=1)
            ta = BoundedAngle.certified(certified_angle_upper_bound(A))
            tb = BoundedAngle.certified(certified_angle_upper_bound(B))
            cert = nonlinear_small_angle(ta, tb)
            if cert.certified:
                certified += 1
                assert abs(np.linalg.det(np.eye(n) + B @ A)) > 1e-12
        assert certified > 10

    def test_certified_oracle_instances_have_invertible_loops(self):
        rng = np.random.default_rng(8)
        for k in range(60):
            n = int(rng.integers(2, 4))
            A = random_complex_matrix(rng, n, kind=k)
            B = random_complex_matrix(rng, n, kind=k + 1)
            ta = dense_angle_oracle(A, samples=4000, seed=k).value
            tb = dense_angle_oracle(B, samples=4000, seed=k).value
            cert = nonlinear_small_angle(
                BoundedAngle.certified(AngleRadians(ta)),
                BoundedAngle.certified(AngleRadians(tb)))
            if cert.certified and cert.margin > 1e-3:
                assert abs(np.linalg.det(np.eye(n) + B @ A)) > 1e-12
