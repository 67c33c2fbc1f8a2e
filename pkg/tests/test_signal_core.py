import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from angleguard import (
    AngleRadians,
    DiscreteSignal,
    inner_product,
    l2_norm,
    load_signal_csv,
    save_signal_csv,
    signal_angle,
    truncate,
)
from helpers import random_signal


def tone_pair(h=1.0 / 1024):
    t = np.arange(int(round(1.0 / h))) * h
    return DiscreteSignal(np.sin(2 * np.pi * t), h), DiscreteSignal(np.cos(2 * np.pi * t), h)


class TestAngleRadians:
    def test_range_enforced(self):
        AngleRadians(0.0)
        AngleRadians(math.pi)
        with pytest.raises(ValueError):
            AngleRadians(-1e-9)
        with pytest.raises(ValueError):
            AngleRadians(math.pi + 1e-9)
        with pytest.raises(ValueError):
            AngleRadians(float("nan"))

    def test_from_cos_clamps_rounding(self):
        assert AngleRadians.from_cos(1.0 + 1e-15).value == 0.0
        assert AngleRadians.from_cos(-1.0 - 1e-15).value == math.pi

    def test_degrees_and_float(self):
        a = AngleRadians(math.pi / 2)
        assert a.degrees == pytest.approx(90.0)
        assert float(a) == a.value


class TestDiscreteSignal:
    def test_one_dimensional_input_becomes_column(self):
        u = DiscreteSignal([1.0, 2.0, 3.0], 0.5)
        assert u.samples.shape == (3, 1)
        assert u.dim == 1
        assert len(u) == 3

    def test_rejects_bad_period(self):
        with pytest.raises(ValueError):
            DiscreteSignal([1.0], 0.0)
        with pytest.raises(ValueError):
            DiscreteSignal([1.0], -1.0)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            DiscreteSignal([np.inf], 1.0)

    def test_immutable(self):
        u = DiscreteSignal([1.0, 2.0], 1.0)
        with pytest.raises(ValueError):
            u.samples[0] = 5.0

    def test_times(self):
        u = DiscreteSignal([1.0, 2.0, 3.0], 0.25)
        np.testing.assert_allclose(u.times, [0.0, 0.25, 0.5])


class TestInnerProduct:
    def test_unit_impulse_normalization(self):
        h = 0.02
        u = DiscreteSignal([1.0 / math.sqrt(h)], h)
        assert inner_product(u, u) == pytest.approx(1.0, abs=1e-12)

    def test_disjoint_supports(self):
        u = DiscreteSignal([1.0, 0.0], 1.0)
        v = DiscreteSignal([0.0, 1.0, 0.0], 1.0)
        assert inner_product(u, v) == 0.0

    def test_sine_cosine_orthogonal_by_quadrature(self):
        u, v = tone_pair()
        # independent rectangle-rule quadrature over one period
        direct = (1.0 / 1024) * float(np.sum(u.samples[:, 0] * v.samples[:, 0]))
        assert inner_product(u, v) == pytest.approx(direct, abs=1e-15)
        assert abs(inner_product(u, v)) < 1e-6

    def test_dimension_mismatch(self):
        u = DiscreteSignal(np.ones((4, 1)), 1.0)
        v = DiscreteSignal(np.ones((4, 2)), 1.0)
        with pytest.raises(ValueError):
            inner_product(u, v)

    def test_period_mismatch(self):
        u = DiscreteSignal([1.0, 1.0], 1.0)
        v = DiscreteSignal([1.0, 1.0], 0.5)
        with pytest.raises(ValueError):
            inner_product(u, v)

    def test_zero_extension_of_shorter_signal(self):
        u = DiscreteSignal([1.0, 2.0, 3.0], 1.0)
        v = DiscreteSignal([1.0], 1.0)
        assert inner_product(u, v) == 1.0
        assert inner_product(v, u) == 1.0


class TestL2Norm:
    def test_zero_signal(self):
        assert l2_norm(DiscreteSignal(np.zeros((7, 2)), 0.1)) == 0.0

    @pytest.mark.parametrize("n", [1, 10, 64, 1000])
    def test_constant_one_over_unit_interval(self, n):
        u = DiscreteSignal(np.ones(n), 1.0 / n)
        assert l2_norm(u) == pytest.approx(1.0, abs=1e-12)

    def test_sine_rms(self):
        u, _ = tone_pair()
        assert l2_norm(u) == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-4)


class TestTruncate:
    def test_at_zero_keeps_first_sample(self):
        u = DiscreteSignal([1.0, 2.0, 3.0], 0.5)
        out = truncate(u, 0.0)
        np.testing.assert_array_equal(out.samples[:, 0], [1.0, 0.0, 0.0])

    def test_beyond_support_is_identity(self):
        u = DiscreteSignal([1.0, 2.0, 3.0], 0.5)
        assert truncate(u, 10.0) is u

    def test_keeps_sample_on_boundary(self):
        # the sample landing exactly on T belongs to the kept range
        u = DiscreteSignal([1.0, 2.0, 3.0, 4.0], 0.1)
        out = truncate(u, 0.2)
        np.testing.assert_array_equal(out.samples[:, 0], [1.0, 2.0, 3.0, 0.0])

    def test_idempotent(self):
        u = DiscreteSignal(np.arange(10.0), 0.3)
        once = truncate(u, 1.0)
        twice = truncate(once, 1.0)
        np.testing.assert_array_equal(once.samples, twice.samples)

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            truncate(DiscreteSignal([1.0], 1.0), -0.5)

    @given(st.integers(0, 10 ** 6), st.floats(0.0, 4.0), st.floats(0.0, 4.0))
    @settings(max_examples=150, deadline=None)
    def test_norm_monotone_in_horizon(self, seed, t1, t2):
        rng = np.random.default_rng(seed)
        u = random_signal(rng)
        lo, hi = sorted([t1, t2])
        assert l2_norm(truncate(u, lo)) <= l2_norm(truncate(u, hi)) + 1e-12

    @given(st.integers(0, 10 ** 6), st.floats(0.0, 4.0))
    @settings(max_examples=100, deadline=None)
    def test_never_grows_norm(self, seed, t):
        rng = np.random.default_rng(seed)
        u = random_signal(rng)
        assert l2_norm(truncate(u, t)) <= l2_norm(u) + 1e-12


class TestSignalAngle:
    def test_self_angle_zero(self):
        rng = np.random.default_rng(1)
        u = random_signal(rng)
        # arccos near 1 resolves to sqrt(eps) at best
        assert signal_angle(u, u).value <= 1e-7

    def test_negation_gives_pi(self):
        rng = np.random.default_rng(2)
        u = random_signal(rng)
        neg = u.with_samples(-u.samples)
        assert signal_angle(u, neg).value == pytest.approx(math.pi, abs=1e-12)

    def test_sine_vs_cosine(self):
        u, v = tone_pair()
        assert signal_angle(u, v).value == pytest.approx(math.pi / 2, abs=1e-4)

    def test_zero_signal_defaults_to_zero_angle(self):
        u = DiscreteSignal([1.0, 2.0], 1.0)
        z = DiscreteSignal([0.0], 1.0)
        assert signal_angle(u, z).value == 0.0
        assert signal_angle(z, u).value == 0.0
        assert signal_angle(z, z).value == 0.0

    def test_trailing_zeros_do_not_matter(self):
        u = DiscreteSignal([1.0, 2.0], 1.0)
        padded = DiscreteSignal([1.0, 2.0, 0.0, 0.0], 1.0)
        assert signal_angle(u, padded).value <= 1e-7

    @given(st.integers(0, 10 ** 6))
    @settings(max_examples=150, deadline=None)
    def test_symmetry_exact(self, seed):
        rng = np.random.default_rng(seed)
        u, v = random_signal(rng, dim=2), random_signal(rng, dim=2)
        assert signal_angle(u, v).value == signal_angle(v, u).value

    @given(st.integers(0, 10 ** 6), st.floats(1e-3, 1e3))
    @settings(max_examples=150, deadline=None)
    def test_positive_scaling_invariance(self, seed, k):
        rng = np.random.default_rng(seed)
        u, v = random_signal(rng), random_signal(rng)
        scaled = u.with_samples(k * u.samples)
        assert signal_angle(scaled, v).value == pytest.approx(
            signal_angle(u, v).value, abs=1e-12)

    @given(st.integers(0, 10 ** 6), st.floats(1e-3, 1e3))
    @settings(max_examples=150, deadline=None)
    def test_negative_scaling_reflects(self, seed, k):
        rng = np.random.default_rng(seed)
        u, v = random_signal(rng), random_signal(rng)
        scaled = u.with_samples(-k * u.samples)
        assert signal_angle(scaled, v).value == pytest.approx(
            math.pi - signal_angle(u, v).value, abs=1e-12)

    @given(st.integers(0, 10 ** 6))
    @settings(max_examples=200, deadline=None)
    def test_cauchy_schwarz(self, seed):
        rng = np.random.default_rng(seed)
        u, v = random_signal(rng, dim=3), random_signal(rng, dim=3)
        assert abs(inner_product(u, v)) <= l2_norm(u) * l2_norm(v) + 1e-12

    @given(st.integers(0, 10 ** 6))
    @settings(max_examples=200, deadline=None)
    def test_triangle_inequality(self, seed):
        rng = np.random.default_rng(seed)
        u, v, w = (random_signal(rng, dim=2) for _ in range(3))
        assert signal_angle(u, w).value <= (
            signal_angle(u, v).value + signal_angle(v, w).value + 1e-9)


class TestCsvInterchange:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(7)
        u = DiscreteSignal(rng.standard_normal((40, 3)), 0.02)
        path = tmp_path / "sig.csv"
        save_signal_csv(path, u)
        back = load_signal_csv(path)
        assert back.dim == 3
        assert back.sample_period == pytest.approx(0.02, rel=1e-9)
        np.testing.assert_allclose(back.samples, u.samples, rtol=1e-6, atol=1e-9)

    def test_rejects_nonuniform_time(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,x1\n0.0,1.0\n0.1,2.0\n0.3,3.0\n")
        with pytest.raises(ValueError, match="uniform"):
            load_signal_csv(path)

    def test_rejects_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time,x1\n0.0,1.0\n0.1,2.0\n")
        with pytest.raises(ValueError, match="header"):
            load_signal_csv(path)

    def test_rejects_nonzero_start(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,x1\n1.0,1.0\n1.1,2.0\n")
        with pytest.raises(ValueError, match="start"):
            load_signal_csv(path)
