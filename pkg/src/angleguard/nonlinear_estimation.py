"""Sampled nonlinear operators and probe-based angle/gain estimation.

Operators map discrete signals to discrete signals causally and send the
zero signal to the zero signal.  True operator angles are infima over an
infinite-dimensional signal space and cannot be computed exactly; every
estimator here reports the extremum over a finite probe set, which is a
certified *lower* bound on the angle (the observed cosine can only
overestimate the infimum).  Analytic upper bounds are available where
structure permits: passivity indices, index families, and sector slopes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .certificates import StabilityCertificate, Verdict, inputs_digest
from .lti_systems import (
    LtiSystem,
    SectorBound,
    discretize_zoh,
    is_stable,
    simulate_discretized,
    system_from_json_dict,
)
from .multipliers import MultiplierOperator
from .signal_core import AngleRadians, DiscreteSignal

__all__ = [
    "SystemOperator",
    "StaticNonlinearity",
    "LtiSurrogate",
    "Cascade",
    "Feedback",
    "Scaled",
    "FeedbackConvergenceError",
    "PassivityIndices",
    "AngleEstimate",
    "evaluate",
    "make_probes",
    "estimate_singular_angle",
    "estimate_l2_gain",
    "estimate_l2e_angle",
    "estimate_incremental_angle",
    "estimate_generalized_angle",
    "vsp_angle_bound",
    "convex_vsp_angle_bound",
    "sector_angle_bound",
    "ifofp_check",
    "estimate_secant_gain",
    "secant_bound",
    "secant_condition_check",
    "passivity_angle_check",
    "STATIC_FN_REGISTRY",
    "operator_from_json_dict",
    "load_operator_json",
]


class FeedbackConvergenceError(RuntimeError):
    """The per-step loop solve failed; carries the offending step index."""

    def __init__(self, step_index: int, residual: float):
        super().__init__(f"feedback iteration did not converge at step {step_index} "
                         f"(residual {residual:.3e})")
        self.step_index = step_index
        self.residual = residual


# --------------------------------------------------------------------------
# operators

class SystemOperator:
    """Causal operator on discrete signals with ``P(0) = 0``."""

    dim: int = 1

    def evaluate(self, u: DiscreteSignal) -> DiscreteSignal:
        self._check_dim(u)
        return u.with_samples(self._run(u.samples, u.sample_period))

    __call__ = evaluate

    def _check_dim(self, u: DiscreteSignal) -> None:
        if u.dim != self.dim:
            raise ValueError(f"operator dim {self.dim} does not match signal dim {u.dim}")

    def _run(self, samples: np.ndarray, h: float) -> np.ndarray:
        stepper = self._stepper(h)
        out = np.empty_like(samples)
        for k in range(samples.shape[0]):
            out[k] = stepper.advance(samples[k], k)
        return out

    def _stepper(self, h: float):
        raise NotImplementedError


class _StaticStepper:
    def __init__(self, fn):
        self.fn = fn

    def output(self, u):
        return self.fn(u)

    def advance(self, u, k=0):
        return self.fn(u)


class StaticNonlinearity(SystemOperator):
    """Memoryless operator applying a scalar map to every sample entry.

    The map must be vectorized over numpy arrays and satisfy ``fn(0) == 0``
    exactly.  An optional sector records slopes ``0 < a < b`` with
    ``(fn(x) - a x)(fn(x) - b x) <= 0``, enabling the analytic angle bound
    :func:`sector_angle_bound`.
    """

    def __init__(self, fn, dim: int = 1, sector: SectorBound | None = None, name: str = "static"):
        z = fn(np.zeros(1))
        if not np.all(np.asarray(z) == 0.0):
            raise ValueError("static nonlinearity must map 0 to 0")
        self.fn = fn
        self.dim = dim
        self.sector = sector
        self.name = name

    def _run(self, samples, h):
        return np.asarray(self.fn(samples), dtype=float)

    def _stepper(self, h):
        return _StaticStepper(self.fn)


class _LtiStepper:
    def __init__(self, Ad, Bd, C, D):
        self.Ad, self.Bd, self.C, self.D = Ad, Bd, C, D
        self.x = np.zeros(Ad.shape[0])

    def output(self, u):
        return self.C @ self.x + self.D @ u

    def advance(self, u, k=0):
        y = self.C @ self.x + self.D @ u
        self.x = self.Ad @ self.x + self.Bd @ u
        return y


class LtiSurrogate(SystemOperator):
    """Sampled stand-in for a stable LTI system.

    The continuous system is discretized exactly under a zero-order hold
    at the given sample period; angle estimates refer to this discrete
    surrogate, approaching the continuous operator as the period shrinks.
    """

    def __init__(self, system: LtiSystem, sample_period: float):
        if not is_stable(system):
            raise ValueError("surrogate requires a stable system")
        if sample_period <= 0:
            raise ValueError("sample period must be positive")
        self.system = system
        self.sample_period = sample_period
        self.dim = system.n

    def _discretization(self, h: float):
        if abs(h - self.sample_period) > 1e-12 * self.sample_period:
            raise ValueError(
                f"surrogate discretized at h={self.sample_period}, signal has h={h}")
        return discretize_zoh(self.system, self.sample_period)

    def _run(self, samples, h):
        Ad, Bd, C, D = self._discretization(h)
        return simulate_discretized(Ad, Bd, C, D, samples)

    def _stepper(self, h):
        return _LtiStepper(*self._discretization(h))


class _ChainStepper:
    def __init__(self, steppers):
        self.steppers = steppers

    def output(self, u):
        for s in self.steppers:
            u = s.output(u)
        return u

    def advance(self, u, k=0):
        for s in self.steppers:
            u = s.advance(u, k)
        return u


class Cascade(SystemOperator):
    """Serial composition; ``stages[0]`` is applied first."""

    def __init__(self, stages):
        stages = list(stages)
        if not stages:
            raise ValueError("cascade needs at least one stage")
        dims = {s.dim for s in stages}
        if len(dims) != 1:
            raise ValueError(f"cascade stages disagree on dimension: {sorted(dims)}")
        self.stages = stages
        self.dim = stages[0].dim

    def _run(self, samples, h):
        for stage in self.stages:
            samples = stage._run(samples, h)
        return samples

    def _stepper(self, h):
        return _ChainStepper([s._stepper(h) for s in self.stages])


class _ScaledStepper:
    def __init__(self, base, k):
        self.base, self.k = base, k

    def output(self, u):
        return self.k * self.base.output(u)

    def advance(self, u, k=0):
        return self.k * self.base.advance(u, k)


class Scaled(SystemOperator):
    """Positive scalar multiple of an operator; leaves all angles unchanged."""

    def __init__(self, base: SystemOperator, factor: float):
        if not factor > 0:
            raise ValueError("scale factor must be positive")
        self.base = base
        self.factor = float(factor)
        self.dim = base.dim

    def _run(self, samples, h):
        return self.factor * self.base._run(samples, h)

    def _stepper(self, h):
        return _ScaledStepper(self.base._stepper(h), self.factor)


class _FeedbackStepper:
    def __init__(self, plant, controller, relaxation, tol, max_iters, dim):
        self.plant = plant
        self.controller = controller
        self.relaxation = relaxation
        self.tol = tol
        self.max_iters = max_iters
        self.y1 = np.zeros(dim)

    def _solve(self, e, k):
        y1 = self.y1.copy()
        delta = math.inf
        for _ in range(self.max_iters):
            y1_new = self.plant.output(e - self.controller.output(y1))
            delta = float(np.max(np.abs(y1_new - y1)))
            y1 = self.relaxation * y1 + (1.0 - self.relaxation) * y1_new
            if delta < self.tol * (1.0 + float(np.max(np.abs(y1)))):
                return y1
        raise FeedbackConvergenceError(k, delta)

    def output(self, u):
        return self._solve(u, -1)

    def advance(self, e, k=0):
        y1 = self._solve(e, k)
        u1 = e - self.controller.output(y1)
        y1 = self.plant.advance(u1, k)
        self.controller.advance(y1, k)
        self.y1 = y1
        return y1


class Feedback(SystemOperator):
    """Negative feedback closure ``e -> y`` with ``y = P(e - C y)``.

    Each step solves the algebraic loop by relaxed fixed-point iteration
    (default relaxation 0.5, tolerance 1e-10) and fails loudly with the
    step index after ``max_iters`` sweeps.  Well-posedness of the loop is
    assumed, not proven.
    """

    def __init__(self, plant: SystemOperator, controller: SystemOperator,
                 relaxation: float = 0.5, tol: float = 1e-10, max_iters: int = 1000):
        if plant.dim != controller.dim:
            raise ValueError("plant and controller dimensions differ")
        self.plant = plant
        self.controller = controller
        self.relaxation = relaxation
        self.tol = tol
        self.max_iters = max_iters
        self.dim = plant.dim

    def _stepper(self, h):
        return _FeedbackStepper(self.plant._stepper(h), self.controller._stepper(h),
                                self.relaxation, self.tol, self.max_iters, self.dim)


def evaluate(P: SystemOperator, u: DiscreteSignal) -> DiscreteSignal:
    """Apply an operator to a signal (module-level spelling of ``P(u)``)."""
    return P.evaluate(u)


# --------------------------------------------------------------------------
# probe library

def make_probes(count: int, dim: int = 1, sample_period: float = 0.01,
                t_max: float = 10.0, seed: int = 42) -> list[DiscreteSignal]:
    """Seeded library of excitation signals supported on ``[0, t_max]``.

    Cycles through tones, steps, exponentially decaying chirps,
    white-noise bursts and mixtures thereof, spanning low/high-frequency
    and transient behavior.  Deterministic for a fixed seed.
    """
    if count < 1:
        raise ValueError("need at least one probe")
    rng = np.random.default_rng(seed)
    m = max(2, int(round(t_max / sample_period)))
    t = np.arange(m) * sample_period
    w_lo = 2.0 * math.pi / t_max
    w_hi = 0.3 * math.pi / sample_period

    def tone():
        w = math.exp(rng.uniform(math.log(w_lo), math.log(w_hi)))
        return rng.uniform(0.2, 3.0) * np.sin(w * t + rng.uniform(0, 2 * math.pi))

    def step():
        t0 = rng.uniform(0.0, 0.3 * t_max)
        return rng.uniform(0.2, 3.0) * np.sign(rng.standard_normal()) * (t >= t0)

    def chirp():
        lam = rng.uniform(0.5, 4.0) / t_max
        w0 = math.exp(rng.uniform(math.log(w_lo), math.log(0.2 * w_hi)))
        beta = rng.uniform(0.0, 0.5 * w_hi / t_max)
        return rng.uniform(0.2, 3.0) * np.exp(-lam * t) * np.sin(w0 * t + 0.5 * beta * t * t)

    def burst():
        t0 = rng.uniform(0.0, 0.6 * t_max)
        t1 = rng.uniform(t0 + 0.05 * t_max, t_max)
        window = (t >= t0) & (t <= t1)
        return rng.uniform(0.1, 1.0) * rng.standard_normal(m) * window

    makers = [tone, step, chirp, burst]
    probes = []
    for i in range(count):
        cols = []
        for _ in range(dim):
            kind = i % 5
            if kind < 4:
                col = makers[kind]()
            else:
                col = makers[int(rng.integers(4))]() + makers[int(rng.integers(4))]()
            cols.append(col)
        samples = np.column_stack(cols)
        if not np.any(samples):
            samples[0] = 1.0
        probes.append(DiscreteSignal(samples, sample_period))
    return probes


# --------------------------------------------------------------------------
# estimators

@dataclass(frozen=True)
class AngleEstimate:
    """Probe-set extremum of an angle ratio: a lower bound on the angle.

    ``cos_value`` is the minimum observed cosine, exactly; ``witness_probe``
    identifies the minimizing probe (an index, or an (index, time) /
    (index, index) pair for the truncated and incremental flavors).
    """

    angle: AngleRadians
    cos_value: float
    witness_probe: object
    probe_count: int
    bound_direction: str = "lower_bound_on_theta"
    flavor: str = "standard"
    seed: int | None = None


def _pair_cos(u_arr: np.ndarray, y_arr: np.ndarray, h: float) -> float | None:
    """Shared cosine ratio; None when either factor has zero norm."""
    ip = h * float(np.einsum("ij,ij->", u_arr, y_arr))
    nu = math.sqrt(h * float(np.einsum("ij,ij->", u_arr, u_arr)))
    ny = math.sqrt(h * float(np.einsum("ij,ij->", y_arr, y_arr)))
    if nu == 0.0 or ny == 0.0:
        return None
    return ip / (nu * ny)


def _norm(arr: np.ndarray, h: float) -> float:
    return math.sqrt(h * float(np.einsum("ij,ij->", arr, arr)))


_KERNEL_TOL = 1e-12


def estimate_singular_angle(P: SystemOperator, probes, seed: int | None = None) -> AngleEstimate:
    """Largest angle between ``u`` and ``P u`` observed over the probes.

    Probes whose image norm falls below ``1e-12 * max(1, ||u||)`` are
    skipped (near-kernel directions carry no angle information).  The
    reported angle is a lower bound on the operator's true angle.

    Raises
    ------
    ValueError
        If every probe is degenerate.
    """
    worst = None
    witness = None
    for i, u in enumerate(probes):
        y = P.evaluate(u)
        h = u.sample_period
        if _norm(y.samples, h) <= _KERNEL_TOL * max(1.0, _norm(u.samples, h)):
            continue
        c = _pair_cos(u.samples, y.samples, h)
        if c is None:
            continue
        if worst is None or c < worst:
            worst, witness = c, i
    if worst is None:
        raise ValueError("all probes degenerate: no admissible input/output pair")
    return AngleEstimate(angle=AngleRadians.from_cos(worst), cos_value=worst,
                         witness_probe=witness, probe_count=len(probes), seed=seed)


def estimate_l2_gain(P: SystemOperator, probes) -> float:
    """Largest norm amplification over the probes (lower bound on the gain)."""
    best = 0.0
    for u in probes:
        h = u.sample_period
        nu = _norm(u.samples, h)
        if nu == 0.0:
            continue
        best = max(best, _norm(P.evaluate(u).samples, h) / nu)
    return best


def estimate_l2e_angle(P: SystemOperator, probes, truncation_times,
                       seed: int | None = None) -> AngleEstimate:
    """Angle estimate over truncated input/output pairs.

    Every probe is evaluated once; each truncation time then contributes
    the ratio of the jointly truncated pair when both truncated norms are
    nonzero.  When the time list reaches beyond every probe's support the
    plain pairs are a subset of those examined, so this estimate is never
    below the standard one.
    """
    times = list(truncation_times)
    if not times:
        raise ValueError("need at least one truncation time")
    if any(T <= 0 for T in times):
        raise ValueError("truncation times must be positive")
    worst = None
    witness = None
    for i, u in enumerate(probes):
        y = P.evaluate(u)
        h = u.sample_period
        for T in times:
            kmax = int(math.floor(T / h + 1e-9))
            if kmax >= len(u) - 1:
                ut, yt = u.samples, y.samples
            else:
                ut = u.samples.copy()
                ut[kmax + 1:] = 0.0
                yt = y.samples.copy()
                yt[kmax + 1:] = 0.0
            c = _pair_cos(ut, yt, h)
            if c is None:
                continue
            if worst is None or c < worst:
                worst, witness = c, (i, float(T))
    if worst is None:
        raise ValueError("all truncated pairs degenerate")
    return AngleEstimate(angle=AngleRadians.from_cos(worst), cos_value=worst,
                         witness_probe=witness, probe_count=len(probes),
                         flavor="l2e", seed=seed)


def _aligned_diff(a: DiscreteSignal, b: DiscreteSignal) -> np.ndarray:
    m = max(len(a), len(b))
    out = np.zeros((m, a.dim))
    out[:len(a)] = a.samples
    out[:len(b)] -= b.samples
    return out


def estimate_incremental_angle(P: SystemOperator, probe_pairs,
                               seed: int | None = None) -> AngleEstimate:
    """Angle estimate over input/output increments ``(u - v, Pu - Pv)``.

    Pairs with ``u == v`` or with images closer than the kernel threshold
    are skipped.  Including every ``(u, 0)`` pair reproduces the standard
    ratios exactly, so with such pairs present the incremental estimate is
    never below the standard one.
    """
    worst = None
    witness = None
    count = 0
    for idx, (u, v) in enumerate(probe_pairs):
        count += 1
        du = _aligned_diff(u, v)
        if not np.any(du):
            continue
        dy = _aligned_diff(P.evaluate(u), P.evaluate(v))
        h = u.sample_period
        if _norm(dy, h) <= _KERNEL_TOL * max(1.0, _norm(du, h)):
            continue
        c = _pair_cos(du, dy, h)
        if c is None:
            continue
        if worst is None or c < worst:
            worst, witness = c, idx
    if worst is None:
        raise ValueError("all probe pairs degenerate")
    return AngleEstimate(angle=AngleRadians.from_cos(worst), cos_value=worst,
                         witness_probe=witness, probe_count=count,
                         flavor="incremental", seed=seed)


def estimate_generalized_angle(P: SystemOperator, m1: MultiplierOperator,
                               m2: MultiplierOperator, probes,
                               seed: int | None = None) -> AngleEstimate:
    """Angle estimate between weighted signals ``M1 u`` and ``M2 P u``.

    Identity multipliers reduce this to :func:`estimate_singular_angle`.
    """
    worst = None
    witness = None
    for i, u in enumerate(probes):
        y = P.evaluate(u)
        mu = m1.apply(u)
        my = m2.apply(y)
        h = u.sample_period
        if _norm(my.samples, h) <= _KERNEL_TOL * max(1.0, _norm(mu.samples, h)):
            continue
        c = _pair_cos(mu.samples, my.samples, h)
        if c is None:
            continue
        if worst is None or c < worst:
            worst, witness = c, i
    if worst is None:
        raise ValueError("all probes degenerate under the multipliers")
    return AngleEstimate(angle=AngleRadians.from_cos(worst), cos_value=worst,
                         witness_probe=witness, probe_count=len(probes),
                         flavor="generalized", seed=seed)


# --------------------------------------------------------------------------
# analytic bounds from passivity structure

@dataclass(frozen=True)
class PassivityIndices:
    """Input (nu) and output (rho) passivity indices of an operator."""

    nu: float
    rho: float


def vsp_angle_bound(idx: PassivityIndices) -> AngleRadians:
    """Angle bound for a very strictly passive operator: ``arccos(2 sqrt(nu rho))``.

    Valid for positive indices with ``nu * rho <= 1/4`` (an implicit
    constraint of very strict passivity); the bound is always below pi/2.
    """
    if not (idx.nu > 0 and idx.rho > 0):
        raise ValueError("very strict passivity requires positive indices")
    prod = idx.nu * idx.rho
    if prod > 0.25:
        raise ValueError(f"index product {prod} exceeds 1/4: no operator satisfies this")
    return AngleRadians.from_cos(2.0 * math.sqrt(prod))


def convex_vsp_angle_bound(indices) -> AngleRadians:
    """Angle bound from a family of index pairs: the best (largest) product wins."""
    indices = list(indices)
    if not indices:
        raise ValueError("need at least one index pair")
    for idx in indices:
        if not (idx.nu > 0 and idx.rho > 0 and idx.nu * idx.rho <= 0.25):
            raise ValueError("each index pair must be positive with product <= 1/4")
    best = max(idx.nu * idx.rho for idx in indices)
    return AngleRadians.from_cos(2.0 * math.sqrt(best))


def sector_angle_bound(sector: SectorBound) -> AngleRadians:
    """Angle bound for any static nonlinearity in the sector:
    ``arccos(2 sqrt(ab)/(a+b))``, equal to ``arcsin((b-a)/(a+b))``."""
    return AngleRadians.from_cos(sector.cone_cosine)


def ifofp_check(P: SystemOperator, alpha: float, probes,
                c_grid_size: int = 64, rel_slack: float = 1e-12) -> bool:
    """Sampled test of the index characterization of angles beyond pi/2.

    For an operator with angle in ``(pi/2, alpha]`` the inequality
    ``<u, Pu> >= nu ||u||^2 + rho ||Pu||^2`` must hold for every negative
    index pair on the hyperbola ``nu * rho = cos(alpha)^2 / 4``.  The pairs
    are swept as ``nu = c cos(alpha)/2`` over a log-spaced ``c`` grid, so a
    True result means *consistent with* the characterization on the grid,
    never proven; False exhibits a violating probe/pair.

    Raises
    ------
    ValueError
        If ``alpha`` is not in (pi/2, pi].
    """
    alpha = float(alpha)
    if not (math.pi / 2 < alpha <= math.pi):
        raise ValueError("alpha must lie in (pi/2, pi]")
    cos_a = math.cos(alpha)
    cs = np.logspace(-3, 3, c_grid_size)
    for u in probes:
        h = u.sample_period
        y = P.evaluate(u)
        ip = h * float(np.einsum("ij,ij->", u.samples, y.samples))
        nu2 = h * float(np.einsum("ij,ij->", u.samples, u.samples))
        ny2 = h * float(np.einsum("ij,ij->", y.samples, y.samples))
        scale = max(1.0, abs(ip), nu2, ny2)
        for c in cs:
            nu_idx = c * cos_a / 2.0
            rho_idx = cos_a / (2.0 * c)
            if ip < nu_idx * nu2 + rho_idx * ny2 - rel_slack * scale:
                return False
    return True


def estimate_secant_gain(P: SystemOperator, probes) -> float:
    """Largest ``||Pu||^2 / <u, Pu>`` over probes: a lower bound on the
    smallest secant-feasible gain.

    Raises
    ------
    ValueError
        If any probe shows a nonpositive inner product -- the operator is
        then not output strictly passive on the probe set and the secant
        machinery does not apply.
    """
    best = 0.0
    for i, u in enumerate(probes):
        h = u.sample_period
        y = P.evaluate(u)
        ip = h * float(np.einsum("ij,ij->", u.samples, y.samples))
        ny2 = h * float(np.einsum("ij,ij->", y.samples, y.samples))
        if ny2 == 0.0:
            continue
        if ip <= 0.0:
            raise ValueError(f"probe {i} has <u, Pu> = {ip:.3e} <= 0: "
                             "not output strictly passive on this probe set")
        best = max(best, ny2 / ip)
    return best


def secant_bound(n_blocks: int) -> float:
    """Threshold ``sec(pi/N)^N`` of the cyclic secant condition (N >= 3)."""
    if n_blocks < 3:
        raise ValueError("the secant threshold is meaningful for N >= 3")
    return (1.0 / math.cos(math.pi / n_blocks)) ** n_blocks


def secant_condition_check(gains, margin: float = 0.0) -> StabilityCertificate:
    """Cyclic-loop certificate: product of secant gains below ``sec(pi/N)^N``.

    For one or two blocks the threshold degenerates, so the verdict is
    ``not-applicable``; the standard regime is three or more blocks.
    Requires *upper* bounds on the gains to be meaningful -- probe-based
    estimates are lower bounds and cannot certify.

    Raises
    ------
    ValueError
        On an empty list or a nonpositive gain.
    """
    gains = [float(g) for g in gains]
    if not gains:
        raise ValueError("need at least one gain")
    if any(g <= 0 for g in gains):
        raise ValueError("secant gains must be positive")
    n = len(gains)
    product = float(np.prod(gains))
    if n < 3:
        return StabilityCertificate(
            verdict=Verdict.NOT_APPLICABLE,
            method="secant",
            margin=0.0,
            witnesses={"reason": "secant threshold degenerates for N < 3",
                       "block_count": n, "gain_product": product},
            inputs_digest=inputs_digest(gains, "secant"),
        )
    bound = secant_bound(n)
    gap = bound - product
    certified = gap > margin and gap > 0.0
    return StabilityCertificate(
        verdict=Verdict.CERTIFIED if certified else Verdict.INCONCLUSIVE,
        method="secant",
        margin=gap,
        witnesses={"gain_product": product, "threshold": bound,
                   "block_count": n, "margin_required": margin},
        inputs_digest=inputs_digest(gains, "secant"),
    )


def passivity_angle_check(est: AngleEstimate) -> bool:
    """Necessary-direction passivity screen: the angle estimate stays at or
    below pi/2.  A True result cannot prove passivity (the estimate is a
    lower bound); a False result refutes it."""
    return est.angle.value <= math.pi / 2


# --------------------------------------------------------------------------
# operator JSON interchange

def _fn_gain(k):
    return lambda x: k * x


def _fn_saturation(slope, limit):
    return lambda x: np.clip(slope * x, -limit, limit)


def _fn_deadzone_gain(k, width):
    return lambda x: k * (x - np.clip(x, -width, width))


def _fn_cubic(c):
    return lambda x: c * x ** 3


def _fn_tanh_scaled(amplitude, rate):
    return lambda x: amplitude * np.tanh(rate * x)


def _fn_slope_clamp(slope, lo, hi):
    def f(x):
        a = lo * x
        b = hi * x
        return np.clip(slope * x, np.minimum(a, b), np.maximum(a, b))
    return f


STATIC_FN_REGISTRY = {
    "gain": _fn_gain,
    "saturation": _fn_saturation,
    "deadzone_gain": _fn_deadzone_gain,
    "cubic": _fn_cubic,
    "tanh_scaled": _fn_tanh_scaled,
    "slope_clamp": _fn_slope_clamp,
}


def operator_from_json_dict(data: dict) -> SystemOperator:
    """Build an operator from its JSON description.

    Kinds: ``static`` (named scalar map from the registry with parameters
    and an optional ``sector: [a, b]``), ``lti`` (a system plus
    ``sample_period``), ``cascade``/``feedback`` (nested operators) and
    ``scaled``.
    """
    try:
        kind = data["kind"]
        if kind == "static":
            factory = STATIC_FN_REGISTRY[data["fn"]]
            fn = factory(**data.get("params", {}))
            sector = data.get("sector")
            sector = SectorBound(sector[0], sector[1]) if sector else None
            return StaticNonlinearity(fn, dim=int(data.get("dim", 1)), sector=sector,
                                      name=data["fn"])
        if kind == "lti":
            system = system_from_json_dict(data["system"])
            return LtiSurrogate(system, float(data["sample_period"]))
        if kind == "cascade":
            return Cascade([operator_from_json_dict(s) for s in data["stages"]])
        if kind == "feedback":
            return Feedback(operator_from_json_dict(data["plant"]),
                            operator_from_json_dict(data["controller"]))
        if kind == "scaled":
            return Scaled(operator_from_json_dict(data["base"]), float(data["factor"]))
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed operator JSON: {exc}") from exc
    raise ValueError(f"unknown operator kind {data.get('kind')!r}")


def load_operator_json(path) -> SystemOperator:
    with open(path) as fh:
        return operator_from_json_dict(json.load(fh))
