"""Stable LTI systems: frequency responses, angles and loop certificates.

Systems are real-rational and square, held in state-space form (with an
optional SISO rational form kept alongside).  Stability is checked, never
assumed: every angle computation requires all state eigenvalues strictly
in the open left half-plane.

Frequency sweeps approximate the supremum over all frequencies by a grid
plus local refinement; certificates from gridded checks therefore carry a
``coverage: grid`` marker rather than a claim of exhaustiveness.
"""

from __future__ import annotations

import cmath
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from .certificates import StabilityCertificate, Verdict, inputs_digest
from .matrix_angle import (
    AngleSolverOptions,
    certified_angle_upper_bound,
    matrix_singular_angle,
)
from .signal_core import AngleRadians

__all__ = [
    "LtiSystem",
    "FrequencyGrid",
    "SectorBound",
    "HinfAngleResult",
    "is_stable",
    "freq_response",
    "frequencywise_angle",
    "hinf_singular_angle",
    "well_posedness_check",
    "lti_small_angle_check",
    "hinf_small_angle_check",
    "closed_loop",
    "lure_cone_check",
    "two_tone_bound",
    "discretize_zoh",
    "simulate_discretized",
    "load_system_json",
    "save_system_json",
    "system_from_json_dict",
    "system_to_json_dict",
    "write_sweep_csv",
    "max_workers",
]

STABILITY_TOL = 1e-9


def max_workers() -> int:
    """Parallelism cap for frequency sweeps, from ``ANGLEGUARD_THREADS``."""
    try:
        return max(1, int(os.environ.get("ANGLEGUARD_THREADS", "1")))
    except ValueError:
        return 1


def _as_2d(x, name):
    arr = np.atleast_2d(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class LtiSystem:
    """Square real-rational system in state space, optionally with a SISO
    rational form (numerator/denominator coefficients, descending powers).

    Use :meth:`from_state_space`, :meth:`from_transfer_function` or
    :meth:`static_gain` to construct.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    num: np.ndarray | None = None
    den: np.ndarray | None = None

    def __post_init__(self):
        A = _as_2d(self.A, "A") if np.size(self.A) else np.zeros((0, 0))
        D = _as_2d(self.D, "D")
        m = A.shape[0]
        n = D.shape[0]
        B = _as_2d(self.B, "B") if np.size(self.B) else np.zeros((m, n))
        C = _as_2d(self.C, "C") if np.size(self.C) else np.zeros((n, m))
        if A.shape != (m, m):
            raise ValueError("state matrix must be square")
        if D.shape != (n, n):
            raise ValueError("only square systems (equal input/output counts) are supported")
        if B.shape != (m, n) or C.shape != (n, m):
            raise ValueError(f"inconsistent shapes: A{A.shape} B{B.shape} C{C.shape} D{D.shape}")
        for name, arr in (("A", A), ("B", B), ("C", C), ("D", D)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        for name in ("num", "den"):
            val = getattr(self, name)
            if val is not None:
                val = np.asarray(val, dtype=float).ravel().copy()
                val.setflags(write=False)
                object.__setattr__(self, name, val)

    # -- constructors -----------------------------------------------------
    @staticmethod
    def from_state_space(A, B, C, D) -> "LtiSystem":
        return LtiSystem(np.asarray(A, dtype=float), B, C, D)

    @staticmethod
    def from_transfer_function(num, den) -> "LtiSystem":
        """SISO rational system, built in controllable canonical form.

        Requires ``deg(num) <= deg(den)`` (properness).  The rational
        coefficients are retained so frequency responses can be
        cross-checked against the state-space path.
        """
        num = np.trim_zeros(np.asarray(num, dtype=float).ravel(), "f")
        den = np.trim_zeros(np.asarray(den, dtype=float).ravel(), "f")
        if den.size == 0:
            raise ValueError("denominator must be nonzero")
        if num.size == 0:
            num = np.zeros(1)
        if num.size > den.size:
            raise ValueError("improper transfer function: deg(num) > deg(den)")
        num = num / den[0]
        den = den / den[0]
        m = den.size - 1
        b = np.concatenate([np.zeros(m + 1 - num.size), num])
        d0 = b[0]
        if m == 0:
            return LtiSystem(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)),
                             [[d0]], num=num, den=den)
        A = np.zeros((m, m))
        A[0, :] = -den[1:]
        A[1:, :-1] = np.eye(m - 1)
        B = np.zeros((m, 1))
        B[0, 0] = 1.0
        C = (b[1:] - d0 * den[1:])[None, :]
        return LtiSystem(A, B, C, [[d0]], num=num, den=den)

    @staticmethod
    def static_gain(K) -> "LtiSystem":
        K = np.atleast_2d(np.asarray(K, dtype=float))
        n = K.shape[0]
        sys = LtiSystem(np.zeros((0, 0)), np.zeros((0, n)), np.zeros((n, 0)), K)
        if n == 1:
            object.__setattr__(sys, "num", np.array([float(K[0, 0])]))
            object.__setattr__(sys, "den", np.array([1.0]))
        return sys

    # -- structure --------------------------------------------------------
    @property
    def n(self) -> int:
        """Input/output dimension."""
        return self.D.shape[0]

    @property
    def state_dim(self) -> int:
        return self.A.shape[0]

    @property
    def is_siso(self) -> bool:
        return self.n == 1

    @cached_property
    def poles(self) -> np.ndarray:
        if self.state_dim == 0:
            return np.zeros(0, dtype=complex)
        return np.linalg.eigvals(self.A)

    def relative_degree(self) -> int | None:
        """Denominator-minus-numerator degree for the SISO rational form."""
        if self.num is None or self.den is None:
            return None
        return self.den.size - self.num.size


def is_stable(P: LtiSystem, tol: float = STABILITY_TOL) -> bool:
    """True iff every pole lies strictly left of ``-tol``.

    Checks the state matrix eigenvalues, and the denominator roots as well
    when a rational form is attached.
    """
    if P.state_dim and np.max(P.poles.real) >= -tol:
        return False
    if P.den is not None and P.den.size > 1:
        if np.max(np.roots(P.den).real) >= -tol:
            return False
    return True


def _require_stable(P: LtiSystem) -> None:
    if not is_stable(P):
        raise ValueError("system is not stable (poles touch the closed right half-plane)")


def freq_response(P: LtiSystem, omega: float) -> np.ndarray:
    """Frequency response matrix at ``omega`` (rad/s), including ``inf``.

    ``C (jwI - A)^{-1} B + D`` at finite frequencies; the feedthrough (or,
    for the rational form, the leading-coefficient ratio or 0 according to
    relative degree) at infinity.  Real-rationality gives conjugate
    symmetry, so negative frequencies return the conjugate of the positive
    evaluation.
    """
    _require_stable(P)
    if math.isinf(omega):
        return P.D.copy()
    if omega < 0:
        return np.conj(freq_response(P, -omega))
    if P.state_dim == 0:
        return P.D.astype(complex)
    m = P.state_dim
    resolvent = np.linalg.solve(1j * omega * np.eye(m) - P.A, P.B)
    return P.C @ resolvent + P.D


def _rational_response(P: LtiSystem, omega: float) -> complex:
    if math.isinf(omega):
        r = P.relative_degree()
        return complex(P.num[0] / P.den[0]) if r == 0 else 0j
    s = 1j * omega
    return complex(np.polyval(P.num, s) / np.polyval(P.den, s))


@dataclass(frozen=True)
class FrequencyGrid:
    """Sorted positive frequencies, with optional 0 and infinity endpoints."""

    points: np.ndarray
    include_zero: bool = True
    include_infinity: bool = True

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).ravel().copy()
        if pts.size == 0:
            raise ValueError("frequency grid must be nonempty")
        if np.any(pts <= 0) or not np.all(np.isfinite(pts)):
            raise ValueError("grid points must be finite and positive")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @staticmethod
    def default(count: int = 400, wmin: float = 1e-3, wmax: float = 1e6,
                include_zero: bool = True, include_infinity: bool = True) -> "FrequencyGrid":
        """Log-spaced grid covering typical pole/zero spreads."""
        return FrequencyGrid(np.logspace(math.log10(wmin), math.log10(wmax), count),
                             include_zero=include_zero, include_infinity=include_infinity)


@dataclass(frozen=True)
class SectorBound:
    """Slopes ``0 < a < b`` bounding a static nonlinearity sector."""

    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and math.isfinite(b) and b > a > 0):
            raise ValueError(f"sector requires b > a > 0, got a={self.a!r}, b={self.b!r}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def cone_cosine(self) -> float:
        return 2.0 * math.sqrt(self.a * self.b) / (self.a + self.b)


def _response_scale(P: LtiSystem) -> float:
    # cheap magnitude scale for kernel thresholds
    return max(float(np.linalg.norm(P.D)), float(np.linalg.norm(P.C) * np.linalg.norm(P.B)), 1e-30)


def frequencywise_angle(P: LtiSystem, omega: float,
                        opts: AngleSolverOptions | None = None) -> AngleRadians:
    """Singular angle of the response matrix at one frequency.

    SISO responses reduce to ``|arg P(jw)|``; a response below the kernel
    threshold returns angle 0 by convention.  MIMO responses go through
    the multi-start matrix-angle solver.
    """
    _require_stable(P)
    M = freq_response(P, omega)
    ktol = 1e-12 * _response_scale(P)
    if np.linalg.norm(M) <= ktol:
        return AngleRadians(0.0)
    if P.is_siso:
        return AngleRadians(abs(cmath.phase(complex(M[0, 0]))))
    return matrix_singular_angle(M, opts).angle


def _angle_upper_at(P: LtiSystem, omega: float, resolution: int) -> float:
    """Certified upper bound on the frequency-wise angle (exact for SISO)."""
    M = freq_response(P, omega)
    if np.linalg.norm(M) <= 1e-12 * _response_scale(P):
        return 0.0
    if P.is_siso:
        return abs(cmath.phase(complex(M[0, 0])))
    return certified_angle_upper_bound(M, resolution=resolution).value


def _limit_angle_at_infinity(P: LtiSystem, opts: AngleSolverOptions | None = None) -> float:
    """Limiting angle of P(jw) as w -> inf.

    Captures suprema that are approached but never attained: a strictly
    proper response rolls off through phase ``-r*pi/2`` where ``r`` is the
    relative degree, even though the response value itself tends to zero.
    """
    D = P.D
    if np.linalg.norm(D) > 1e-12 * _response_scale(P):
        if P.is_siso:
            return abs(cmath.phase(complex(D[0, 0])))
        return matrix_singular_angle(D, opts).angle.value
    r = P.relative_degree()
    if r is not None and r > 0:
        lead = P.num[0] / P.den[0]
        phase = -r * math.pi / 2.0 + (0.0 if lead > 0 else math.pi)
        return abs(cmath.phase(cmath.exp(1j * phase)))
    # first nonzero Markov parameter sets the rolloff direction
    if P.state_dim == 0:
        return 0.0
    Mk = P.C @ P.B
    Ak = np.eye(P.state_dim)
    scale = max(np.linalg.norm(P.C) * np.linalg.norm(P.B), 1e-30)
    for k in range(P.state_dim):
        if np.linalg.norm(Mk) > 1e-10 * scale:
            limit = (-1j) ** (k + 1) * Mk
            if P.is_siso:
                return abs(cmath.phase(complex(limit[0, 0])))
            return matrix_singular_angle(limit, opts).angle.value
        Ak = Ak @ P.A
        Mk = P.C @ Ak @ P.B
        scale = max(scale * max(np.linalg.norm(P.A), 1.0), 1e-30)
    return 0.0


@dataclass(frozen=True)
class HinfAngleResult:
    """Supremum of the frequency-wise angle with the attaining frequency."""

    angle: AngleRadians
    argmax_omega: float
    cos_value: float


def _golden_max(fun, lo: float, hi: float, iters: int = 60, tol: float = 1e-10):
    """Golden-section maximization on [lo, hi]; returns (x, fun(x))."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if b - a < tol * max(1.0, abs(a), abs(b)):
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return (c, fc) if fc >= fd else (d, fd)


def _sweep(values_fun, omegas, workers=None):
    workers = workers if workers is not None else max_workers()
    if workers > 1 and len(omegas) > 8:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(values_fun, omegas))
    return [values_fun(w) for w in omegas]


def hinf_singular_angle(P: LtiSystem, grid: FrequencyGrid | None = None,
                        opts: AngleSolverOptions | None = None,
                        refine_tol: float = 1e-9) -> HinfAngleResult:
    """Largest frequency-wise angle over a grid, with local refinement.

    The best grid point is polished by golden-section search between its
    neighbors (log-frequency for interior points).  With the grid's
    infinity flag set, the limiting angle of the rolloff is also taken
    into account, since the supremum may only be approached in the limit.

    Returns the angle, the attaining frequency (``inf`` when the limit
    dominates) and the corresponding cosine.
    """
    _require_stable(P)
    grid = grid or FrequencyGrid.default()

    def ang(w: float) -> float:
        return frequencywise_angle(P, w, opts).value

    omegas = list(grid.points)
    if grid.include_zero:
        omegas = [0.0] + omegas
    angles = _sweep(ang, omegas)

    i = int(np.argmax(angles))
    best_w, best_a = omegas[i], angles[i]

    lo = omegas[i - 1] if i > 0 else omegas[0]
    hi = omegas[i + 1] if i + 1 < len(omegas) else omegas[-1]
    if hi > lo:
        if lo > 0.0:
            x, fx = _golden_max(lambda t: ang(math.exp(t)), math.log(lo), math.log(hi),
                                tol=refine_tol)
            x = math.exp(x)
        else:
            x, fx = _golden_max(ang, lo, hi, tol=refine_tol)
        if fx > best_a:
            best_w, best_a = x, fx

    if grid.include_infinity:
        inf_response_angle = ang(math.inf)
        if inf_response_angle > best_a:
            best_w, best_a = math.inf, inf_response_angle
        limit = _limit_angle_at_infinity(P, opts)
        if limit > best_a:
            best_w, best_a = math.inf, limit

    return HinfAngleResult(angle=AngleRadians(best_a), argmax_omega=best_w,
                           cos_value=math.cos(best_a))


def well_posedness_check(P: LtiSystem, C: LtiSystem) -> bool:
    """Loop invertibility at infinite frequency: ``det(I + C(inf) P(inf)) != 0``.

    The determinant tolerance scales with the feedthrough sizes so large
    gains do not trigger false negatives.
    """
    if P.n != C.n:
        raise ValueError(f"dimension mismatch: {P.n} vs {C.n}")
    Pinf = freq_response(P, math.inf)
    Cinf = freq_response(C, math.inf)
    det_tol = 1e-9 * (1.0 + np.linalg.norm(Cinf) * np.linalg.norm(Pinf))
    return abs(np.linalg.det(np.eye(P.n) + Cinf @ Pinf)) > det_tol


def _grid_omegas(grid: FrequencyGrid):
    omegas = list(grid.points)
    if grid.include_zero:
        omegas = [0.0] + omegas
    if grid.include_infinity:
        omegas = omegas + [math.inf]
    return omegas


def lti_small_angle_check(P: LtiSystem, C: LtiSystem, grid: FrequencyGrid | None = None,
                          margin: float = 0.0, refine_band: float = 0.15,
                          refine_evals: int = 16, refine_budget: int = 200,
                          resolution: int = 256,
                          opts: AngleSolverOptions | None = None) -> StabilityCertificate:
    """Frequency-wise loop certificate: angle sums below pi at every grid point.

    At each frequency the angles of both responses are bounded from above
    (exactly for SISO, by certified over-approximation for MIMO) and their
    sum compared against pi.  Adjacent grid intervals whose sums come
    within ``refine_band`` of pi are searched for an interior peak so the
    certification boundary cannot slip between grid points unnoticed
    (bounded work: ``refine_evals`` evaluations on each of at most
    ``refine_budget`` intervals, worst intervals first).  The certificate
    stores the smallest ``pi - sum`` over all evaluations as the angular
    stability margin together with the critical frequency, and is marked
    with ``coverage: grid`` -- a finite sweep approximates the
    all-frequency hypothesis without claiming exhaustiveness.

    Raises
    ------
    ValueError
        If either system is unstable or the loop is ill-posed.
    """
    _require_stable(P)
    _require_stable(C)
    if not well_posedness_check(P, C):
        raise ValueError("ill-posed loop: I + C(inf)P(inf) is singular")
    grid = grid or FrequencyGrid.default()
    opts = opts or AngleSolverOptions()

    def angle_sum(w: float) -> float:
        return _angle_upper_at(P, w, resolution) + _angle_upper_at(C, w, resolution)

    omegas = _grid_omegas(grid)
    sums = _sweep(angle_sum, omegas)

    worst_w, worst_sum = max(zip(omegas, sums), key=lambda t: t[1])

    flagged = []
    for (w1, s1), (w2, s2) in zip(zip(omegas, sums), zip(omegas[1:], sums[1:])):
        if math.isinf(w2) or not w2 > w1:
            continue
        if max(s1, s2) > math.pi - refine_band:
            flagged.append((max(s1, s2), w1, w2))
    flagged.sort(reverse=True)
    for _, w1, w2 in flagged[:refine_budget]:
        if w1 > 0:
            x, fx = _golden_max(lambda t: angle_sum(math.exp(t)),
                                math.log(w1), math.log(w2), iters=refine_evals)
            x = math.exp(x)
        else:
            x, fx = _golden_max(angle_sum, w1, w2, iters=refine_evals)
        if fx > worst_sum:
            worst_w, worst_sum = x, fx

    stability_margin = math.pi - worst_sum
    certified = stability_margin > margin and stability_margin > 0.0
    return StabilityCertificate(
        verdict=Verdict.CERTIFIED if certified else Verdict.INCONCLUSIVE,
        method="thm3",
        margin=stability_margin,
        witnesses={
            "critical_omega": worst_w,
            "worst_angle_sum_rad": worst_sum,
            "margin_required": margin,
            "coverage": "grid",
            "grid_size": len(omegas),
        },
        inputs_digest=inputs_digest(P.A, P.B, P.C, P.D, C.A, C.B, C.C, C.D, "thm3"),
        seed=opts.seed,
    )


def hinf_small_angle_check(P: LtiSystem, C: LtiSystem, grid: FrequencyGrid | None = None,
                           margin: float = 0.0,
                           opts: AngleSolverOptions | None = None) -> StabilityCertificate:
    """Loop certificate from the two supremal angles: strictly more
    conservative than the frequency-wise check on the same grid (a
    certified verdict here implies one there)."""
    _require_stable(P)
    _require_stable(C)
    if not well_posedness_check(P, C):
        raise ValueError("ill-posed loop: I + C(inf)P(inf) is singular")
    opts = opts or AngleSolverOptions()
    rp = hinf_singular_angle(P, grid, opts)
    rc = hinf_singular_angle(C, grid, opts)
    total = rp.angle.value + rc.angle.value
    stability_margin = math.pi - total
    certified = stability_margin > margin and stability_margin > 0.0
    return StabilityCertificate(
        verdict=Verdict.CERTIFIED if certified else Verdict.INCONCLUSIVE,
        method="cor3",
        margin=stability_margin,
        witnesses={
            "critical_omega": rp.argmax_omega,
            "theta_inf_p_rad": rp.angle.value,
            "theta_inf_c_rad": rc.angle.value,
            "argmax_omega_c": rc.argmax_omega,
            "margin_required": margin,
            "coverage": "grid",
        },
        inputs_digest=inputs_digest(P.A, P.B, P.C, P.D, C.A, C.B, C.C, C.D, "cor3"),
        seed=opts.seed,
    )


def closed_loop(P: LtiSystem, C: LtiSystem) -> LtiSystem:
    """State-space realization of the closed-loop map ``P (I + C P)^{-1}``.

    Both operands must be stable and the loop well posed.  The result is
    stable iff the loop is stable -- that is the caller's check, not a
    property of this construction.
    """
    _require_stable(P)
    _require_stable(C)
    if P.n != C.n:
        raise ValueError(f"dimension mismatch: {P.n} vs {C.n}")
    n = P.n
    loop_gain = np.eye(n) + P.D @ C.D
    if abs(np.linalg.det(loop_gain)) <= 1e-9 * (1.0 + np.linalg.norm(P.D) * np.linalg.norm(C.D)):
        raise ValueError("ill-posed feedthrough: I + D_P D_C is singular")
    M = np.linalg.inv(loop_gain)
    mp, mc = P.state_dim, C.state_dim

    A = np.zeros((mp + mc, mp + mc))
    A[:mp, :mp] = P.A - P.B @ C.D @ M @ P.C
    A[:mp, mp:] = -P.B @ C.C + P.B @ C.D @ M @ P.D @ C.C
    A[mp:, :mp] = C.B @ M @ P.C
    A[mp:, mp:] = C.A - C.B @ M @ P.D @ C.C
    B = np.vstack([P.B @ (np.eye(n) - C.D @ M @ P.D), C.B @ M @ P.D])
    Cm = np.hstack([M @ P.C, -M @ P.D @ C.C])
    D = M @ P.D
    return LtiSystem(A, B, Cm, D)


def lure_cone_check(P: LtiSystem, sector: SectorBound, grid: FrequencyGrid | None = None,
                    margin: float = 0.0) -> StabilityCertificate:
    """Phase-cone certificate for a SISO plant against a whole sector.

    For every grid frequency with a nonzero response, the plant phase must
    stay strictly inside ``(-cone, +cone)`` with ``cone = pi -
    arccos(2 sqrt(ab)/(a+b))``.  A verdict of certified then covers the
    feedback loop with *every* static nonlinearity in the sector, at any
    positive loop gain.

    Raises
    ------
    ValueError
        For MIMO systems or unstable plants.
    """
    _require_stable(P)
    if not P.is_siso:
        raise ValueError("the sector cone test applies to SISO systems only")
    grid = grid or FrequencyGrid.default()
    cone_half = math.pi - math.acos(sector.cone_cosine)
    ktol = 1e-12 * max(1.0, _response_scale(P))

    def phase_abs(w: float) -> float:
        z = complex(freq_response(P, w)[0, 0])
        if abs(z) <= ktol:
            return 0.0
        return abs(cmath.phase(z))

    omegas = _grid_omegas(grid)
    phases = _sweep(phase_abs, omegas)
    worst_w, worst = max(zip(omegas, phases), key=lambda t: t[1])

    finite = [w for w in omegas if 0.0 < w < math.inf]
    if 0.0 < worst_w < math.inf and len(finite) > 1:
        i = finite.index(worst_w) if worst_w in finite else None
        if i is not None:
            lo = finite[i - 1] if i > 0 else finite[0]
            hi = finite[i + 1] if i + 1 < len(finite) else finite[-1]
            if hi > lo:
                x, fx = _golden_max(lambda t: phase_abs(math.exp(t)), math.log(lo), math.log(hi))
                if fx > worst:
                    worst_w, worst = math.exp(x), fx

    phase_margin = cone_half - worst
    certified = phase_margin > margin and phase_margin > 0.0
    return StabilityCertificate(
        verdict=Verdict.CERTIFIED if certified else Verdict.INCONCLUSIVE,
        method="cor2",
        margin=phase_margin,
        witnesses={
            "critical_omega": worst_w,
            "max_phase_rad": worst,
            "cone_half_angle_rad": cone_half,
            "sector": [sector.a, sector.b],
            "margin_required": margin,
            "coverage": "grid",
        },
        inputs_digest=inputs_digest(P.A, P.B, P.C, P.D, [sector.a, sector.b], "cor2"),
    )


def two_tone_bound(P: LtiSystem, omega0: float, omega1: float, tau: float) -> float:
    """Upper bound on the time-domain angle cosine from a two-tone probe.

    A probe concentrating energy fractions ``tau`` and ``1 - tau`` in
    narrow bands at the two frequencies attains the cosine ratio

        (tau Re z0 + (1-tau) Re z1) / sqrt(tau |z0|^2 + (1-tau) |z1|^2)

    in the narrow-band limit, where ``z_i = P(jw_i)``.  The true operator
    angle cosine can therefore be no larger.  With ``omega0 == omega1``
    this degenerates to the single-tone value ``Re z0 / |z0|``.

    Raises
    ------
    ValueError
        If ``tau`` is outside (0, 1) or either response is zero.
    """
    _require_stable(P)
    if not P.is_siso:
        raise ValueError("two-tone probe bound applies to SISO systems")
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie strictly inside (0, 1), got {tau!r}")
    z0 = complex(freq_response(P, omega0)[0, 0])
    z1 = complex(freq_response(P, omega1)[0, 0])
    ktol = 1e-12 * max(1.0, _response_scale(P))
    if abs(z0) <= ktol or abs(z1) <= ktol:
        raise ValueError("zero response at a probe frequency")
    numerator = tau * z0.real + (1.0 - tau) * z1.real
    denominator = math.sqrt(tau * abs(z0) ** 2 + (1.0 - tau) * abs(z1) ** 2)
    return numerator / denominator


# --------------------------------------------------------------------------
# zero-order-hold discretization (used by the sampled-operator machinery)

def discretize_zoh(P: LtiSystem, h: float):
    """Exact zero-order-hold discretization ``(Ad, Bd, C, D)`` at step ``h``."""
    if h <= 0:
        raise ValueError("sample period must be positive")
    m = P.state_dim
    if m == 0:
        return np.zeros((0, 0)), np.zeros((0, P.n)), P.C.copy(), P.D.copy()
    blk = np.zeros((m + P.n, m + P.n))
    blk[:m, :m] = P.A
    blk[:m, m:] = P.B
    E = scipy.linalg.expm(blk * h)
    return E[:m, :m], E[:m, m:], P.C.copy(), P.D.copy()


def simulate_discretized(Ad, Bd, C, D, inputs: np.ndarray) -> np.ndarray:
    """Step the discretized system over an (m, n) input sample array."""
    m = inputs.shape[0]
    x = np.zeros(Ad.shape[0])
    out = np.empty((m, D.shape[0]))
    for k in range(m):
        u = inputs[k]
        out[k] = C @ x + D @ u
        x = Ad @ x + Bd @ u
    return out


# --------------------------------------------------------------------------
# JSON / CSV interchange

def system_from_json_dict(data: dict) -> LtiSystem:
    """Parse ``{"ss": {A, B, C, D}}`` or ``{"tf": {"num": [...], "den": [...]}}``."""
    try:
        if "ss" in data:
            ss = data["ss"]
            return LtiSystem.from_state_space(ss["A"], ss["B"], ss["C"], ss["D"])
        if "tf" in data:
            tf = data["tf"]
            return LtiSystem.from_transfer_function(tf["num"], tf["den"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed system JSON: {exc}") from exc
    raise ValueError("system JSON needs an 'ss' or 'tf' entry")


def system_to_json_dict(P: LtiSystem) -> dict:
    if P.num is not None and P.den is not None:
        return {"tf": {"num": P.num.tolist(), "den": P.den.tolist()}}
    return {"ss": {"A": P.A.tolist(), "B": P.B.tolist(), "C": P.C.tolist(), "D": P.D.tolist()}}


def load_system_json(path) -> LtiSystem:
    with open(path) as fh:
        return system_from_json_dict(json.load(fh))


def save_system_json(path, P: LtiSystem) -> None:
    with open(path, "w") as fh:
        json.dump(system_to_json_dict(P), fh, indent=2)


def write_sweep_csv(path, rows) -> None:
    """Emit ``omega, angle_rad, cos_theta`` sweep rows as CSV."""
    with open(path, "w", newline="") as fh:
        fh.write("omega,angle_rad,cos_theta\n")
        for omega, angle in rows:
            fh.write(f"{omega:.9g},{angle:.9g},{math.cos(angle):.9g}\n")
