"""Singular angles of complex square matrices.

The central quantity is the worst-case angle between ``x`` and ``Ax`` over
the complex unit sphere,

    cos theta(A) = inf { Re(x* A x) / (|x| |Ax|) : x != 0, Ax != 0 },

a nonconvex optimization problem.  Three routes are provided:

* :func:`matrix_singular_angle` -- multi-start sampling followed by
  Riemannian gradient descent on the sphere.  Reported values are
  best-found lower bounds on the angle, except for Hermitian positive
  definite inputs where an extreme-eigenvalue closed form is exact.
* :func:`dense_angle_oracle` -- an independent estimate built from dense
  sphere sampling plus a support-line sweep of the planar joint range of
  the quadratic forms ``Re(x*Ax)`` and ``|Ax|^2``.  Used as the reference
  in randomized test suites at small dimension.
* :func:`certified_angle_upper_bound` -- an over-approximation of the
  angle from an outer polygon of the same joint range; this is the sound
  direction for certification and backs :func:`matrix_small_angle_check`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .certificates import StabilityCertificate, Verdict, inputs_digest
from .signal_core import AngleRadians

__all__ = [
    "AngleSolverOptions",
    "AngleResult",
    "NormalizedRangeSample",
    "vector_angle",
    "matrix_singular_angle",
    "hpd_singular_angle_oracle",
    "normalized_numerical_range",
    "eigen_angles",
    "matrix_small_angle_check",
    "dense_angle_oracle",
    "dense_angle_oracle_batch",
    "certified_angle_upper_bound",
    "load_matrix_json",
    "save_matrix_json",
    "matrix_from_json_dict",
    "matrix_to_json_dict",
    "write_wn_csv",
]


# --------------------------------------------------------------------------
# basic helpers

def _as_square_complex(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A.view(float))):
        raise ValueError("matrix entries must be finite")
    return A


def _spectral_norm(A: np.ndarray) -> float:
    return float(np.linalg.norm(A, 2))


def _default_kernel_tol(A: np.ndarray) -> float:
    # directions with |Ax| below this are excluded: the defining ratio is
    # meaningless near the kernel
    return 1e-10 * _spectral_norm(A)


def _hg_forms(A: np.ndarray):
    """Hermitian forms H, G with Re(x*Ax) = x*Hx and |Ax|^2 = x*Gx."""
    H = (A + A.conj().T) / 2.0
    G = A.conj().T @ A
    return H, G


def _cos_ratios(A: np.ndarray, X: np.ndarray, kernel_tol: float):
    """Cosine ratios for a batch of row vectors; near-kernel rows get +inf."""
    AX = X @ A.T
    h = np.einsum("...i,...i->...", X.conj(), AX).real
    g = np.einsum("...i,...i->...", AX.conj(), AX).real
    n2 = np.einsum("...i,...i->...", X.conj(), X).real
    ratios = np.full(h.shape, np.inf)
    ok = (g > kernel_tol ** 2 * np.maximum(n2, 1e-300)) & (n2 > 0)
    ratios[ok] = h[ok] / np.sqrt(g[ok] * n2[ok])
    return ratios


def canonical_witness(x: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Unit-normalize and rotate phase so the first sizable entry is real positive."""
    x = np.asarray(x, dtype=complex)
    nrm = np.linalg.norm(x)
    if nrm == 0:
        return x
    x = x / nrm
    for xi in x:
        if abs(xi) > tol:
            x = x * (abs(xi) / xi)
            break
    return x


def _lexi_key(x: np.ndarray):
    return tuple(float(v) for pair in zip(x.real, x.imag) for v in pair)


def vector_angle(x, y) -> AngleRadians:
    """Angle in ``[0, pi]`` between complex vectors via ``Re(x*y)/(|x||y|)``.

    Returns 0 if either vector is zero.  Raises on dimension mismatch.
    """
    x = np.asarray(x, dtype=complex).ravel()
    y = np.asarray(y, dtype=complex).ravel()
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0.0 or ny == 0.0:
        return AngleRadians(0.0)
    return AngleRadians.from_cos(float(np.vdot(x, y).real) / (nx * ny))


# --------------------------------------------------------------------------
# result types and options

@dataclass(frozen=True)
class AngleSolverOptions:
    """Options for the multi-start sphere search.

    ``tol`` is the Riemannian gradient norm at which a start counts as
    converged; ``kernel_tol`` (default ``1e-10 * ||A||``) excludes
    near-kernel directions.  Random starts are seeded so the search is
    reproducible, and the seed travels into certificates.
    """

    tol: float = 1e-9
    kernel_tol: float | None = None
    max_iters: int = 200
    random_starts: int = 32
    polish_starts: int = 6
    phase_grid: int = 8
    seed: int = 42
    use_hpd_closed_form: bool = True
    tie_tol: float = 1e-12


@dataclass(frozen=True)
class AngleResult:
    """Angle value with the witness direction attaining the reported cosine."""

    angle: AngleRadians
    witness: np.ndarray
    cos_value: float
    converged: bool
    iterations: int
    method: str
    seed: int


@dataclass(frozen=True)
class NormalizedRangeSample:
    """One point ``z = x*Ax/(|x||Ax|)`` of the normalized numerical range."""

    point: complex
    witness: np.ndarray


# --------------------------------------------------------------------------
# closed form for Hermitian positive definite matrices

def _is_hpd(A: np.ndarray, tol: float = 1e-12):
    scale = max(_spectral_norm(A), 1e-300)
    if np.linalg.norm(A - A.conj().T) > tol * scale:
        return None
    w, V = np.linalg.eigh((A + A.conj().T) / 2.0)
    if w[0] <= 0.0:
        return None
    return w, V


def hpd_singular_angle_oracle(A) -> AngleRadians:
    """Exact singular angle of a Hermitian positive definite matrix.

    From the extreme eigenvalues: ``arccos(2 sqrt(l_min l_max) / (l_min +
    l_max))``, the classical extremal-ratio (antieigenvalue) closed form.

    Raises
    ------
    ValueError
        If the input is not Hermitian or not positive definite.
    """
    A = _as_square_complex(A)
    chk = _is_hpd(A)
    if chk is None:
        raise ValueError("input must be Hermitian positive definite")
    w, _ = chk
    lmin, lmax = float(w[0]), float(w[-1])
    return AngleRadians.from_cos(2.0 * math.sqrt(lmin * lmax) / (lmin + lmax))


def _hpd_witness(w: np.ndarray, V: np.ndarray) -> np.ndarray:
    # optimal mixture of the extreme eigenvectors: weights lmax, lmin
    lmin, lmax = w[0], w[-1]
    x = math.sqrt(lmax / (lmin + lmax)) * V[:, 0] + math.sqrt(lmin / (lmin + lmax)) * V[:, -1]
    return canonical_witness(x)


# --------------------------------------------------------------------------
# multi-start Riemannian descent

def _structured_starts(A: np.ndarray, opts: AngleSolverOptions, rng) -> np.ndarray:
    n = A.shape[0]
    starts = []
    _, EV = np.linalg.eig(A)
    for i in range(n):
        starts.append(EV[:, i])
    U, _, Vh = np.linalg.svd(A)
    for i in range(n):
        starts.append(Vh[i].conj())
        starts.append(U[:, i])
    phases = np.exp(1j * np.linspace(0.0, 2.0 * np.pi, opts.phase_grid, endpoint=False))
    for i in range(n):
        for j in range(i + 1, n):
            for ph in phases:
                starts.append(EV[:, i] + ph * EV[:, j])
    if opts.random_starts:
        X = rng.standard_normal((opts.random_starts, n)) + 1j * rng.standard_normal((opts.random_starts, n))
        starts.extend(X)
    S = np.asarray(starts)
    norms = np.linalg.norm(S, axis=1)
    S = S[norms > 0] / norms[norms > 0, None]
    return S


def _descend(A, H, G, x0, kernel_tol, tol, max_iters):
    """Armijo backtracking descent of the cosine ratio on the unit sphere."""
    x = x0 / np.linalg.norm(x0)
    alpha = 0.1
    converged = False
    iters = 0
    for iters in range(1, max_iters + 1):
        Ax = A @ x
        g = float((Ax.conj() @ Ax).real)
        if g <= kernel_tol ** 2:
            break
        h = float((x.conj() @ Ax).real)
        f = h / math.sqrt(g)
        egrad = (H @ x) / math.sqrt(g) - (h / (2.0 * g ** 1.5)) * (G @ x)
        rgrad = egrad - float((x.conj() @ egrad).real) * x
        gn = float(np.linalg.norm(rgrad))
        if gn < tol:
            converged = True
            break
        stepped = False
        for _ in range(40):
            xn = x - alpha * rgrad
            xn = xn / np.linalg.norm(xn)
            Axn = A @ xn
            gn2 = float((Axn.conj() @ Axn).real)
            if gn2 > kernel_tol ** 2:
                fn = float((xn.conj() @ Axn).real) / math.sqrt(gn2)
                if fn <= f - 1e-4 * alpha * gn * gn and math.isfinite(fn):
                    x = xn
                    alpha = min(alpha * 1.5, 1e3)
                    stepped = True
                    break
            alpha *= 0.5
        if not stepped:
            converged = gn < max(tol, 1e-6)
            break
    return x, converged, iters


def matrix_singular_angle(A, opts: AngleSolverOptions | None = None) -> AngleResult:
    """Best-found singular angle of a nonzero complex square matrix.

    Multi-start search: structured starts (eigenvectors, singular vectors,
    pairwise eigenvector mixtures over a phase grid) plus seeded random
    starts, each refined by projected-gradient descent on the unit sphere
    with backtracking until the Riemannian gradient norm drops below
    ``opts.tol``.  Directions with ``|Ax|`` under ``opts.kernel_tol`` are
    excluded.

    Because local search can only under-estimate the infimum gap, the
    reported angle is a lower bound on the true singular angle -- except
    for Hermitian positive definite inputs, which take an exact closed
    form (see ``opts.use_hpd_closed_form``).

    Returns
    -------
    AngleResult
        Angle, canonical witness, attained cosine, convergence flag (when
        False the best value found within ``max_iters`` is reported),
        iteration count of the best start, method label and seed.

    Raises
    ------
    ValueError
        If the matrix is zero.
    """
    A = _as_square_complex(A)
    opts = opts or AngleSolverOptions()
    scale = _spectral_norm(A)
    if scale == 0.0:
        raise ValueError("the singular angle of the zero matrix is undefined")
    kernel_tol = opts.kernel_tol if opts.kernel_tol is not None else 1e-10 * scale

    if opts.use_hpd_closed_form:
        chk = _is_hpd(A)
        if chk is not None:
            w, V = chk
            lmin, lmax = float(w[0]), float(w[-1])
            cosv = 2.0 * math.sqrt(lmin * lmax) / (lmin + lmax)
            return AngleResult(
                angle=AngleRadians.from_cos(cosv),
                witness=_hpd_witness(w, V),
                cos_value=min(1.0, cosv),
                converged=True,
                iterations=0,
                method="hpd-closed-form",
                seed=opts.seed,
            )

    H, G = _hg_forms(A)
    rng = np.random.default_rng(opts.seed)
    starts = _structured_starts(A, opts, rng)
    ratios = _cos_ratios(A, starts, kernel_tol)
    order = np.argsort(ratios)

    candidates = []
    any_converged = False
    best_iters = 0
    polished = 0
    for idx in order:
        if polished >= opts.polish_starts or not math.isfinite(ratios[idx]):
            break
        polished += 1
        x, conv, iters = _descend(A, H, G, starts[idx], kernel_tol, opts.tol, opts.max_iters)
        r = _cos_ratios(A, x[None, :], kernel_tol)[0]
        if math.isfinite(r):
            candidates.append((float(r), canonical_witness(x), conv, iters))
    if not candidates:
        raise ValueError("no admissible direction found outside the kernel")

    best_val = min(c[0] for c in candidates)
    near = [c for c in candidates if c[0] <= best_val + opts.tie_tol]
    # deterministic output: ties resolve to the lexicographically smallest witness
    best = min(near, key=lambda c: _lexi_key(c[1]))
    any_converged = best[2]
    best_iters = best[3]
    cosv = min(1.0, max(-1.0, best[0]))
    return AngleResult(
        angle=AngleRadians.from_cos(cosv),
        witness=best[1],
        cos_value=cosv,
        converged=any_converged,
        iterations=best_iters,
        method="multistart-descent",
        seed=opts.seed,
    )


# --------------------------------------------------------------------------
# normalized numerical range and eigenvalue angles

def normalized_numerical_range(A, count: int = 2000, seed: int = 42,
                               kernel_tol: float | None = None) -> list[NormalizedRangeSample]:
    """Seeded samples ``z = x*Ax/(|x||Ax|)`` of the normalized numerical range.

    The sample set always contains structured witnesses (eigenvectors,
    singular vectors, and two-eigenvector mixtures on a phase grid) plus
    ``count`` seeded random unit vectors.  Every sample lies in the closed
    unit disk; samples at eigenvectors land on the unit circle at
    ``lambda/|lambda|``.

    Raises
    ------
    ValueError
        For a zero matrix or ``count < 1``.
    """
    A = _as_square_complex(A)
    if count < 1:
        raise ValueError("count must be at least 1")
    scale = _spectral_norm(A)
    if scale == 0.0:
        raise ValueError("the normalized numerical range of the zero matrix is empty")
    ktol = kernel_tol if kernel_tol is not None else _default_kernel_tol(A)
    n = A.shape[0]
    rng = np.random.default_rng(seed)

    opts = AngleSolverOptions(seed=seed, random_starts=0)
    X = _structured_starts(A, opts, rng)
    R = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    R /= np.linalg.norm(R, axis=1, keepdims=True)
    X = np.vstack([X, R])

    AX = X @ A.T
    num = np.einsum("ki,ki->k", X.conj(), AX)
    g = np.einsum("ki,ki->k", AX.conj(), AX).real
    ok = g > ktol ** 2
    samples = []
    for x, z, gg in zip(X[ok], num[ok], g[ok]):
        samples.append(NormalizedRangeSample(point=complex(z / math.sqrt(gg)),
                                             witness=canonical_witness(x)))
    return samples


def eigen_angles(A, kernel_tol: float | None = None) -> list[AngleRadians]:
    """Absolute angles ``|arg(lambda_i)|`` of the nonzero eigenvalues.

    Eigenvalues with magnitude below ``kernel_tol`` are skipped (their
    angle is undefined).  Each returned angle is a lower bound on the
    matrix singular angle.
    """
    A = _as_square_complex(A)
    if _spectral_norm(A) == 0.0:
        raise ValueError("zero matrix")
    ktol = kernel_tol if kernel_tol is not None else _default_kernel_tol(A)
    out = []
    for lam in np.linalg.eigvals(A):
        if abs(lam) > ktol:
            out.append(AngleRadians(abs(math.atan2(lam.imag, lam.real))))
    return out


# --------------------------------------------------------------------------
# support-line sweep of the joint range of (Re(x*Ax), |Ax|^2)
#
# The set Omega = {(x*Hx, x*Gx) : |x| = 1} is a compact convex subset of the
# plane (joint numerical range of two Hermitian forms), and
# cos theta(A) = min { h / sqrt(g) : (h, g) in Omega, g > 0 }.
# The objective has no interior critical points, so the minimum sits on the
# boundary, which a support sweep  max_x x*(cos(phi) H + sin(phi) G)x
# parameterizes exactly.

def _support_points(H, G, phis):
    """Boundary support points of Omega for an array of direction angles."""
    M = np.cos(phis)[..., None, None] * H + np.sin(phis)[..., None, None] * G
    w, V = np.linalg.eigh(M)
    v = V[..., -1]
    h = np.einsum("...i,ij,...j->...", v.conj(), H, v).real
    g = np.einsum("...i,ij,...j->...", v.conj(), G, v).real
    return h, g, w[..., -1]


def _chord_min(h1, g1, h2, g2, g_floor):
    """Minimum of h/sqrt(g) over the segment between two attained points.

    Any chord of the convex set Omega stays inside Omega, so chord values
    are attained by actual directions and give valid lower bounds on the
    angle's cosine side.
    """
    best = np.inf
    for hh, gg in ((h1, g1), (h2, g2)):
        if gg > g_floor:
            best = min(best, hh / math.sqrt(gg))
    dh, dg = h2 - h1, g2 - g1
    denom = dh * dg
    if denom != 0.0:
        s = (h1 * dg - 2.0 * dh * g1) / denom
        if 0.0 < s < 1.0:
            hm, gm = h1 + s * dh, g1 + s * dg
            if gm > g_floor:
                best = min(best, hm / math.sqrt(gm))
    return best


def _boundary_min_ratio(H, G, g_floor, sweep=192, refine_rounds=30):
    """Attained-side minimum of h/sqrt(g) via sweep + chord + local bisection."""
    phis = np.linspace(np.pi / 2, 3 * np.pi / 2, sweep)
    h, g, _ = _support_points(H, G, phis)
    chords = np.array([_chord_min(h[i], g[i], h[i + 1], g[i + 1], g_floor)
                       for i in range(sweep - 1)])
    if not np.any(np.isfinite(chords)):
        return np.inf
    k = int(np.argmin(chords))
    best = float(chords[k])
    lo = phis[max(k - 1, 0)]
    hi = phis[min(k + 2, sweep - 1)]
    for _ in range(refine_rounds):
        mids = np.linspace(lo, hi, 5)
        hm, gm, _ = _support_points(H, G, mids)
        vals = [_chord_min(hm[i], gm[i], hm[i + 1], gm[i + 1], g_floor) for i in range(4)]
        j = int(np.argmin(vals))
        best = min(best, float(vals[j]))
        lo, hi = mids[max(j - 1, 0)], mids[min(j + 2, 4)]
    return best


def dense_angle_oracle(A, samples: int = 100_000, seed: int = 0,
                       kernel_tol: float | None = None,
                       sweep: int = 192, refine_rounds: int = 30) -> AngleRadians:
    """Independent estimate of the singular angle for small matrices.

    Combines dense random sampling of the complex unit sphere with
    structured directions (eigenvectors, singular vectors) and the
    support-sweep/chord construction on the planar joint range.  All
    ingredients produce attained cosine values, so the result is a lower
    bound on the true angle that converges rapidly with the sweep
    resolution.  Intended as a test-time reference at small dimension; it
    shares no code path with the multi-start descent solver.
    """
    A = _as_square_complex(A)
    scale = _spectral_norm(A)
    if scale == 0.0:
        raise ValueError("zero matrix")
    ktol = kernel_tol if kernel_tol is not None else 1e-10 * scale
    n = A.shape[0]
    rng = np.random.default_rng(seed)

    best = np.inf
    _, EV = np.linalg.eig(A)
    U, _, Vh = np.linalg.svd(A)
    cand = np.vstack([EV.T, Vh.conj(), U.T])
    r = _cos_ratios(A, cand, ktol)
    if np.any(np.isfinite(r)):
        best = min(best, float(np.min(r[np.isfinite(r)])))

    chunk = 200_000
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        X = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
        r = _cos_ratios(A, X, ktol)
        finite = r[np.isfinite(r)]
        if finite.size:
            best = min(best, float(np.min(finite)))
        done += m

    H, G = _hg_forms(A)
    best = min(best, _boundary_min_ratio(H, G, ktol ** 2, sweep, refine_rounds))
    return AngleRadians.from_cos(best if math.isfinite(best) else 1.0)


def dense_angle_oracle_batch(As, seed: int = 0, samples: int = 96,
                             sweep: int = 64, refine_rounds: int = 26) -> np.ndarray:
    """Vectorized :func:`dense_angle_oracle` over a stack of matrices.

    ``As`` has shape (B, n, n); returns a (B,) array of angles in radians.
    Designed for the randomized soundness sweeps, where tens of thousands
    of small matrices must be processed in seconds.
    """
    As = np.asarray(As, dtype=complex)
    B, n, _ = As.shape
    rng = np.random.default_rng(seed)
    scales = np.linalg.norm(As, axis=(1, 2))  # Frobenius upper-bounds sigma_max scale-wise
    if np.any(scales == 0):
        raise ValueError("zero matrix in batch")
    g_floors = (1e-10 * scales) ** 2

    H = (As + np.conj(np.swapaxes(As, 1, 2))) / 2.0
    G = np.einsum("bji,bjk->bik", As.conj(), As)

    best = np.full(B, np.inf)

    def absorb(X):
        """X: (B, K, n) candidate directions."""
        AX = np.einsum("bij,bkj->bki", As, X)
        h = np.einsum("bki,bki->bk", X.conj(), AX).real
        g = np.einsum("bki,bki->bk", AX.conj(), AX).real
        n2 = np.einsum("bki,bki->bk", X.conj(), X).real
        ok = (g > g_floors[:, None] * np.maximum(n2, 1e-300)) & (n2 > 0)
        r = np.where(ok, h / np.sqrt(np.maximum(g * n2, 1e-300)), np.inf)
        np.minimum(best, r.min(axis=1), out=best)

    _, EV = np.linalg.eig(As)
    absorb(np.swapaxes(EV, 1, 2))
    U, _, Vh = np.linalg.svd(As)
    absorb(Vh.conj())
    absorb(np.swapaxes(U, 1, 2))
    X = rng.standard_normal((B, samples, n)) + 1j * rng.standard_normal((B, samples, n))
    absorb(X)

    # support sweep with chord minima over consecutive boundary points
    phis = np.linspace(np.pi / 2, 3 * np.pi / 2, sweep)

    def supports(phi_bk):
        """phi_bk: (B, K) angles -> boundary (h, g) arrays of shape (B, K)."""
        M = (np.cos(phi_bk)[..., None, None] * H[:, None]
             + np.sin(phi_bk)[..., None, None] * G[:, None])
        _, V = np.linalg.eigh(M)
        v = V[..., -1]
        h = np.einsum("bki,bkij,bkj->bk", v.conj(), np.broadcast_to(H[:, None], M.shape), v).real
        g = np.einsum("bki,bkij,bkj->bk", v.conj(), np.broadcast_to(G[:, None], M.shape), v).real
        return h, g

    def chord_mins(h, g):
        """Vectorized minimum of the ratio over consecutive-point chords."""
        h1, h2 = h[:, :-1], h[:, 1:]
        g1, g2 = g[:, :-1], g[:, 1:]
        vals = np.full(h1.shape, np.inf)
        for hh, gg in ((h1, g1), (h2, g2)):
            ok = gg > g_floors[:, None]
            vals = np.minimum(vals, np.where(ok, hh / np.sqrt(np.maximum(gg, 1e-300)), np.inf))
        dh, dg = h2 - h1, g2 - g1
        denom = dh * dg
        with np.errstate(divide="ignore", invalid="ignore"):
            s = (h1 * dg - 2.0 * dh * g1) / denom
            hm, gm = h1 + s * dh, g1 + s * dg
            inner = (denom != 0) & (s > 0) & (s < 1) & (gm > g_floors[:, None])
            vals = np.minimum(vals, np.where(inner, hm / np.sqrt(np.maximum(gm, 1e-300)), np.inf))
        return vals

    h, g = supports(np.broadcast_to(phis, (B, sweep)))
    vals = chord_mins(h, g)
    np.minimum(best, vals.min(axis=1), out=best)

    k = np.argmin(vals, axis=1)
    lo = phis[np.maximum(k - 1, 0)]
    hi = phis[np.minimum(k + 2, sweep - 1)]
    for _ in range(refine_rounds):
        mids = lo[:, None] + (hi - lo)[:, None] * np.linspace(0.0, 1.0, 5)
        hm, gm = supports(mids)
        vv = chord_mins(hm, gm)
        np.minimum(best, vv.min(axis=1), out=best)
        j = np.argmin(vv, axis=1)
        new_lo = np.take_along_axis(mids, np.maximum(j - 1, 0)[:, None], axis=1)[:, 0]
        new_hi = np.take_along_axis(mids, np.minimum(j + 2, 4)[:, None], axis=1)[:, 0]
        lo, hi = new_lo, new_hi

    return np.arccos(np.clip(best, -1.0, 1.0))


# --------------------------------------------------------------------------
# certified over-approximation via an outer polygon

def _outer_polygon_min(phis, support, g_floor):
    """Minimum of h/sqrt(g) over the outer polygon of the support lines.

    Returns the minimum and the index of the support line whose
    neighborhood produced it, so refinement can target that direction.
    Candidates: polygon vertices (consecutive-line intersections), edge
    interior critical points, and edge crossings of the kernel floor.
    """
    c, s = np.cos(phis), np.sin(phis)
    c2, s2 = np.roll(c, -1), np.roll(s, -1)
    sup2 = np.roll(support, -1)
    det = c * s2 - s * c2
    hv = (support * s2 - s * sup2) / det
    gv = (c * sup2 - support * c2) / det

    best = np.inf
    best_k = 0
    ok = gv > g_floor
    if np.any(ok):
        vals = np.where(ok, hv / np.sqrt(np.where(ok, gv, 1.0)), np.inf)
        k = int(np.argmin(vals))
        best, best_k = float(vals[k]), k

    h1, g1 = hv, gv
    h2, g2 = np.roll(hv, -1), np.roll(gv, -1)
    dh, dg = h2 - h1, g2 - g1
    denom = dh * dg
    with np.errstate(divide="ignore", invalid="ignore"):
        sc = (h1 * dg - 2.0 * dh * g1) / denom
        hm, gm = h1 + sc * dh, g1 + sc * dg
        inner = (denom != 0) & (sc > 0) & (sc < 1) & (gm > g_floor)
        if np.any(inner):
            vals = np.where(inner, hm / np.sqrt(np.where(inner, gm, 1.0)), np.inf)
            k = int(np.argmin(vals))
            if vals[k] < best:
                best, best_k = float(vals[k]), k
        tc = (g_floor - g1) / np.where(dg == 0, np.inf, dg)
        crossing = (tc > 0) & (tc < 1)
        if np.any(crossing):
            hc = np.where(crossing, h1 + tc * dh, np.inf)
            vals = hc / math.sqrt(g_floor)
            k = int(np.argmin(vals))
            if vals[k] < best:
                best, best_k = float(vals[k]), k
    return best, best_k


def certified_angle_upper_bound(A, resolution: int = 256, refine_rounds: int = 18,
                                kernel_tol: float | None = None) -> AngleRadians:
    """Certified upper bound on the singular angle of a nonzero matrix.

    Support values ``max_x x*(cos(phi) H + sin(phi) G)x`` bound the planar
    joint range by an outer polygon; minimizing ``h/sqrt(g)`` over that
    polygon (restricted to ``g`` above the kernel floor) under-estimates
    the true minimum cosine and hence over-estimates the angle.  Each
    refinement round inserts support directions around the active minimum,
    shaving off the polygon wedge there, so conservatism drops geometrically
    while the bound stays on the safe side throughout.  Support values are
    inflated by an eigensolver-accuracy allowance.
    """
    A = _as_square_complex(A)
    scale = _spectral_norm(A)
    if scale == 0.0:
        raise ValueError("zero matrix")
    ktol = kernel_tol if kernel_tol is not None else 1e-10 * scale
    g_floor = ktol ** 2
    H, G = _hg_forms(A)
    inflation = 1e-10 * (np.linalg.norm(H) + np.linalg.norm(G))
    # directions closer than this make consecutive support lines nearly
    # parallel, amplifying eigensolver noise in the vertex arithmetic
    min_gap = 5e-5

    def support_values(angles):
        M = np.cos(angles)[:, None, None] * H + np.sin(angles)[:, None, None] * G
        return np.linalg.eigvalsh(M)[:, -1] + inflation

    phis = np.linspace(0.0, 2.0 * np.pi, resolution, endpoint=False)
    support = support_values(phis)

    for _ in range(refine_rounds):
        _, k = _outer_polygon_min(phis, support, g_floor)
        lo = phis[k]
        hi = phis[(k + 2) % phis.size]
        if hi <= lo:
            hi += 2.0 * np.pi
        if hi - lo < 4.0 * min_gap:
            break
        inserts = np.mod(lo + (hi - lo) * np.array([0.2, 0.4, 0.6, 0.8]), 2.0 * np.pi)
        gaps = np.min(np.abs(inserts[:, None] - phis[None, :]), axis=1)
        inserts = inserts[gaps > min_gap]
        if inserts.size == 0:
            break
        merged = np.unique(np.concatenate([phis, inserts]))
        new_mask = ~np.isin(merged, phis)
        new_support = np.empty(merged.size)
        new_support[~new_mask] = support[np.searchsorted(phis, merged[~new_mask])]
        new_support[new_mask] = support_values(merged[new_mask])
        phis, support = merged, new_support

    best, _ = _outer_polygon_min(phis, support, g_floor)
    return AngleRadians.from_cos(best if math.isfinite(best) else 1.0)


def matrix_small_angle_check(A, B, margin: float = 0.0, resolution: int = 512,
                             opts: AngleSolverOptions | None = None) -> StabilityCertificate:
    """Certify ``det(I + B A) != 0`` when certified angle bounds sum below pi.

    Both angles are over-approximated by :func:`certified_angle_upper_bound`
    so the verdict is conservative: ``certified`` means the true angles also
    sum below ``pi``, which rules out a singular ``I + B A``.  The absolute
    determinant is reported as a sanity side-channel; it plays no part in
    the verdict.

    Raises
    ------
    ValueError
        On a size mismatch or a zero operand.
    """
    A = _as_square_complex(A)
    B = _as_square_complex(B)
    if A.shape != B.shape:
        raise ValueError(f"size mismatch: {A.shape} vs {B.shape}")
    opts = opts or AngleSolverOptions()
    theta_a = certified_angle_upper_bound(A, resolution=resolution)
    theta_b = certified_angle_upper_bound(B, resolution=resolution)
    total = theta_a.value + theta_b.value
    angle_margin = math.pi - total
    certified = angle_margin > margin and angle_margin > 0.0
    det_abs = float(abs(np.linalg.det(np.eye(A.shape[0]) + B @ A)))
    return StabilityCertificate(
        verdict=Verdict.CERTIFIED if certified else Verdict.INCONCLUSIVE,
        method="thm2",
        margin=angle_margin,
        witnesses={
            "theta_a_rad": theta_a.value,
            "theta_b_rad": theta_b.value,
            "angle_bound_kind": "certified-over-approx",
            "resolution": resolution,
            "margin_required": margin,
            "det_abs": det_abs,
        },
        inputs_digest=inputs_digest(A, B, "thm2"),
        seed=opts.seed,
    )


# --------------------------------------------------------------------------
# JSON / CSV interchange

def matrix_from_json_dict(data: dict) -> np.ndarray:
    """Parse ``{"n": n, "entries": [[[re, im], ...], ...]}`` row-major."""
    try:
        n = int(data["n"])
        entries = data["entries"]
        A = np.array([[complex(cell[0], cell[1]) for cell in row] for row in entries],
                     dtype=complex)
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed matrix JSON: {exc}") from exc
    if A.shape != (n, n):
        raise ValueError(f"matrix JSON declares n={n} but entries have shape {A.shape}")
    return A


def matrix_to_json_dict(A) -> dict:
    A = _as_square_complex(A)
    return {
        "n": A.shape[0],
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in A],
    }


def load_matrix_json(path) -> np.ndarray:
    with open(path) as fh:
        return matrix_from_json_dict(json.load(fh))


def save_matrix_json(path, A) -> None:
    with open(path, "w") as fh:
        json.dump(matrix_to_json_dict(A), fh, indent=2)


def write_wn_csv(path, samples: list[NormalizedRangeSample]) -> None:
    """Emit normalized-numerical-range samples as CSV with columns ``re, im``."""
    with open(path, "w", newline="") as fh:
        fh.write("re,im\n")
        for s in samples:
            fh.write(f"{s.point.real:.9g},{s.point.imag:.9g}\n")
