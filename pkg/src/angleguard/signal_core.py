"""Discrete-time surrogate of the causal finite-energy signal space.

Signals are uniformly sampled real vector-valued sequences supported on
``t >= 0`` and implicitly zero outside their sample range.  Inner products
and norms use rectangle-rule quadrature ``h * sum_k <u_k, v_k>``, which is
exact for the piecewise-constant signal class this toolkit manipulates and
keeps the Cauchy-Schwarz inequality exact between the norm and the inner
product.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AngleRadians",
    "DiscreteSignal",
    "inner_product",
    "l2_norm",
    "truncate",
    "signal_angle",
    "angle_between",
    "load_signal_csv",
    "save_signal_csv",
]


@dataclass(frozen=True)
class AngleRadians:
    """An angle in radians, constrained to ``[0, pi]``.

    Carries the semantics of an angle between signals, between vectors,
    or of an operator: values outside ``[0, pi]`` are rejected at
    construction.
    """

    value: float

    def __post_init__(self):
        v = float(self.value)
        if not math.isfinite(v) or v < 0.0 or v > math.pi:
            raise ValueError(f"angle must lie in [0, pi], got {self.value!r}")
        object.__setattr__(self, "value", v)

    @property
    def degrees(self) -> float:
        return math.degrees(self.value)

    def __float__(self) -> float:
        return self.value

    @staticmethod
    def from_cos(cos_value: float) -> "AngleRadians":
        """Angle from a cosine, clamped to ``[-1, 1]`` to absorb rounding."""
        return AngleRadians(math.acos(min(1.0, max(-1.0, float(cos_value)))))


@dataclass(frozen=True)
class DiscreteSignal:
    """Uniformly sampled real vector-valued signal supported on ``t >= 0``.

    Parameters
    ----------
    samples : (m, n) array_like
        ``samples[k]`` is the signal value at ``t = k * sample_period``.
        A 1-D array of length m is interpreted as ``(m, 1)``.
    sample_period : float
        Positive sample spacing ``h`` in seconds.

    Notes
    -----
    The signal is implicitly zero outside its sample range, so two signals
    of different lengths differ only by trailing zeros.  Instances are
    immutable; the sample array is copied and marked read-only.
    """

    samples: np.ndarray
    sample_period: float
    dim: int = field(init=False)

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise ValueError("samples must be a nonempty (m, n) array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        h = float(self.sample_period)
        if not (math.isfinite(h) and h > 0.0):
            raise ValueError(f"sample_period must be positive, got {self.sample_period!r}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "sample_period", h)
        object.__setattr__(self, "dim", arr.shape[1])

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def times(self) -> np.ndarray:
        """Sample instants ``k * h`` for ``k = 0 .. m-1``."""
        return np.arange(len(self)) * self.sample_period

    @property
    def duration(self) -> float:
        """Time of the last sample."""
        return (len(self) - 1) * self.sample_period

    def is_zero(self) -> bool:
        return not np.any(self.samples)

    def with_samples(self, samples: np.ndarray) -> "DiscreteSignal":
        """New signal on the same time base."""
        return DiscreteSignal(samples, self.sample_period)


def _periods_match(u: DiscreteSignal, v: DiscreteSignal) -> None:
    if u.dim != v.dim:
        raise ValueError(f"dimension mismatch: {u.dim} vs {v.dim}")
    hu, hv = u.sample_period, v.sample_period
    if abs(hu - hv) > 1e-12 * max(hu, hv):
        raise ValueError(f"sample_period mismatch: {hu} vs {hv}")


def _aligned(u: DiscreteSignal, v: DiscreteSignal):
    """Zero-extend the shorter sample array so both cover the same range."""
    a, b = u.samples, v.samples
    m = max(a.shape[0], b.shape[0])
    if a.shape[0] < m:
        a = np.vstack([a, np.zeros((m - a.shape[0], a.shape[1]))])
    if b.shape[0] < m:
        b = np.vstack([b, np.zeros((m - b.shape[0], b.shape[1]))])
    return a, b


def inner_product(u: DiscreteSignal, v: DiscreteSignal) -> float:
    """Energy inner product ``h * sum_k <u_k, v_k>``.

    The shorter signal is zero-extended.  Symmetric and bilinear; together
    with :func:`l2_norm` it satisfies Cauchy-Schwarz exactly because both
    use the same rectangle-rule quadrature.

    Raises
    ------
    ValueError
        On dimension or sample-period mismatch.
    """
    _periods_match(u, v)
    a, b = _aligned(u, v)
    return u.sample_period * float(np.einsum("ij,ij->", a, b))


def l2_norm(u: DiscreteSignal) -> float:
    """Energy norm ``sqrt(inner_product(u, u))``; zero iff all samples are zero."""
    a = u.samples
    return math.sqrt(u.sample_period * float(np.einsum("ij,ij->", a, a)))


def truncate(u: DiscreteSignal, T: float) -> DiscreteSignal:
    """Keep samples at times ``t <= T`` and zero all later ones.

    Idempotent; the norm of the result is nondecreasing in ``T``.  A small
    relative tolerance keeps sample instants that land on ``T`` up to
    floating-point jitter.

    Raises
    ------
    ValueError
        If ``T`` is negative.
    """
    T = float(T)
    if not (math.isfinite(T) and T >= 0.0):
        raise ValueError(f"truncation time must be nonnegative, got {T!r}")
    kmax = int(math.floor(T / u.sample_period + 1e-9))
    if kmax >= len(u) - 1:
        return u
    out = u.samples.copy()
    out[kmax + 1:] = 0.0
    return u.with_samples(out)


def _cos_between(a: np.ndarray, b: np.ndarray, h: float) -> float | None:
    """Clamped cosine of the angle between aligned sample arrays.

    Returns None when either signal is zero (the angle then defaults to 0).
    """
    ip = h * float(np.einsum("ij,ij->", a, b))
    na = math.sqrt(h * float(np.einsum("ij,ij->", a, a)))
    nb = math.sqrt(h * float(np.einsum("ij,ij->", b, b)))
    if na == 0.0 or nb == 0.0:
        return None
    return min(1.0, max(-1.0, ip / (na * nb)))


def signal_angle(u: DiscreteSignal, v: DiscreteSignal) -> AngleRadians:
    """Angle in ``[0, pi]`` between two signals.

    ``arccos`` of the normalized inner product, with the ratio clamped to
    ``[-1, 1]`` to absorb rounding at the parallel/antiparallel extremes.
    Returns 0 when either signal is zero (defined convention, not an
    error).

    The result is a pseudometric on nonzero signals: symmetric, zero iff
    one signal is a positive multiple of the other, and satisfying the
    triangle inequality ``angle(u, w) <= angle(u, v) + angle(v, w)``.
    """
    _periods_match(u, v)
    a, b = _aligned(u, v)
    c = _cos_between(a, b, u.sample_period)
    if c is None:
        return AngleRadians(0.0)
    return AngleRadians(math.acos(c))


def angle_between(u: DiscreteSignal, v: DiscreteSignal) -> float:
    """Like :func:`signal_angle` but returning a bare float."""
    return signal_angle(u, v).value


def load_signal_csv(path) -> DiscreteSignal:
    """Load a signal from CSV with header ``t, x1, ..., xn``.

    The time column must start at 0 and be uniformly spaced within a
    relative tolerance of 1e-9.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2 or header[0].strip() != "t":
            raise ValueError("expected CSV header 't, x1, ..., xn'")
        rows = [[float(cell) for cell in row] for row in reader if row]
    if len(rows) < 2:
        raise ValueError("need at least two samples to determine the sample period")
    data = np.asarray(rows, dtype=float)
    t = data[:, 0]
    dt = np.diff(t)
    h = float(np.mean(dt))
    if h <= 0:
        raise ValueError("time column must be strictly increasing")
    if np.max(np.abs(dt - h)) > 1e-9 * h:
        raise ValueError("time column is not uniform within 1e-9 relative tolerance")
    if abs(t[0]) > 1e-9 * h:
        raise ValueError("time column must start at t = 0")
    return DiscreteSignal(data[:, 1:], h)


def save_signal_csv(path, u: DiscreteSignal) -> None:
    """Write a signal as CSV with header ``t, x1, ..., xn``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"x{i + 1}" for i in range(u.dim)])
        for t, row in zip(u.times, u.samples):
            writer.writerow([f"{t:.9g}"] + [f"{x:.9g}" for x in row])
