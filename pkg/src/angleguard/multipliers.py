"""Multiplier operators: stable LTI weights that reshape signal angles.

A multiplier is a linear bounded operator inserted on both sides of a
feedback loop to rotate angles into a certifiable configuration.  Here a
multiplier is realized by a stable LTI system applied to sampled signals
through zero-order-hold discretization.  Invertibility (in the bounded,
possibly noncausal sense: response magnitude bounded away from zero along
the imaginary axis) and unitarity (norm preservation) are *claims* that
can be checked -- see :func:`check_invertibility_on_grid` and
:func:`check_unitary_on_probes` -- not assumptions baked into the type.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lti_systems import (
    FrequencyGrid,
    LtiSystem,
    discretize_zoh,
    freq_response,
    is_stable,
    simulate_discretized,
)
from .signal_core import AngleRadians, DiscreteSignal, l2_norm, signal_angle

__all__ = [
    "MultiplierOperator",
    "generalized_signal_angle",
    "check_invertibility_on_grid",
    "check_unitary_on_probes",
]


@dataclass(frozen=True)
class MultiplierOperator:
    """A stable LTI realization declared invertible with bounded inverse.

    ``unitary_flag`` claims the operator preserves signal norms; the claim
    is testable on probe signals, and the multiplier small-angle rule
    demands it for the first multiplier.
    """

    realization: LtiSystem
    unitary_flag: bool = False

    def __post_init__(self):
        if not is_stable(self.realization):
            raise ValueError("multiplier realization must be stable")

    @staticmethod
    def identity(dim: int = 1) -> "MultiplierOperator":
        return MultiplierOperator(LtiSystem.static_gain(np.eye(dim)), unitary_flag=True)

    @property
    def dim(self) -> int:
        return self.realization.n

    def apply(self, u: DiscreteSignal) -> DiscreteSignal:
        """Run the realization over the signal (zero-order hold, zero state).

        A SISO realization broadcasts over the channels of a vector
        signal; otherwise dimensions must match.
        """
        sysdim = self.realization.n
        if sysdim not in (1, u.dim) and u.dim != sysdim:
            raise ValueError(f"multiplier dim {sysdim} does not fit signal dim {u.dim}")
        Ad, Bd, C, D = discretize_zoh(self.realization, u.sample_period)
        if sysdim == u.dim:
            out = simulate_discretized(Ad, Bd, C, D, u.samples)
        else:
            cols = [simulate_discretized(Ad, Bd, C, D, u.samples[:, [j]])[:, 0]
                    for j in range(u.dim)]
            out = np.column_stack(cols)
        return u.with_samples(out)

    def __call__(self, u: DiscreteSignal) -> DiscreteSignal:
        return self.apply(u)


def generalized_signal_angle(u: DiscreteSignal, v: DiscreteSignal,
                             m1: MultiplierOperator, m2: MultiplierOperator) -> AngleRadians:
    """Angle between ``M1 u`` and ``M2 v``.

    With both multipliers equal to the identity this reduces to the plain
    signal angle, and any positive scalar multiplier leaves the angle
    unchanged.  Zero signals take the 0-angle default of
    :func:`angleguard.signal_core.signal_angle`.
    """
    return signal_angle(m1.apply(u), m2.apply(v))


def check_invertibility_on_grid(m: MultiplierOperator, grid: FrequencyGrid | None = None,
                                tol: float = 1e-6) -> bool:
    """Verify the bounded-inverse claim: smallest response singular value
    stays above ``tol`` across the grid (and at 0/infinity when flagged)."""
    grid = grid or FrequencyGrid.default(count=200)
    omegas = list(grid.points)
    if grid.include_zero:
        omegas.append(0.0)
    if grid.include_infinity:
        omegas.append(float("inf"))
    for w in omegas:
        M = freq_response(m.realization, w)
        if np.linalg.svd(M, compute_uv=False)[-1] <= tol:
            return False
    return True


def check_unitary_on_probes(m: MultiplierOperator, probes, rel_tol: float = 0.05) -> bool:
    """Test the norm-preservation claim ``||M u|| == ||u||`` on probe signals.

    Discretization makes the check approximate: the tolerance must absorb
    zero-order-hold error at the probe bandwidths.
    """
    for u in probes:
        nu = l2_norm(u)
        if nu == 0.0:
            continue
        if abs(l2_norm(m.apply(u)) - nu) > rel_tol * nu:
            return False
    return True
