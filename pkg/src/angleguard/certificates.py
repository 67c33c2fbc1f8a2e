"""Small angle theorems as composable certificate rules over angle values.

Every rule consumes angle *bounds* rather than raw systems: the caller is
responsible for supplying angles whose provenance makes the rule sound.
An upper bound on each operator angle lets a strict ``sum < pi``
comparison certify feedback stability; a sampled lower bound can never do
so and is rejected.  Boundary sums exactly equal to ``pi`` are
inconclusive because every stability statement here uses a strict
inequality.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from jsonschema import validate as _jsonschema_validate

from .signal_core import AngleRadians

__all__ = [
    "Provenance",
    "BoundedAngle",
    "Verdict",
    "StabilityCertificate",
    "HypothesisNotMet",
    "nonlinear_small_angle",
    "cyclic_small_angle",
    "multiplier_small_angle",
    "l2e_small_angle",
    "incremental_small_angle",
    "cascade_angle_bound",
    "feedback_angle_closure",
    "CERTIFICATE_SCHEMA",
    "certificate_to_dict",
    "validate_certificate_dict",
    "inputs_digest",
]


class Provenance(str, enum.Enum):
    """How an angle value was obtained, and hence what it can certify."""

    ANALYTIC_UPPER_BOUND = "analytic-upper-bound"
    CERTIFIED_OVER_APPROX = "certified-over-approx"
    SAMPLED_LOWER_BOUND = "sampled-lower-bound"

    @property
    def is_upper_bound(self) -> bool:
        return self is not Provenance.SAMPLED_LOWER_BOUND


@dataclass(frozen=True)
class BoundedAngle:
    """An angle value together with the provenance of the bound."""

    angle: AngleRadians
    provenance: Provenance

    @property
    def value(self) -> float:
        return self.angle.value

    @staticmethod
    def analytic(angle) -> "BoundedAngle":
        return BoundedAngle(_as_angle(angle), Provenance.ANALYTIC_UPPER_BOUND)

    @staticmethod
    def certified(angle) -> "BoundedAngle":
        return BoundedAngle(_as_angle(angle), Provenance.CERTIFIED_OVER_APPROX)

    @staticmethod
    def sampled(angle) -> "BoundedAngle":
        return BoundedAngle(_as_angle(angle), Provenance.SAMPLED_LOWER_BOUND)


def _as_angle(a) -> AngleRadians:
    if isinstance(a, BoundedAngle):
        return a.angle
    if isinstance(a, AngleRadians):
        return a
    return AngleRadians(float(a))


class Verdict(str, enum.Enum):
    CERTIFIED = "certified"
    INCONCLUSIVE = "inconclusive"
    NOT_APPLICABLE = "not-applicable"


class HypothesisNotMet(ValueError):
    """A rule's hypothesis is violated, so its conclusion does not apply."""


@dataclass(frozen=True)
class StabilityCertificate:
    """Outcome of a stability rule: verdict, margin and recompute data.

    ``margin`` is the distance to the rule's threshold (radians for angle
    rules, dimensionless for the secant rule); a certificate may only be
    ``certified`` with a strictly positive margin.  ``witnesses`` holds the
    named values (frequencies, angles, probes, seeds) sufficient to
    recompute the deciding quantity.
    """

    verdict: Verdict
    method: str
    margin: float
    witnesses: dict = field(default_factory=dict)
    inputs_digest: str = ""
    seed: int | None = None

    def __post_init__(self):
        if self.verdict is Verdict.CERTIFIED and not self.margin > 0.0:
            raise ValueError("a certified verdict requires a strictly positive margin")

    @property
    def certified(self) -> bool:
        return self.verdict is Verdict.CERTIFIED


CERTIFICATE_SCHEMA = {
    "type": "object",
    "required": ["verdict", "method", "margin_rad"],
    "properties": {
        "verdict": {"enum": ["certified", "inconclusive", "not-applicable"]},
        "method": {
            "enum": [
                "thm1", "cor1", "thm2", "thm3", "cor2", "cor3",
                "thm4", "cor4", "cor5", "l2e", "secant",
            ]
        },
        "margin_rad": {"type": "number"},
        "critical_omega": {"type": ["number", "string", "null"]},
        "seed": {"type": ["integer", "null"]},
        "witnesses": {"type": "object"},
        "inputs_digest": {"type": "string"},
        "generated_at": {"type": "string"},
    },
    "additionalProperties": False,
}


def _jsonable(x):
    if isinstance(x, (AngleRadians, BoundedAngle)):
        return x.value
    if isinstance(x, Provenance):
        return x.value
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, (np.floating, np.integer)):
        return _jsonable(x.item())
    if isinstance(x, complex):
        return {"re": _jsonable(x.real), "im": _jsonable(x.imag)}
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    return x


def certificate_to_dict(cert: StabilityCertificate) -> dict:
    """JSON-ready dictionary: ``{verdict, margin_rad, critical_omega, method, seed, ...}``."""
    witnesses = _jsonable(cert.witnesses)
    out = {
        "verdict": cert.verdict.value,
        "method": cert.method,
        "margin_rad": _jsonable(float(cert.margin)),
        "critical_omega": witnesses.pop("critical_omega", None),
        "seed": cert.seed,
        "witnesses": witnesses,
        "inputs_digest": cert.inputs_digest,
    }
    return out


def validate_certificate_dict(data: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if the dict violates the schema."""
    _jsonschema_validate(data, CERTIFICATE_SCHEMA)


def inputs_digest(*parts) -> str:
    """Short stable hash of the rule operands, for certificate provenance."""
    hasher = hashlib.sha256()
    for part in parts:
        if isinstance(part, np.ndarray):
            hasher.update(np.ascontiguousarray(part).tobytes())
        else:
            hasher.update(json.dumps(_jsonable(part), sort_keys=True, default=str).encode())
        hasher.update(b"|")
    return hasher.hexdigest()[:16]


def _require_upper_bounds(*angles: BoundedAngle) -> None:
    for a in angles:
        if not isinstance(a, BoundedAngle):
            raise TypeError("rules take BoundedAngle inputs so provenance can be checked")
        if not a.provenance.is_upper_bound:
            raise ValueError(
                "a sampled lower bound cannot certify a strict 'sum < pi' condition; "
                "supply an analytic or certified upper bound"
            )


def _sum_rule(angles: Sequence[BoundedAngle], method: str, extra: dict | None = None,
              seed: int | None = None) -> StabilityCertificate:
    total = sum(a.value for a in angles)
    margin = math.pi - total
    verdict = Verdict.CERTIFIED if margin > 0.0 else Verdict.INCONCLUSIVE
    witnesses = {
        "angle_sum_rad": total,
        "angles_rad": [a.value for a in angles],
        "provenance": [a.provenance.value for a in angles],
    }
    if extra:
        witnesses.update(extra)
    return StabilityCertificate(
        verdict=verdict,
        method=method,
        margin=margin,
        witnesses=witnesses,
        inputs_digest=inputs_digest([a.value for a in angles], method),
        seed=seed,
    )


def nonlinear_small_angle(theta_p: BoundedAngle, theta_c: BoundedAngle, *,
                          loop_convention: str = "e2=0") -> StabilityCertificate:
    """Certify a two-block feedback loop from upper bounds on both angles.

    The loop is certified stable when the angle sum is strictly below
    ``pi``; the margin is ``pi - sum``.  ``loop_convention`` records which
    external input is taken as zero (the same rule applies to both
    single-loop readings).

    Raises
    ------
    ValueError
        If either input carries sampled-lower-bound provenance.
    """
    _require_upper_bounds(theta_p, theta_c)
    if loop_convention not in ("e2=0", "e1=0"):
        raise ValueError("loop_convention must be 'e2=0' or 'e1=0'")
    return _sum_rule([theta_p, theta_c], "thm1", {"loop_convention": loop_convention})


def cyclic_small_angle(thetas: Sequence[BoundedAngle]) -> StabilityCertificate:
    """Certify a cyclic loop of N blocks when the angle sum stays below ``pi``."""
    thetas = list(thetas)
    if not thetas:
        raise ValueError("need at least one angle")
    _require_upper_bounds(*thetas)
    return _sum_rule(thetas, "cor1", {"block_count": len(thetas)})


def multiplier_small_angle(theta_m1m2_p: BoundedAngle, theta_m2m1_c: BoundedAngle,
                           m1_unitary: bool, *, m1_is_identity: bool = False) -> StabilityCertificate:
    """Small angle rule for multiplier-reshaped angles.

    The first multiplier must be unitary (inner-product preserving) for
    the rule to apply; a non-unitary claim yields a ``not-applicable``
    certificate rather than an error.  With the first multiplier equal to
    the identity the rule is recorded under the single-multiplier method
    id ``cor4``.
    """
    _require_upper_bounds(theta_m1m2_p, theta_m2m1_c)
    method = "cor4" if m1_is_identity else "thm4"
    if m1_is_identity:
        m1_unitary = True
    if not m1_unitary:
        return StabilityCertificate(
            verdict=Verdict.NOT_APPLICABLE,
            method=method,
            margin=0.0,
            witnesses={"reason": "first multiplier not unitary"},
            inputs_digest=inputs_digest([theta_m1m2_p.value, theta_m2m1_c.value], method),
        )
    return _sum_rule([theta_m1m2_p, theta_m2m1_c], method)


def l2e_small_angle(theta_e_p: BoundedAngle, theta_e_c: BoundedAngle) -> StabilityCertificate:
    """Small angle rule over truncation-based (extended-space) angles."""
    _require_upper_bounds(theta_e_p, theta_e_c)
    return _sum_rule([theta_e_p, theta_e_c], "l2e")


def incremental_small_angle(theta_i_p: BoundedAngle, theta_i_c: BoundedAngle) -> StabilityCertificate:
    """Small angle rule over incremental angles.

    For linear operators the incremental angle coincides with the standard
    one, so standard-angle upper bounds are valid inputs for linear
    operands.
    """
    _require_upper_bounds(theta_i_p, theta_i_c)
    return _sum_rule([theta_i_p, theta_i_c], "cor5")


def _weaker_provenance(a: Provenance, b: Provenance) -> Provenance:
    order = [Provenance.ANALYTIC_UPPER_BOUND, Provenance.CERTIFIED_OVER_APPROX]
    return a if order.index(a) >= order.index(b) else b


def cascade_angle_bound(theta1: BoundedAngle, theta2: BoundedAngle) -> BoundedAngle:
    """Upper bound on the angle of a two-stage cascade: the clamped sum.

    The angle of a composition never exceeds the sum of the stage angles,
    and angles live in ``[0, pi]``, so the sum is clamped there.
    """
    _require_upper_bounds(theta1, theta2)
    total = min(math.pi, max(0.0, theta1.value + theta2.value))
    return BoundedAngle(AngleRadians(total),
                        _weaker_provenance(theta1.provenance, theta2.provenance))


def feedback_angle_closure(theta_p: BoundedAngle, theta_c: BoundedAngle) -> BoundedAngle:
    """Upper bound on the closed-loop angle: ``max`` of the open-loop bounds.

    Requires the angle sum to be at most ``pi``; when both bounds sit below
    some ``alpha < pi/2`` the closed loop stays below ``alpha`` as a special
    case.

    Raises
    ------
    HypothesisNotMet
        If the angle sum exceeds ``pi`` (the closure bound does not apply).
    """
    _require_upper_bounds(theta_p, theta_c)
    if theta_p.value + theta_c.value > math.pi:
        raise HypothesisNotMet(
            f"closure bound needs angle sum <= pi, got {theta_p.value + theta_c.value:.6f}"
        )
    bigger = max(theta_p.value, theta_c.value)
    return BoundedAngle(AngleRadians(bigger),
                        _weaker_provenance(theta_p.provenance, theta_c.provenance))
