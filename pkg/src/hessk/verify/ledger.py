"""Chain of constants for the structural estimates and the d-concavity inequality."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from ..errors import BadDeltaError
from ..matform import h_bound_constant
from ..sympoly import GammaSchedule


@dataclass(frozen=True)
class ConstantsLedger:
    n: int
    k: int
    delta: float
    gamma_k: float
    C4: float
    C6: float
    C7: float
    C8: float
    C9: float
    C12: float
    mu_k: float
    gamma_k_uniform: float
    C10: float
    C11: float
    delta0: float
    delta1: float
    d: float
    C6_at_zero: float

    @property
    def delta_within_proven_range(self) -> bool:
        return self.delta <= self.delta1

    def to_dict(self) -> dict:
        out = asdict(self)
        out["delta_within_proven_range"] = self.delta_within_proven_range
        return out


def c6(k: int, delta: float) -> float:
    t = 1.0 - delta**2
    return h_bound_constant(k) + k * delta**2 / t**2 + 2 * k / t


def c9(k: int, delta: float) -> float:
    t = 1.0 - delta**2
    return 2 * k * ((1 + (math.sqrt(k) - 1) * delta**2) / t**2 + 1 / (1 + delta**2))


def pair_floor(n: int, k: int, gamma_k: float) -> float:
    """Lower bound on the weight of subsets containing a fixed pair."""
    return (k - 1) * k / ((n - 1) * n) * gamma_k**k


def build_ledger(n: int, k: int, delta: float, sched: GammaSchedule,
                 gamma_uniform: float) -> ConstantsLedger:
    """All constants at a given delta.

    delta = 0 is accepted so the limiting values can be inspected.
    """
    if not 0.0 <= delta < 1.0:
        raise BadDeltaError(f"delta must lie in [0, 1), got {delta}")
    C6 = c6(k, delta)
    C4 = 2 * C6 + 8
    C8 = 1 + C4 * delta
    C9 = c9(k, delta)
    C12 = C9**2 + C8
    mu_k = pair_floor(n, k, sched.gamma_k)
    C11 = min(gamma_uniform, mu_k)
    # a non-positive estimate leaves no proven range
    delta0 = min(0.5, math.sqrt(max(C11, 0.0) / (2 * C4)))
    delta1 = min(delta0, math.sqrt(max(C11, 0.0) / (C4 + 1)))
    return ConstantsLedger(
        n=n, k=k, delta=delta, gamma_k=sched.gamma_k,
        C4=C4, C6=C6, C7=C6, C8=C8, C9=C9, C12=C12,
        mu_k=mu_k, gamma_k_uniform=gamma_uniform, C10=C11 / 2, C11=C11,
        delta0=delta0, delta1=delta1, d=4 * n * C12 * delta**2,
        C6_at_zero=c6(k, 0.0),
    )
