"""Stackelberg fee pricing between a task publisher (leader) and a malicious
executor (follower).

The follower picks a price deviation ``delta`` to maximise

    U2 = exp(-delta) * (P / n + K * delta / n)

and the leader, anticipating ``delta* = (K - P) / K``, picks the fee ``P`` to
maximise

    U1 = a * exp(-delta) - (1 - a) * exp(-delta) * P.

``a`` must lie in [K/(1+K), 2K/(1+2K)] for ``0 <= P* <= K``. Users pass a
normalised weight ``u`` in [0, 1] which :func:`alpha_effective` maps onto that
interval. Payoff functions accept numpy arrays in any numeric field.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InputError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GameParams:
    K: float
    n: int = 1
    P: float = 0.0
    delta: float = 0.0
    u: float | None = None
    alpha_eff: float | None = None

    def __post_init__(self):
        if self.alpha_eff is None and self.u is not None:
            object.__setattr__(self, "alpha_eff", alpha_effective(self.u, self.K))


@dataclass(frozen=True)
class PayoffPair:
    leader: float
    follower: float


@dataclass(frozen=True)
class Equilibrium:
    fee: float
    delta: float
    payoffs: PayoffPair
    alpha_eff: float

    def __iter__(self):
        # Allows ``P, delta, payoffs = equilibrium(...)``.
        return iter((self.fee, self.delta, self.payoffs))


def improper_profit(K: float, X: float, X_mod: float) -> float:
    return K * abs(X - X_mod)


def screening_prob(delta):
    """Probability that a submission deviating by ``delta`` survives filtering."""
    if np.any(np.asarray(delta) < 0):
        raise InputError("delta must be non-negative")
    return np.exp(-np.asarray(delta, dtype=float)) if np.ndim(delta) else math.exp(-delta)


def follower_payoff(g: GameParams):
    if np.any(np.asarray(g.n) < 1):
        raise InputError("n must be at least 1")
    return np.exp(-g.delta) * (g.P / g.n + g.K * g.delta / g.n)


def leader_payoff(g: GameParams):
    a = g.alpha_eff
    if a is None:
        raise InputError("leader_payoff needs alpha_eff (or u)")
    if np.any(np.asarray(a) < 0) or np.any(np.asarray(a) > 1):
        raise InputError("alpha_eff must lie in [0, 1]")
    h = np.exp(-g.delta)
    return a * h + (1 - a) * h * (-g.P)


def payoffs(g: GameParams) -> PayoffPair:
    return PayoffPair(float(leader_payoff(g)), float(follower_payoff(g)))


def follower_best_response(K: float, P: float) -> float:
    """delta* = (K - P) / K; fees above K clamp to 0."""
    if K <= 0:
        raise InputError("K must be positive")
    if P < 0:
        raise InputError("P must be non-negative")
    if P > K:
        warnings.warn(
            f"fee P={P} exceeds K={K}; outside the derivation, clamping delta* to 0",
            RuntimeWarning,
            stacklevel=2,
        )
        return 0.0
    return (K - P) / K


def alpha_bounds(K: float) -> tuple[float, float]:
    return K / (1 + K), 2 * K / (1 + 2 * K)


def scaling(alpha: float, K: float) -> float:
    """Forward scaling map: feasible alpha interval -> [0, 1]."""
    return alpha * (1 + K) * (1 + 2 * K) / K - (1 + 2 * K)


def alpha_effective(u: float, K: float) -> float:
    """Inverse of :func:`scaling`: normalised weight u in [0, 1] -> feasible alpha."""
    if K <= 0:
        raise InputError("K must be positive")
    if not 0.0 <= u <= 1.0:
        raise InputError(f"u must lie in [0, 1], got {u}")
    return K * (u + 1 + 2 * K) / ((1 + K) * (1 + 2 * K))


def fee_from_alpha(alpha: float, K: float) -> float:
    """Leader's stationary point P = (K(a - 1) + a) / (1 - a)."""
    if alpha >= 1:
        raise InputError("alpha must be below 1")
    return (K * (alpha - 1) + alpha) / (1 - alpha)


def recommend_fee(u: float, K: float, literal: bool = False) -> float:
    """Recommended service fee for quality weight ``u`` and quantity ``K``.

    With ``literal=True`` the forward scaling map is substituted directly into
    the fee formula; that composition leaves [0, K] for most inputs, and any
    violation is logged rather than corrected.
    """
    if K <= 0:
        raise InputError("K must be positive")
    if not 0.0 <= u <= 1.0:
        raise InputError(f"u must lie in [0, 1], got {u}")
    if not literal:
        fee = fee_from_alpha(alpha_effective(u, K), K)
        # Endpoints are exact by construction; snap rounding noise.
        return min(max(fee, 0.0), float(K))
    phi = scaling(u, K)
    if phi >= 1:
        raise InputError(f"literal scaling gives {phi} >= 1; fee formula is singular")
    fee = fee_from_alpha(phi, K)
    lo, hi = alpha_bounds(K)
    if not 0 <= fee <= K:
        log.warning("literal fee %.6g outside [0, K=%g] (scaled weight %.6g)", fee, K, phi)
    if not lo <= phi <= hi:
        log.warning("literal scaled weight %.6g outside feasible [%.6g, %.6g]", phi, lo, hi)
    return fee


def equilibrium(u: float, K: float, n: int = 1) -> Equilibrium:
    fee = recommend_fee(u, K)
    delta = follower_best_response(K, fee)
    a = alpha_effective(u, K)
    pair = payoffs(GameParams(K=K, n=n, P=fee, delta=delta, alpha_eff=a))
    return Equilibrium(fee, delta, pair, a)
