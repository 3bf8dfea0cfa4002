"""Brute-force reference solvers for the pricing game.

Kept apart from the library's closed forms: the best responses here come from
dense grid search over the payoff functions.
"""

import numpy as np

from oraclegame.incentive import GameParams, follower_payoff, leader_payoff


def grid(lo: float, hi: float, step: float) -> np.ndarray:
    return np.linspace(lo, hi, int(round((hi - lo) / step)) + 1)


def follower_argmax(K: float, P: float, n: int = 5, hi: float = 2.0, step: float = 1e-6) -> float:
    deltas = grid(0.0, hi, step)
    values = follower_payoff(GameParams(K=K, n=n, P=P, delta=deltas))
    return float(deltas[np.argmax(values)])


def leader_argmax(K: float, alpha_eff: float, step: float = 1e-5) -> float:
    """Argmax over P of U1(P, delta*(P)) with delta*(P) = (K - P) / K."""
    fees = grid(0.0, K, step)
    best = np.empty_like(fees)
    chunk = 1_000_000
    for s in range(0, fees.size, chunk):
        p = fees[s : s + chunk]
        best[s : s + chunk] = leader_payoff(
            GameParams(K=K, P=p, delta=(K - p) / K, alpha_eff=alpha_eff)
        )
    return float(fees[np.argmax(best)])


def second_derivative(f, x: float, h: float = 1e-4) -> float:
    return (f(x + h) - 2 * f(x) + f(x - h)) / (h * h)
