"""Stationary distributions of the reduced group-to-group chain.

The production path is Grassmann-Taksar-Heyman state elimination, which
computes the stationary vector of an irreducible stochastic matrix using
only additions, multiplications, and divisions by accumulated off-diagonal
mass. Because no like-signed quantities are ever subtracted, the method is
stable even for badly conditioned chains and needs no pivoting.

Power iteration is kept alongside as an independent oracle for testing and
debugging; it is never the default path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ChainError, ConvergenceError, DisconnectedChainError

STOCHASTIC_TOL = 1e-9


@dataclass(frozen=True)
class StationaryDistribution:
    """A solved stationary vector and the residual it achieves.

    ``residual`` is the max norm of (gamma @ P - gamma) against the input
    matrix; ``method`` records which solver produced the vector.
    """

    gamma: np.ndarray
    residual: float
    method: str


def _as_stochastic(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ChainError(f"expected a square matrix, got shape {p.shape}")
    if np.any(p < 0):
        raise ChainError("negative transition probability")
    drift = float(np.max(np.abs(p.sum(axis=1) - 1.0)))
    if drift > STOCHASTIC_TOL:
        raise ChainError(f"matrix is not row-stochastic: rows drift from 1 by {drift:.3e}")
    return p


def _residual(gamma: np.ndarray, p: np.ndarray) -> float:
    return float(np.max(np.abs(gamma @ p - gamma)))


def gth_steady_state(p_reduced) -> StationaryDistribution:
    """Solve gamma = gamma @ P by state elimination.

    States are eliminated from the last one down. Eliminating state ``n``
    divides the column of transitions into ``n`` by the total mass ``n``
    sends to the surviving states, then folds paths through ``n`` back
    into the surviving block. Back substitution rebuilds the unnormalized
    stationary weights in one forward sweep.

    Raises :class:`DisconnectedChainError` when a state to be eliminated
    has no outgoing mass towards the surviving states, which can only
    happen if the chain is reducible.
    """
    original = _as_stochastic(p_reduced)
    p = original.copy()
    n = p.shape[0]

    for k in range(n - 1, 0, -1):
        mass = p[k, :k].sum()
        if mass <= 0.0:
            raise DisconnectedChainError(
                f"state {k} has no transitions into the remaining states; "
                "the chain is reducible"
            )
        p[:k, k] /= mass
        p[:k, :k] += np.outer(p[:k, k], p[k, :k])

    gamma = np.zeros(n)
    gamma[0] = 1.0
    for k in range(1, n):
        gamma[k] = gamma[:k] @ p[:k, k]
    gamma /= gamma.sum()

    return StationaryDistribution(gamma=gamma, residual=_residual(gamma, original), method="gth")


def power_iteration(p_reduced, tol: float = 1e-12, max_iters: int = 100_000) -> StationaryDistribution:
    """Iterate gamma <- gamma @ P from the uniform vector until it settles.

    Requires an irreducible aperiodic matrix to converge; the reduced
    chain of a connected dataset qualifies because every group keeps some
    mass on itself through its own venues. Stops once the max-norm change
    per sweep drops to ``tol``; raises :class:`ConvergenceError` carrying
    the last residual if ``max_iters`` sweeps are not enough.
    """
    p = _as_stochastic(p_reduced)
    n = p.shape[0]
    gamma = np.full(n, 1.0 / n)

    delta = np.inf
    for _ in range(max_iters):
        nxt = gamma @ p
        nxt /= nxt.sum()
        delta = float(np.max(np.abs(nxt - gamma)))
        gamma = nxt
        if delta <= tol:
            return StationaryDistribution(
                gamma=gamma, residual=_residual(gamma, p), method="power"
            )
    raise ConvergenceError(
        f"power iteration did not converge within {max_iters} sweeps "
        f"(last change {delta:.3e})",
        residual=delta,
    )
