"""PageRank and CheiRank of the trade network's Google matrices.

PageRank is the stationary vector of the damped operator built on the
export-share matrix ``S`` (money flows toward importers); CheiRank uses the
import-share matrix ``S_star``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .dynamics import CouplingWeights
from .network import TradeNetwork

DEFAULT_ALPHA = 0.5


class ConvergenceError(RuntimeError):
    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True, eq=False)
class CentralityVector:
    values: np.ndarray
    alpha: float
    direction: str
    residual: float
    iterations: int = 0


class GoogleOperator:
    """Matrix-free ``G = alpha * S' + (1 - alpha) / N * ones``.

    ``S'`` is the input with every all-zero (dangling) column replaced by a
    uniform ``1/N`` column. ``G`` is never formed densely.
    """

    def __init__(self, stochastic, alpha: float = DEFAULT_ALPHA):
        if not 0 < alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
        S = sp.csr_matrix(stochastic, dtype=float)
        if S.shape[0] != S.shape[1]:
            raise ValueError("stochastic matrix must be square")
        colsum = np.asarray(S.sum(axis=0)).ravel()
        bad = (np.abs(colsum - 1) > 1e-9) & (colsum != 0)
        if np.any(bad):
            raise ValueError(f"columns {np.flatnonzero(bad).tolist()} sum to neither 0 nor 1")
        self.S = S
        self.alpha = float(alpha)
        self.n = S.shape[0]
        self.dangling = colsum == 0

    def __matmul__(self, v):
        v = np.asarray(v, dtype=float)
        n = self.n
        dangling_mass = v[self.dangling].sum()
        return self.alpha * (self.S @ v) + (self.alpha * dangling_mass + (1 - self.alpha) * v.sum()) / n

    def dense(self) -> np.ndarray:
        """Explicit matrix, for small-N checks only."""
        n = self.n
        Sd = self.S.toarray()
        Sd[:, self.dangling] = 1.0 / n
        return self.alpha * Sd + (1 - self.alpha) / n


def google_matrix(stochastic, alpha: float = DEFAULT_ALPHA) -> GoogleOperator:
    return GoogleOperator(stochastic, alpha)


def power_iterate(op: GoogleOperator, tol: float = 1e-12, max_iter: int = 10_000,
                  direction: str = "pagerank") -> CentralityVector:
    """Stationary vector of ``op`` by power iteration from the uniform vector.

    Stops once the L1 change between successive iterates drops below ``tol``;
    raises :class:`ConvergenceError` after ``max_iter`` steps.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    n = op.n
    v = np.full(n, 1.0 / n)
    residual = np.inf
    for it in range(1, max_iter + 1):
        nv = op @ v
        nv /= nv.sum()
        residual = float(np.abs(nv - v).sum())
        v = nv
        if residual < tol:
            return CentralityVector(v, op.alpha, direction, residual, it)
    raise ConvergenceError(
        f"power iteration did not reach tol={tol} in {max_iter} steps (residual {residual:.3e})",
        residual,
    )


def pagerank(net: TradeNetwork, alpha: float = DEFAULT_ALPHA, **kw) -> CentralityVector:
    return power_iterate(google_matrix(net.S, alpha), direction="pagerank", **kw)


def cheirank(net: TradeNetwork, alpha: float = DEFAULT_ALPHA, **kw) -> CentralityVector:
    return power_iterate(google_matrix(net.S_star, alpha), direction="cheirank", **kw)


def centrality_weights(net: TradeNetwork, alpha: float = DEFAULT_ALPHA, **kw) -> CouplingWeights:
    """Node weights ``PageRank + CheiRank``, a drop-in for ``P + P_star``."""
    pr = pagerank(net, alpha, **kw)
    cr = cheirank(net, alpha, **kw)
    return CouplingWeights(pr.values + cr.values, "centrality")
