"""Exact solution of two-player zero-sum matrix games.

The row player maximizes, the column player minimizes. Mixed strategies
come from the classic LP reduction: shift the payoffs positive, then

    maximize sum(u)  s.t.  A u <= 1,  u >= 0

whose optimum ``z`` gives the shifted value ``1 / z``. The column strategy
is ``u / z`` and the row strategy is read off the dual (the reduced costs
of the slack columns). A dense tableau simplex with Bland's rule does the
pivoting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_PIVOT_EPS = 1e-12


class MatrixGameError(ValueError):
    pass


@dataclass(frozen=True)
class MatrixSolution:
    value: float
    row_strategy: np.ndarray
    col_strategy: np.ndarray


def _as_payoff(M) -> np.ndarray:
    A = np.array(M, dtype=float)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if A.ndim != 2 or A.shape[0] == 0 or A.shape[1] == 0:
        raise MatrixGameError(f"payoff matrix must be a non-empty 2-D array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise MatrixGameError("payoff matrix has non-finite entries")
    return A


def _simplex_bland(A: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Maximize 1'u subject to A u <= 1, u >= 0 for strictly positive ``A``.

    Returns ``(u, w, z)`` where ``w`` is the optimal dual (A'w >= 1) and
    ``z`` the common objective value.
    """
    m, n = A.shape
    # columns: n structural, m slack, rhs; last row holds reduced costs
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = 1.0
    T[m, :n] = 1.0
    basis = list(range(n, n + m))

    for _ in range(50_000):
        improving = np.flatnonzero(T[m, : n + m] > _PIVOT_EPS)
        if improving.size == 0:
            break
        entering = int(improving[0])
        col = T[:m, entering]
        rows = np.flatnonzero(col > _PIVOT_EPS)
        # bounded: every structural column has positive entries
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + _PIVOT_EPS * max(1.0, abs(best))]
        leave = min(ties, key=lambda r: basis[r])
        T[leave] /= T[leave, entering]
        factors = T[:, entering].copy()
        factors[leave] = 0.0
        T -= np.outer(factors, T[leave])
        basis[leave] = entering
    else:
        raise MatrixGameError("simplex did not terminate")

    u = np.zeros(n)
    for r, var in enumerate(basis):
        if var < n:
            u[var] = T[r, -1]
    w = -T[m, n : n + m]
    z = -T[m, -1]
    return u, w, z


def _normalise(p: np.ndarray) -> np.ndarray:
    p = np.where(p < 0.0, 0.0, p)
    return p / p.sum()


def solve_matrix_game(M, tol: float = 1e-9) -> MatrixSolution:
    """Value and optimal mixed strategies of the zero-sum game with payoffs ``M``.

    The returned strategies are checked against the saddle-point
    certificate ``min_j (x'M)_j >= v - tol`` and ``max_i (My)_i <= v + tol``
    (tolerance scaled by the payoff magnitude); a failed check raises.
    """
    if not tol > 0:
        raise MatrixGameError("tol must be positive")
    A = _as_payoff(M)
    low = A.min()
    # entries below 1 (not just <= 0) are lifted so pivots stay well away from zero
    shift = 1.0 - low if low < 1.0 else 0.0
    u, w, z = _simplex_bland(A + shift)
    if not z > 0:
        raise MatrixGameError("degenerate LP optimum")
    y = _normalise(u)
    x = _normalise(w)
    value = float(1.0 / z - shift)

    scale = max(1.0, float(np.abs(A).max()))
    lower = float((x @ A).min())
    upper = float((A @ y).max())
    if lower < value - tol * scale or upper > value + tol * scale:
        raise MatrixGameError(
            f"saddle certificate failed: {lower!r} <= {value!r} <= {upper!r} violated"
        )
    return MatrixSolution(value, x, y)


def pure_minimax(M) -> tuple[float, int, int]:
    """Best guaranteed payoff when the row player is restricted to pure rows.

    Returns ``(value, row, col)``: the max over rows of the row minimum,
    the maximizing row and its minimizing column. Ties go to the lowest index.
    """
    A = _as_payoff(M)
    cols = A.argmin(axis=1)
    row_min = A[np.arange(A.shape[0]), cols]
    row = int(row_min.argmax())
    return float(row_min[row]), row, int(cols[row])
