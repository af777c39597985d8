"""Phase-one simplex for ``A x = b, x >= 0`` with Bland's anti-cycling rule."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import NumericError


@dataclass
class PhaseOneResult:
    x: np.ndarray          # primal point for the original columns
    infeasibility: float   # optimal sum of artificials
    y: np.ndarray          # simplex multipliers in the original row signs
    iterations: int


def phase_one(A: np.ndarray, b: np.ndarray, tol: float = 1e-9, max_iter: int | None = None) -> PhaseOneResult:
    """Minimise the sum of artificial variables over ``A x + s = b``.

    At optimality the multipliers satisfy ``y @ A[:, j] <= tol`` for every
    column and ``y @ b`` equals the returned infeasibility, so a strictly
    positive infeasibility comes with a separating functional ``y``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    sign = np.where(b < 0, -1.0, 1.0)
    tab = np.hstack([A * sign[:, None], np.eye(m), (b * sign)[:, None]])
    cost = np.concatenate([np.zeros(n), np.ones(m)])
    basis = np.arange(n, n + m)
    if max_iter is None:
        max_iter = 50 * (m + n)

    it = 0
    while True:
        reduced = cost - cost[basis] @ tab[:, :-1]
        candidates = np.flatnonzero(reduced[: n + m] < -tol)
        if candidates.size == 0:
            break
        if it >= max_iter:
            raise NumericError(f"phase-one simplex hit its iteration cap ({max_iter})")
        # Bland: lowest-index entering column, lowest-index basic variable on ratio ties
        col = candidates[0]
        column = tab[:, col]
        rows = np.flatnonzero(column > tol)
        if rows.size == 0:
            raise NumericError("phase-one problem reported unbounded; this cannot happen")
        ratios = tab[rows, -1] / column[rows]
        best = ratios.min()
        tied = rows[ratios <= best + tol * max(1.0, abs(best))]
        row = tied[np.argmin(basis[tied])]

        tab[row] /= tab[row, col]
        for r in range(m):
            if r != row and tab[r, col] != 0.0:
                tab[r] -= tab[r, col] * tab[row]
        basis[row] = col
        it += 1

    x_full = np.zeros(n + m)
    x_full[basis] = tab[:, -1]
    binv = tab[:, n : n + m]
    y = (cost[basis] @ binv) * sign
    return PhaseOneResult(
        x=x_full[:n],
        infeasibility=float(cost[basis] @ tab[:, -1]),
        y=y,
        iterations=it,
    )
