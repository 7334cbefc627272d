"""Pure-Python pivot loop for the dense bounded-variable simplex.

Fallback for the compiled kernel in ``_pivot_cy.pyx``; both implement the
same contract (see ``pivot_loop``) and are selected in ``__init__``.
Variables at their upper bound are kept complemented (column negated,
rhs shifted) so every nonbasic variable sits at zero.
"""

from __future__ import annotations

import numpy as np

OPTIMAL = 0
UNBOUNDED = 1
ITER_LIMIT = 2

_INF = float("inf")


def pivot_loop(T, basis, is_basic, flipped, upper, allow, tol, max_iter):
    """Run Bland-rule pivots in place until optimal/unbounded/cap.

    T        : (m+1, n+1) float64 tableau; last row = reduced costs with
               T[m, n] = -objective, last column = basic values.
    basis    : int64[m], variable index basic in each row.
    is_basic : uint8[n] membership flags.
    flipped  : uint8[n], 1 when the column is complemented (var at upper).
    upper    : float64[n] upper bounds (inf allowed).
    allow    : uint8[n], 0 bars a column from entering.
    """
    m = T.shape[0] - 1
    n = T.shape[1] - 1
    obj = T[m]
    iters = 0
    while True:
        if iters >= max_iter:
            return ITER_LIMIT, iters
        # entering column: smallest index with negative reduced cost
        enter = -1
        for j in range(n):
            if allow[j] and not is_basic[j] and obj[j] < -tol:
                enter = j
                break
        if enter < 0:
            return OPTIMAL, iters
        # ratio test against basic bounds plus the entering bound flip
        best_t = upper[enter]
        leave_row = -1
        leave_at_upper = False
        for i in range(m):
            d = T[i, enter]
            # basic values may dip a hair below their bounds numerically;
            # clamping keeps step lengths nonnegative
            if d > tol:
                t = max(T[i, n], 0.0) / d
                hits_upper = False
            elif d < -tol and upper[basis[i]] != _INF:
                t = max(upper[basis[i]] - T[i, n], 0.0) / (-d)
                hits_upper = True
            else:
                continue
            if t < best_t - tol or (
                t < best_t + tol and (leave_row < 0 or basis[i] < basis[leave_row])
            ):
                best_t = t
                leave_row = i
                leave_at_upper = hits_upper
        if best_t == _INF:
            return UNBOUNDED, iters
        iters += 1
        if leave_row < 0:
            _flip(T, flipped, upper, enter)
            continue
        lv = basis[leave_row]
        _pivot(T, leave_row, enter)
        basis[leave_row] = enter
        is_basic[enter] = 1
        is_basic[lv] = 0
        if leave_at_upper:
            # the leaving variable exits at its upper bound; complement it
            # so the rhs column is a correct basic solution again
            _flip(T, flipped, upper, lv)


def _pivot(T, row, col):
    T[row] /= T[row, col]
    column = T[:, col].copy()
    column[row] = 0.0
    T -= np.outer(column, T[row])
    T[:, col] = 0.0
    T[row, col] = 1.0


def _flip(T, flipped, upper, j):
    T[:, -1] -= T[:, j] * upper[j]
    T[:, j] *= -1.0
    flipped[j] ^= 1
