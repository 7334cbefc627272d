# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled pivot loop for the dense bounded-variable simplex.

Same contract as ``_pivot_py.pivot_loop``; see that module for the
variable-state conventions (nonbasic-at-upper columns are complemented).
"""

from libc.math cimport INFINITY


OPTIMAL = 0
UNBOUNDED = 1
ITER_LIMIT = 2


def pivot_loop(double[:, ::1] T, long long[::1] basis,
               unsigned char[::1] is_basic, unsigned char[::1] flipped,
               double[::1] upper, unsigned char[::1] allow,
               double tol, long max_iter):
    cdef Py_ssize_t m = T.shape[0] - 1
    cdef Py_ssize_t n = T.shape[1] - 1
    cdef Py_ssize_t i, j, enter, leave_row
    cdef long long lv
    cdef long iters = 0
    cdef double d, t, best_t, piv, factor
    cdef bint leave_at_upper, hits_upper

    while True:
        if iters >= max_iter:
            return ITER_LIMIT, iters
        enter = -1
        for j in range(n):
            if allow[j] and not is_basic[j] and T[m, j] < -tol:
                enter = j
                break
        if enter < 0:
            return OPTIMAL, iters

        best_t = upper[enter]
        leave_row = -1
        leave_at_upper = False
        for i in range(m):
            d = T[i, enter]
            # clamp slightly-negative basic values: step lengths stay >= 0
            if d > tol:
                t = T[i, n] / d if T[i, n] > 0.0 else 0.0
                hits_upper = False
            elif d < -tol and upper[basis[i]] != INFINITY:
                t = upper[basis[i]] - T[i, n]
                t = t / (-d) if t > 0.0 else 0.0
                hits_upper = True
            else:
                continue
            if t < best_t - tol or (
                t < best_t + tol
                and (leave_row < 0 or basis[i] < basis[leave_row])
            ):
                best_t = t
                leave_row = i
                leave_at_upper = hits_upper
        if best_t == INFINITY:
            return UNBOUNDED, iters
        iters += 1
        if leave_row < 0:
            _flip(T, flipped, upper, enter, m, n)
            continue
        lv = basis[leave_row]
        # pivot at (leave_row, enter)
        piv = T[leave_row, enter]
        for j in range(n + 1):
            T[leave_row, j] /= piv
        for i in range(m + 1):
            if i == leave_row:
                continue
            factor = T[i, enter]
            if factor != 0.0:
                for j in range(n + 1):
                    T[i, j] -= factor * T[leave_row, j]
                T[i, enter] = 0.0
        T[leave_row, enter] = 1.0
        basis[leave_row] = enter
        is_basic[enter] = 1
        is_basic[lv] = 0
        if leave_at_upper:
            _flip(T, flipped, upper, <Py_ssize_t> lv, m, n)


cdef void _flip(double[:, ::1] T, unsigned char[::1] flipped,
                double[::1] upper, Py_ssize_t j, Py_ssize_t m, Py_ssize_t n):
    cdef Py_ssize_t i
    cdef double u = upper[j]
    for i in range(m + 1):
        if T[i, j] != 0.0:
            T[i, n] -= T[i, j] * u
            T[i, j] = -T[i, j]
    flipped[j] ^= 1
