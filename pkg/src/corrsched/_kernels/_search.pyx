# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled search kernel; exact twin of ``_pure.search_assignments``.

Same visit order, tie-breaks, floating-point operation order, and node
counting as the pure-Python kernel, so both return bit-identical results.
See ``_pure.py`` for the algorithm documentation.
"""

import time

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()

STATUS_DONE = "optimal"
STATUS_NODE_LIMIT = "node_limit"
STATUS_TIME_LIMIT = "time_limit"

cdef long long _TIME_CHECK_MASK = 0x3FF


def search_assignments(
    object a,
    Py_ssize_t l,
    bint use_bound,
    double prune_factor,
    object init_channels,
    double init_cost_raw,
    long long node_limit,
    double time_limit,
):
    """See ``corrsched._kernels._pure.search_assignments``."""
    cdef const double[:, ::1] rows = np.ascontiguousarray(a, dtype=np.float64)
    cdef Py_ssize_t n = rows.shape[0]
    cdef double[:, ::1] ctc = np.zeros((n, l), dtype=np.float64)
    # pre-application snapshots of the ctc column touched at each depth;
    # restoring them (instead of subtracting) keeps every ctc entry an
    # exact left-to-right partial sum, independent of the visit history
    cdef double[:, ::1] saved = np.zeros((n, n), dtype=np.float64)
    cdef long long[::1] choice = np.full(n, -1, dtype=np.int64)
    cdef double[::1] cum = np.zeros(n + 1, dtype=np.float64)
    cdef long long[::1] used = np.zeros(n + 1, dtype=np.int64)
    cdef long long[::1] best_arr = np.zeros(n, dtype=np.int64)

    cdef bint have_best = init_channels is not None
    cdef double best_raw = INFINITY
    cdef Py_ssize_t i
    if have_best:
        for i in range(n):
            best_arr[i] = init_channels[i]
        best_raw = init_cost_raw

    cdef double open_raw = INFINITY
    cdef long long nodes = 0
    cdef list log = []
    status = STATUS_DONE
    cdef bint have_deadline = time_limit > 0
    cdef double deadline = (time.perf_counter() + time_limit) if have_deadline else 0.0
    cdef bint aborted = False

    cdef Py_ssize_t d = 0
    cdef Py_ssize_t jmax, col, jj
    cdef long long j, new_used, j0
    cdef double new_cum, bound, m, v, cand

    while d >= 0:
        jmax = used[d] + 1
        if jmax > l:
            jmax = l
        j = choice[d] + 1
        if j >= jmax:
            # exhausted this depth: undo the parent's application and back up
            d -= 1
            if d >= 0:
                jj = choice[d]
                col = d + 1
                while col < n:
                    ctc[col, jj] = saved[d, col]
                    col += 1
            continue
        choice[d] = j
        nodes += 1
        if node_limit > 0 and nodes >= node_limit:
            status = STATUS_NODE_LIMIT
            aborted = True
            break
        if (
            have_deadline
            and (nodes & _TIME_CHECK_MASK) == 0
            and time.perf_counter() >= deadline
        ):
            status = STATUS_TIME_LIMIT
            aborted = True
            break
        new_cum = cum[d] + ctc[d, j]
        if d == n - 1:
            if new_cum < best_raw:
                best_raw = new_cum
                for i in range(n):
                    best_arr[i] = choice[i]
                have_best = True
                log.append((time.perf_counter(), new_cum))
            continue
        col = d + 1
        while col < n:
            saved[d, col] = ctc[col, j]
            ctc[col, j] = saved[d, col] + rows[d, col]
            col += 1
        if use_bound:
            new_used = used[d] + (1 if j == used[d] else 0)
            bound = new_cum
            if new_used == l:
                i = d + 1
                while i < n:
                    m = ctc[i, 0]
                    jj = 1
                    while jj < l:
                        v = ctc[i, jj]
                        if v < m:
                            m = v
                        jj += 1
                    bound += m
                    i += 1
            if bound >= best_raw * prune_factor:
                if bound < open_raw:
                    open_raw = bound
                col = d + 1
                while col < n:
                    ctc[col, j] = saved[d, col]
                    col += 1
                continue
        cum[d + 1] = new_cum
        used[d + 1] = used[d] + (1 if j == used[d] else 0)
        d += 1
        choice[d] = -1

    cdef Py_ssize_t dd
    if aborted:
        # honest bound over what was never explored: untried siblings at
        # every stack level plus the node the abort interrupted
        for dd in range(d + 1):
            jmax = used[dd] + 1
            if jmax > l:
                jmax = l
            j0 = choice[dd] if dd == d else choice[dd] + 1
            for j in range(j0, jmax):
                cand = cum[dd] + ctc[dd, j]
                if cand < open_raw:
                    open_raw = cand

    best = [int(best_arr[i]) for i in range(n)] if have_best else None
    return best, best_raw, open_raw, nodes, status, log
