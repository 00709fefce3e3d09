"""Pure-Python search kernel over canonical channel assignments.

Depth-first enumeration of hard assignments with channel-relabeling
symmetry broken: the device at depth 0 takes channel 0, and depth d may
use at most one channel beyond the highest channel opened at depths < d.
Costs are maintained incrementally; assigning depth d to channel j adds
sum(A[d, k] for assigned k on j) to the running raw cost (the objective is
raw / L, left to the caller).

With ``use_bound`` the search prunes any node whose admissible lower bound
(running cost plus, for each unassigned device, its cheapest channel given
only the devices assigned so far, an unopened channel counting 0) reaches
``incumbent * prune_factor``; without it the search is a full enumeration
whose first-found optimum is the lexicographically smallest one.

The compiled twin in ``_search.pyx`` mirrors this module line for line --
same visit order, tie-breaks, floating-point operation order, and node
counting -- so both backends return bit-identical results.
"""

import math
import time

STATUS_DONE = "optimal"
STATUS_NODE_LIMIT = "node_limit"
STATUS_TIME_LIMIT = "time_limit"

_TIME_CHECK_MASK = 0x3FF  # consult the clock every 1024 nodes


def search_assignments(
    a,
    l,
    use_bound,
    prune_factor,
    init_channels,
    init_cost_raw,
    node_limit,
    time_limit,
):
    """Minimize the raw same-channel pair cost over canonical assignments.

    ``a`` is an (n, n) array-like with zero diagonal, already permuted
    into visit order.  Returns ``(best_channels, best_raw, open_raw,
    nodes, status, log)`` where ``best_channels`` is a list (or None if no
    incumbent exists), ``open_raw`` is the smallest lower bound among
    pruned/unexplored subtrees (inf if none), and ``log`` holds
    ``(perf_counter timestamp, raw value)`` per incumbent improvement.
    """
    rows = [list(map(float, row)) for row in a]
    n = len(rows)
    inf = math.inf
    ctc = [[0.0] * l for _ in range(n)]  # cost of device (row) per channel
    # pre-application snapshots of the ctc column touched at each depth;
    # restoring them (instead of subtracting) keeps every ctc entry an
    # exact left-to-right partial sum, independent of the visit history
    saved = [[0.0] * n for _ in range(n)]
    choice = [-1] * n
    cum = [0.0] * (n + 1)
    used = [0] * (n + 1)
    if init_channels is not None:
        best = [int(c) for c in init_channels]
        best_raw = float(init_cost_raw)
    else:
        best = None
        best_raw = inf
    open_raw = inf
    nodes = 0
    log = []
    status = STATUS_DONE
    deadline = (time.perf_counter() + time_limit) if time_limit > 0 else None
    aborted = False
    d = 0
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
                undo = saved[d]
                col = d + 1
                while col < n:
                    ctc[col][jj] = undo[col]
                    col += 1
            continue
        choice[d] = j
        nodes += 1
        if node_limit > 0 and nodes >= node_limit:
            status = STATUS_NODE_LIMIT
            aborted = True
            break
        if (
            deadline is not None
            and (nodes & _TIME_CHECK_MASK) == 0
            and time.perf_counter() >= deadline
        ):
            status = STATUS_TIME_LIMIT
            aborted = True
            break
        new_cum = cum[d] + ctc[d][j]
        if d == n - 1:
            if new_cum < best_raw:
                best_raw = new_cum
                best = choice.copy()
                log.append((time.perf_counter(), new_cum))
            continue
        row = rows[d]
        keep = saved[d]
        col = d + 1
        while col < n:
            keep[col] = ctc[col][j]
            ctc[col][j] = keep[col] + row[col]
            col += 1
        if use_bound:
            new_used = used[d] + (1 if j == used[d] else 0)
            bound = new_cum
            if new_used == l:
                i = d + 1
                while i < n:
                    ci = ctc[i]
                    m = ci[0]
                    jj = 1
                    while jj < l:
                        v = ci[jj]
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
                    ctc[col][j] = keep[col]
                    col += 1
                continue
        cum[d + 1] = new_cum
        used[d + 1] = used[d] + (1 if j == used[d] else 0)
        d += 1
        choice[d] = -1
    if aborted:
        # honest bound over what was never explored: untried siblings at
        # every stack level plus the node the abort interrupted
        for dd in range(d + 1):
            jmax = used[dd] + 1
            if jmax > l:
                jmax = l
            j0 = choice[dd] if dd == d else choice[dd] + 1
            for j in range(j0, jmax):
                cand = cum[dd] + ctc[dd][j]
                if cand < open_raw:
                    open_raw = cand
    return best, best_raw, open_raw, nodes, status, log
