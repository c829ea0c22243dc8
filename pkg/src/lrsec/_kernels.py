"""Compiled inner loops: packed GF(2) elimination and BP+OSD decoding.

Everything here works on plain numpy arrays so that the public modules can
keep their own, friendlier types.
"""

import numba
import numpy as np

_ONE = np.uint64(1)


@numba.njit(cache=True)
def pack_columns(col_ptr, col_rows, m, order, ncols):
    """Pack the first ``ncols`` columns listed in ``order`` into uint64 rows."""
    nw = (ncols + 63) >> 6
    out = np.zeros((m, max(nw, 1)), dtype=np.uint64)
    for pos in range(ncols):
        j = order[pos]
        w = pos >> 6
        bit = _ONE << np.uint64(pos & 63)
        for k in range(col_ptr[j], col_ptr[j + 1]):
            out[col_rows[k], w] ^= bit
    return out


@numba.njit(cache=True)
def rref_packed(P, aug, ncols):
    """Reduce ``P`` in place to reduced row echelon form.

    Columns are scanned left to right; ``aug`` (rows x k, uint8) receives the
    same row operations.  Returns the pivot column of each leading row.
    """
    m = P.shape[0]
    nw = P.shape[1]
    k = aug.shape[1]
    pivots = np.empty(min(m, ncols), dtype=np.int64)
    rank = 0
    for pos in range(ncols):
        if rank == m:
            break
        w = pos >> 6
        bit = _ONE << np.uint64(pos & 63)
        p = -1
        for r in range(rank, m):
            if P[r, w] & bit:
                p = r
                break
        if p < 0:
            continue
        if p != rank:
            for ww in range(w, nw):
                tmp = P[p, ww]
                P[p, ww] = P[rank, ww]
                P[rank, ww] = tmp
            for a in range(k):
                t8 = aug[p, a]
                aug[p, a] = aug[rank, a]
                aug[rank, a] = t8
        # the pivot row is zero left of ``pos``, so XORs can start at word w
        for r in range(m):
            if r != rank and (P[r, w] & bit):
                for ww in range(w, nw):
                    P[r, ww] ^= P[rank, ww]
                for a in range(k):
                    aug[r, a] ^= aug[rank, a]
        pivots[rank] = pos
        rank += 1
    return pivots[:rank]


@numba.njit(cache=True)
def _bit(P, r, pos):
    return (P[r, pos >> 6] >> np.uint64(pos & 63)) & _ONE


@numba.njit(cache=True)
def bp_min_sum(check_ptr, edge_var, var_ptr, var_edge, syndrome, ch_llr,
               max_iter, ms_scale, posterior, hard):
    """Flooding min-sum belief propagation.

    ``ms_scale == 0`` selects the iteration-dependent factor 1 - 2**-it.
    Fills ``posterior`` and ``hard`` and returns (converged, iterations).
    """
    m = check_ptr.shape[0] - 1
    n = var_ptr.shape[0] - 1
    ne = edge_var.shape[0]
    q = np.empty(ne, dtype=np.float64)
    r = np.zeros(ne, dtype=np.float64)
    for e in range(ne):
        q[e] = ch_llr[edge_var[e]]
    for it in range(1, max_iter + 1):
        alpha = ms_scale
        if ms_scale == 0.0:
            alpha = 1.0 - 2.0 ** (-it)
        for i in range(m):
            sgn = 1.0 - 2.0 * syndrome[i]
            min1 = np.inf
            min2 = np.inf
            amin = -1
            for e in range(check_ptr[i], check_ptr[i + 1]):
                v = q[e]
                if v < 0.0:
                    sgn = -sgn
                    v = -v
                if v < min1:
                    min2 = min1
                    min1 = v
                    amin = e
                elif v < min2:
                    min2 = v
            for e in range(check_ptr[i], check_ptr[i + 1]):
                mag = min2 if e == amin else min1
                s = sgn
                if q[e] < 0.0:
                    s = -s
                r[e] = alpha * s * mag
        for j in range(n):
            tot = ch_llr[j]
            for k in range(var_ptr[j], var_ptr[j + 1]):
                tot += r[var_edge[k]]
            posterior[j] = tot
            hard[j] = 1 if tot < 0.0 else 0
            for k in range(var_ptr[j], var_ptr[j + 1]):
                e = var_edge[k]
                q[e] = tot - r[e]
        ok = True
        for i in range(m):
            par = 0
            for e in range(check_ptr[i], check_ptr[i + 1]):
                par ^= hard[edge_var[e]]
            if par != syndrome[i]:
                ok = False
                break
        if ok:
            return True, it
    return False, max_iter


@numba.njit(cache=True)
def osd_cs(col_ptr, col_rows, m, n, syndrome, posterior, ch_llr, order_lambda,
           max_cols, out):
    """Ordered statistics decoding with a combination sweep.

    Columns are ranked by posterior LLR (most likely flipped first).  The
    OSD-0 solution is refined by every single flip of a non-pivot column in
    the eliminated window and every pair among the first ``order_lambda``
    non-pivot columns; the lowest soft weight wins.  Returns False when the
    syndrome is outside the column space.
    """
    order = np.argsort(posterior, kind="mergesort")
    ncols = n
    if max_cols > 0 and max_cols < n:
        ncols = max_cols
    while True:
        P = pack_columns(col_ptr, col_rows, m, order, ncols)
        aug = np.empty((m, 1), dtype=np.uint8)
        for i in range(m):
            aug[i, 0] = syndrome[i]
        piv = rref_packed(P, aug, ncols)
        rank = piv.shape[0]
        consistent = True
        for i in range(rank, m):
            if aug[i, 0]:
                consistent = False
                break
        if consistent:
            break
        if ncols == n:
            return False
        ncols = min(n, 2 * ncols)
    is_piv = np.zeros(ncols, dtype=np.uint8)
    for i in range(rank):
        is_piv[piv[i]] = 1
    nonpiv = np.empty(ncols - rank, dtype=np.int64)
    c = 0
    for pos in range(ncols):
        if not is_piv[pos]:
            nonpiv[c] = pos
            c += 1
    base = np.empty(rank, dtype=np.uint8)
    piv_cost = np.empty(rank, dtype=np.float64)
    cost0 = 0.0
    for i in range(rank):
        base[i] = aug[i, 0]
        piv_cost[i] = ch_llr[order[piv[i]]]
        if base[i]:
            cost0 += piv_cost[i]
    best_cost = cost0
    best_a = -1
    best_b = -1
    if order_lambda > 0:
        for a in range(nonpiv.shape[0]):
            pa = nonpiv[a]
            cost = ch_llr[order[pa]]
            for i in range(rank):
                if base[i] ^ _bit(P, i, pa):
                    cost += piv_cost[i]
            if cost < best_cost - 1e-12:
                best_cost = cost
                best_a = pa
                best_b = -1
        lam = min(order_lambda, nonpiv.shape[0])
        for a in range(lam):
            pa = nonpiv[a]
            for b in range(a + 1, lam):
                pb = nonpiv[b]
                cost = ch_llr[order[pa]] + ch_llr[order[pb]]
                for i in range(rank):
                    if base[i] ^ _bit(P, i, pa) ^ _bit(P, i, pb):
                        cost += piv_cost[i]
                if cost < best_cost - 1e-12:
                    best_cost = cost
                    best_a = pa
                    best_b = pb
    for j in range(n):
        out[j] = 0
    for i in range(rank):
        v = base[i]
        if best_a >= 0:
            v ^= _bit(P, i, best_a)
        if best_b >= 0:
            v ^= _bit(P, i, best_b)
        out[order[piv[i]]] = v
    if best_a >= 0:
        out[order[best_a]] = 1
    if best_b >= 0:
        out[order[best_b]] = 1
    return True


@numba.njit(cache=True)
def bposd(check_ptr, edge_var, var_ptr, var_edge, col_ptr, col_rows, syndrome,
          ch_llr, max_iter, ms_scale, osd_order, max_cols, out, posterior):
    """BP followed by OSD-CS when BP does not converge.

    Returns a status code: 0 BP converged, 1 OSD solution, 2 no solution.
    """
    m = check_ptr.shape[0] - 1
    n = var_ptr.shape[0] - 1
    hard = np.zeros(n, dtype=np.uint8)
    converged, _ = bp_min_sum(check_ptr, edge_var, var_ptr, var_edge, syndrome,
                              ch_llr, max_iter, ms_scale, posterior, hard)
    if converged:
        for j in range(n):
            out[j] = hard[j]
        return 0
    ok = osd_cs(col_ptr, col_rows, m, n, syndrome, posterior, ch_llr, osd_order,
                max_cols, out)
    return 1 if ok else 2


@numba.njit(cache=True)
def dense_to_graph(H):
    """Row (edge) and column adjacency arrays for a dense 0/1 matrix."""
    m, n = H.shape
    nnz = 0
    for i in range(m):
        for j in range(n):
            if H[i, j]:
                nnz += 1
    check_ptr = np.zeros(m + 1, dtype=np.int64)
    edge_var = np.empty(nnz, dtype=np.int64)
    e = 0
    for i in range(m):
        for j in range(n):
            if H[i, j]:
                edge_var[e] = j
                e += 1
        check_ptr[i + 1] = e
    var_ptr = np.zeros(n + 1, dtype=np.int64)
    for e in range(nnz):
        var_ptr[edge_var[e] + 1] += 1
    for j in range(n):
        var_ptr[j + 1] += var_ptr[j]
    fill = var_ptr[:-1].copy()
    var_edge = np.empty(nnz, dtype=np.int64)
    col_rows = np.empty(nnz, dtype=np.int64)
    for i in range(m):
        for e in range(check_ptr[i], check_ptr[i + 1]):
            j = edge_var[e]
            var_edge[fill[j]] = e
            col_rows[fill[j]] = i
            fill[j] += 1
    return check_ptr, edge_var, var_ptr, var_edge, var_ptr.copy(), col_rows
