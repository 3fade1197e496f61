# Hot kernel for the Bellman row fill shared by the exact, coarse-grain and
# bounded dynamic programs. Ties on the max are broken toward the smallest k
# (ascending scan, strict improvement only), so backtracked schedules defer
# selling deterministically.

from libc.math cimport INFINITY


def fill_row(double[::1] prev, long prev_lo,
             double[::1] cur, long cur_lo,
             int[::1] parents, double[::1] w,
             long k_lo, long k_hi):
    """cur[n] = max_{k in [k_lo, k_hi]} prev[n - k] + w[n] * k, windowed.

    prev holds values for budgets [prev_lo, prev_lo + len(prev) - 1], cur and
    w for [cur_lo, cur_lo + len(cur) - 1]. parents receives the argmax k per
    cell, or -1 when no k reaches a finite value.
    """
    cdef long width = cur.shape[0]
    cdef long prev_hi = prev_lo + prev.shape[0] - 1
    cdef long i, n, k, ka, kb, best_k
    cdef double best, v, wi

    for i in range(width):
        n = cur_lo + i
        ka = n - prev_hi
        if ka < k_lo:
            ka = k_lo
        kb = n - prev_lo
        if kb > k_hi:
            kb = k_hi
        best = -INFINITY
        best_k = -1
        wi = w[i]
        for k in range(ka, kb + 1):
            v = prev[n - k - prev_lo] + wi * k
            if v > best:
                best = v
                best_k = k
        cur[i] = best
        parents[i] = <int> best_k
