"""Loop kernels compiled with numba.

Every scan returns ``(count, a, b, c)``: the number of violations found and the
coordinates of the first one in (profile, agent/allocation, ...) order, or -1
when there is none. Unless ``full`` is set, scanning stops at the first hit.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def perm_indices(objs):
    rows, n = objs.shape
    fact = np.ones(n, dtype=np.int64)
    for k in range(n - 2, -1, -1):
        fact[k] = fact[k + 1] * (n - 1 - k)
    out = np.zeros(rows, dtype=np.int64)
    for r in range(rows):
        idx = 0
        for k in range(n):
            smaller = 0
            for l in range(k + 1, n):
                if objs[r, l] < objs[r, k]:
                    smaller += 1
            idx += smaller * fact[k]
        out[r] = idx
    return out


@njit(cache=True)
def serial_dictatorship(prof, rank, priority):
    rows, n = prof.shape
    alloc = np.empty((rows, n), dtype=np.int64)
    taken = np.zeros(n, dtype=np.bool_)
    for r in range(rows):
        taken[:] = False
        for k in range(n):
            agent = priority[k]
            p = prof[r, agent]
            best = -1
            best_rank = n + 1
            for o in range(n):
                if not taken[o] and rank[p, o] < best_rank:
                    best = o
                    best_rank = rank[p, o]
            alloc[r, agent] = best
            taken[best] = True
    return alloc


@njit(cache=True)
def sp_scan(prof, alloc, rank, strides, full):
    rows, n = prof.shape
    m = rank.shape[0]
    count = 0
    first = (-1, -1, -1)
    for r in range(rows):
        for i in range(n):
            p = prof[r, i]
            base = r - p * strides[i]
            own = rank[p, alloc[r, i]]
            for q in range(m):
                if q == p:
                    continue
                if rank[p, alloc[base + q * strides[i], i]] < own:
                    if count == 0:
                        first = (r, i, q)
                    count += 1
                    if not full:
                        return count, first[0], first[1], first[2]
    return count, first[0], first[1], first[2]


@njit(cache=True)
def nb_scan(prof, entries, alloc, strides, full):
    rows, n = prof.shape
    m = 1
    for k in range(2, n + 1):
        m *= k
    count = 0
    first = (-1, -1, -1)
    for r in range(rows):
        for i in range(n):
            p = prof[r, i]
            base = r - p * strides[i]
            for q in range(m):
                if q == p:
                    continue
                r2 = base + q * strides[i]
                if alloc[r2, i] == alloc[r, i] and entries[r2] != entries[r]:
                    if count == 0:
                        first = (r, i, q)
                    count += 1
                    if not full:
                        return count, first[0], first[1], first[2]
    return count, first[0], first[1], first[2]


@njit(cache=True)
def pairwise_scan(prof, alloc, rank, full):
    rows, n = prof.shape
    count = 0
    first = (-1, -1, -1)
    for r in range(rows):
        for i in range(n):
            pi = prof[r, i]
            for j in range(i + 1, n):
                pj = prof[r, j]
                if (rank[pi, alloc[r, j]] < rank[pi, alloc[r, i]]
                        and rank[pj, alloc[r, i]] < rank[pj, alloc[r, j]]):
                    if count == 0:
                        first = (r, i, j)
                    count += 1
                    if not full:
                        return count, first[0], first[1], first[2]
    return count, first[0], first[1], first[2]


@njit(cache=True)
def iplb_scan(prof, alloc, rank, unanimous_step, full):
    rows, n = prof.shape
    count = 0
    first = (-1, -1, -1)
    for r in range(rows):
        for i in range(n):
            p = prof[r, i]
            bound = alloc[p * unanimous_step, i]
            if rank[p, alloc[r, i]] > rank[p, bound]:
                if count == 0:
                    first = (r, i, -1)
                count += 1
                if not full:
                    return count, first[0], first[1], first[2]
    return count, first[0], first[1], first[2]


@njit(cache=True)
def pareto_scan(prof, alloc, rank, perms, full):
    rows, n = prof.shape
    m = perms.shape[0]
    count = 0
    first = (-1, -1, -1)
    for r in range(rows):
        for y in range(m):
            strict = False
            dominated = True
            for i in range(n):
                p = prof[r, i]
                new = rank[p, perms[y, i]]
                old = rank[p, alloc[r, i]]
                if new > old:
                    dominated = False
                    break
                if new < old:
                    strict = True
            if dominated and strict:
                if count == 0:
                    first = (r, y, -1)
                count += 1
                if not full:
                    return count, first[0], first[1], first[2]
    return count, first[0], first[1], first[2]


@njit(cache=True)
def no_envy(prof, alloc, rank):
    rows, n = prof.shape
    out = np.empty((rows, n, n), dtype=np.bool_)
    for r in range(rows):
        for i in range(n):
            p = prof[r, i]
            own = rank[p, alloc[r, i]]
            for j in range(n):
                out[r, i, j] = own <= rank[p, alloc[r, j]]
    return out
