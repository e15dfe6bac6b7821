"""Vectorized numpy versions of the loop kernels, same signatures and results."""
import math

import numpy as np


def _first(viol, full):
    hits = np.flatnonzero(viol)
    if hits.size == 0:
        return 0, -1, -1, -1
    coords = [int(c) for c in np.unravel_index(hits[0], viol.shape)]
    coords += [-1] * (3 - len(coords))
    return (int(hits.size) if full else 1), coords[0], coords[1], coords[2]


def perm_indices(objs):
    objs = np.asarray(objs, dtype=np.int64)
    n = objs.shape[1]
    out = np.zeros(objs.shape[0], dtype=np.int64)
    for k in range(n):
        smaller = (objs[:, k + 1:] < objs[:, k:k + 1]).sum(axis=1)
        out += smaller * math.factorial(n - 1 - k)
    return out


def serial_dictatorship(prof, rank, priority):
    rows, n = prof.shape
    alloc = np.empty((rows, n), dtype=np.int64)
    taken = np.zeros((rows, n), dtype=bool)
    arange = np.arange(rows)
    for agent in priority:
        r = np.where(taken, n + 1, rank[prof[:, agent]])
        best = np.argmin(r, axis=1)
        alloc[:, agent] = best
        taken[arange, best] = True
    return alloc


def _deviations(prof, strides, i, m):
    base = np.arange(prof.shape[0], dtype=np.int64) - prof[:, i] * strides[i]
    return base[:, None] + np.arange(m, dtype=np.int64)[None, :] * strides[i]


def sp_scan(prof, alloc, rank, strides, full):
    rows, n = prof.shape
    m = rank.shape[0]
    viol = np.zeros((rows, n, m), dtype=bool)
    for i in range(n):
        p = prof[:, i]
        dev = _deviations(prof, strides, i, m)
        got = rank[p[:, None], alloc[dev, i]]
        own = rank[p, alloc[:, i]]
        viol[:, i, :] = got < own[:, None]
    return _first(viol, full)


def nb_scan(prof, entries, alloc, strides, full):
    rows, n = prof.shape
    m = math.factorial(n)
    viol = np.zeros((rows, n, m), dtype=bool)
    for i in range(n):
        dev = _deviations(prof, strides, i, m)
        same_own = alloc[dev, i] == alloc[:, i][:, None]
        viol[:, i, :] = same_own & (entries[dev] != entries[:, None])
    return _first(viol, full)


def pairwise_scan(prof, alloc, rank, full):
    rows, n = prof.shape
    viol = np.zeros((rows, n, n), dtype=bool)
    for i in range(n):
        for j in range(i + 1, n):
            pi, pj = prof[:, i], prof[:, j]
            viol[:, i, j] = (rank[pi, alloc[:, j]] < rank[pi, alloc[:, i]]) & (
                rank[pj, alloc[:, i]] < rank[pj, alloc[:, j]]
            )
    return _first(viol, full)


def iplb_scan(prof, alloc, rank, unanimous_step, full):
    bound = alloc[prof * unanimous_step, np.arange(prof.shape[1])[None, :]]
    viol = np.take_along_axis(rank[prof], alloc[:, :, None], axis=2)[..., 0] > np.take_along_axis(
        rank[prof], bound[:, :, None], axis=2
    )[..., 0]
    return _first(viol, full)


def pareto_scan(prof, alloc, rank, perms, full, chunk=8192):
    rows, n = prof.shape
    agents = np.arange(n)
    count, first = 0, None
    for start in range(0, rows, chunk):
        r = rank[prof[start:start + chunk]].astype(np.int8)  # r[row, i, o]
        old = np.take_along_axis(r, alloc[start:start + chunk, :, None], axis=2)[..., 0]
        diff = r[:, agents[None, :], perms] - old[:, None, :]  # (rows, m, n)
        viol = (diff <= 0).all(axis=2) & (diff < 0).any(axis=2)
        c, a, b, _ = _first(viol, full)
        if c and first is None:
            first = (a + start, b, -1)
            if not full:
                return 1, *first
        count += c
    return (count, *first) if first else (0, -1, -1, -1)


def no_envy(prof, alloc, rank):
    r = rank[prof]  # (rows, n, n) rank of each object for each agent
    own = np.take_along_axis(r, alloc[:, :, None], axis=2)
    others = np.take_along_axis(r, np.broadcast_to(alloc[:, None, :], r.shape), axis=2)
    return own <= others
