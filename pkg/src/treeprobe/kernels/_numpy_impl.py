"""Pure-numpy backend, vectorised across the batch axis."""

from itertools import combinations

import numpy as np


def prufer_decode_batch(seqs, n):
    seqs = np.asarray(seqs, dtype=np.int64)
    count = seqs.shape[0]
    rows = np.arange(count)
    degree = np.ones((count, n), dtype=np.int64)
    for k in range(n - 2):
        np.add.at(degree, (rows, seqs[:, k]), 1)
    child = np.empty((count, n - 1), dtype=np.int64)
    parent = np.empty((count, n - 1), dtype=np.int64)
    for k in range(n - 2):
        leaf = np.argmax(degree == 1, axis=1)
        s = seqs[:, k]
        child[:, k] = leaf
        parent[:, k] = s
        degree[rows, leaf] = 0
        degree[rows, s] -= 1
    # two vertices of degree one remain; the larger is always n - 1
    child[:, n - 2] = np.argmax(degree == 1, axis=1)
    parent[:, n - 2] = n - 1
    return child, parent


def distances_from_order(child, parent, out):
    count, m = child.shape
    rows = np.arange(count)
    placed = np.zeros((count, m + 1), dtype=bool)
    a = child[:, m - 1]
    b = parent[:, m - 1]
    out[rows, a, b] = 1
    out[rows, b, a] = 1
    placed[rows, a] = True
    placed[rows, b] = True
    for k in range(m - 2, -1, -1):
        leaf = child[:, k]
        row = np.where(placed, out[rows, parent[:, k], :] + 1, 0).astype(out.dtype)
        out[rows, leaf, :] = row
        out[rows, :, leaf] = row
        placed[rows, leaf] = True
    return out


def four_point_violations(dist):
    count, n, _ = dist.shape
    if n < 4:
        return np.zeros(count, dtype=np.int64)
    quads = np.array(list(combinations(range(n), 4)), dtype=np.int64)
    a, b, c, e = quads.T
    d = dist.astype(np.int64)
    sums = np.stack(
        [d[:, a, b] + d[:, c, e], d[:, a, c] + d[:, b, e], d[:, a, e] + d[:, b, c]],
        axis=-1,
    )
    sums.sort(axis=-1)
    return (sums[..., 2] != sums[..., 1]).sum(axis=1).astype(np.int64)


def decode_matching_batch(dist, queried, missing):
    count, n, _ = dist.shape
    d = dist.astype(np.int64)
    adj = (d == 1) & queried[None, :, :]
    status = np.zeros(count, dtype=np.int64)
    missing = np.asarray(missing, dtype=np.int64).reshape(-1, 2)
    is_missing = np.zeros((n, n), dtype=bool)
    is_missing[missing[:, 0], missing[:, 1]] = True
    is_missing[missing[:, 1], missing[:, 0]] = True
    waiting = []
    for u, v in missing:
        others = np.array([w for w in range(n) if w != u and w != v], dtype=np.int64)
        both = others[queried[u, others] & queried[v, others]]
        diffs = np.abs(d[:, u, both] - d[:, v, both])
        separated = (diffs != 1).any(axis=1)

        qu = others[queried[u, others]]
        qv = others[queried[v, others]]
        near_u = d[:, u, qu] == 1
        near_v = d[:, v, qv] == 1
        single = (near_u.sum(axis=1) == 1) & (near_v.sum(axis=1) == 1)
        x = qu[np.argmax(near_u, axis=1)] if qu.size else np.zeros(count, dtype=np.int64)
        y = qv[np.argmax(near_v, axis=1)] if qv.size else np.zeros(count, dtype=np.int64)
        probe_known = queried[x, y]
        probe_adjacent = d[np.arange(count), x, y] == 1

        edge = ~separated & (~single | (probe_known & ~probe_adjacent))
        unresolved = ~separated & single & ~probe_known
        deferred = unresolved & is_missing[x, y]
        status[unresolved & ~deferred] = 1
        adj[:, u, v] = edge
        adj[:, v, u] = edge
        waiting.append((u, v, x, y, deferred))

    # settle pairs whose probe pair was itself unqueried
    pending = np.zeros((count, n, n), dtype=bool)
    for u, v, x, y, deferred in waiting:
        pending[deferred, u, v] = pending[deferred, v, u] = True
    rows = np.arange(count)
    for u, v, x, y, deferred in waiting:
        blocked = deferred & pending[rows, x, y]
        status[blocked] = 1
        edge = deferred & ~blocked & ~adj[rows, x, y]
        adj[edge, u, v] = adj[edge, v, u] = True
    return adj, status
