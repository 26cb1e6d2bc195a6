"""numba backend.  Every kernel mirrors a function in ``_numpy_impl``."""

import numpy as np
from numba import njit

_OPTS = {"cache": True, "nogil": True}


@njit(**_OPTS)
def _decode_one(seq, n, child, parent):
    degree = np.ones(n, dtype=np.int64)
    for s in seq:
        degree[s] += 1
    ptr = 0
    while degree[ptr] != 1:
        ptr += 1
    leaf = ptr
    for i in range(n - 2):
        s = seq[i]
        child[i] = leaf
        parent[i] = s
        degree[leaf] = 0
        degree[s] -= 1
        if degree[s] == 1 and s < ptr:
            leaf = s
        else:
            ptr += 1
            while degree[ptr] != 1:
                ptr += 1
            leaf = ptr
    child[n - 2] = leaf
    parent[n - 2] = n - 1


@njit(**_OPTS)
def prufer_decode_batch(seqs, n):
    """Decode each row of ``seqs`` into edges listed in leaf-removal order.

    Returns ``(child, parent)`` of shape ``(N, n - 1)``.  Row ``k`` of a
    tree is the edge removed at step ``k``; the last entry is the final edge.
    """
    count = seqs.shape[0]
    child = np.empty((count, n - 1), dtype=np.int64)
    parent = np.empty((count, n - 1), dtype=np.int64)
    for t in range(count):
        _decode_one(seqs[t], n, child[t], parent[t])
    return child, parent


@njit(**_OPTS)
def distances_from_order(child, parent, out):
    """Fill ``out[t]`` with hop distances of tree ``t``.

    Edges must be in leaf-removal order: walking them backwards every
    ``child[k]`` is new and ``parent[k]`` is already placed.
    """
    count, m = child.shape
    n = m + 1
    placed = np.empty(n, dtype=np.int64)
    for t in range(count):
        d = out[t]
        a = child[t, m - 1]
        b = parent[t, m - 1]
        d[a, b] = 1
        d[b, a] = 1
        placed[0] = a
        placed[1] = b
        size = 2
        for k in range(m - 2, -1, -1):
            leaf = child[t, k]
            p = parent[t, k]
            for j in range(size):
                x = placed[j]
                val = d[p, x] + 1
                d[leaf, x] = val
                d[x, leaf] = val
            d[leaf, leaf] = 0
            placed[size] = leaf
            size += 1
    return out


@njit(**_OPTS)
def four_point_violations(dist):
    """Count 4-subsets per matrix whose two largest pair-sums differ."""
    count, n, _ = dist.shape
    bad = np.zeros(count, dtype=np.int64)
    for t in range(count):
        d = dist[t]
        nb = 0
        for a in range(n):
            for b in range(a + 1, n):
                for c in range(b + 1, n):
                    for e in range(c + 1, n):
                        s1 = d[a, b] + d[c, e]
                        s2 = d[a, c] + d[b, e]
                        s3 = d[a, e] + d[b, c]
                        lo = min(s1, min(s2, s3))
                        top = s1 + s2 + s3 - lo
                        hi = max(s1, max(s2, s3))
                        if top - hi != hi:
                            nb += 1
        bad[t] = nb
    return bad


@njit(**_OPTS)
def decode_matching_batch(dist, queried, missing):
    """Recover adjacency from distances on the queried pairs only.

    ``queried`` is an ``(n, n)`` boolean mask, ``missing`` an ``(M, 2)``
    array of unqueried pairs.  Returns ``(adj, status)``: boolean
    adjacency per tree and a per-tree status (0 ok, 1 when a needed probe
    pair was not queried).
    """
    count, n, _ = dist.shape
    adj = np.zeros((count, n, n), dtype=np.bool_)
    status = np.zeros(count, dtype=np.int64)
    m = missing.shape[0]
    is_missing = np.zeros((n, n), dtype=np.bool_)
    for k in range(m):
        is_missing[missing[k, 0], missing[k, 1]] = True
        is_missing[missing[k, 1], missing[k, 0]] = True
    # pending pairs wait for the verdict on their (unqueried) probe pair
    pending = np.zeros((n, n), dtype=np.bool_)
    px = np.zeros(m, dtype=np.int64)
    py = np.zeros(m, dtype=np.int64)
    for t in range(count):
        d = dist[t]
        pending[:, :] = False
        for i in range(n):
            for j in range(n):
                if queried[i, j] and d[i, j] == 1:
                    adj[t, i, j] = True
        for k in range(m):
            u = missing[k, 0]
            v = missing[k, 1]
            px[k] = -1
            separated = False
            for w in range(n):
                if w == u or w == v:
                    continue
                if queried[u, w] and queried[v, w]:
                    diff = d[u, w] - d[v, w]
                    if diff != 1 and diff != -1:
                        separated = True
                        break
            if separated:
                continue
            cx = 0
            cy = 0
            x = -1
            y = -1
            for w in range(n):
                if w == u or w == v:
                    continue
                if queried[u, w] and d[u, w] == 1:
                    cx += 1
                    x = w
                if queried[v, w] and d[v, w] == 1:
                    cy += 1
                    y = w
            edge = True
            if cx == 1 and cy == 1:
                if not queried[x, y]:
                    edge = False
                    if is_missing[x, y]:
                        pending[u, v] = True
                        px[k] = x
                        py[k] = y
                    else:
                        status[t] = 1
                elif d[x, y] == 1:
                    edge = False
            if edge:
                adj[t, u, v] = True
                adj[t, v, u] = True
        for k in range(m):
            if px[k] < 0:
                continue
            u = missing[k, 0]
            v = missing[k, 1]
            x = px[k]
            y = py[k]
            if pending[x, y] or pending[y, x]:
                status[t] = 1
            elif not adj[t, x, y]:
                adj[t, u, v] = True
                adj[t, v, u] = True
    return adj, status
