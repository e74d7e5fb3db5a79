"""Compiled inner loops: union-find for degree 0, Z/2 column reduction."""
import numpy as np
from numba import njit
from numba.typed import List


@njit(cache=True, nogil=True)
def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


@njit(cache=True, nogil=True)
def union_find(nv, vpos, eu, ev):
    """Elder-rule merging of vertices along edges given in filtration order.

    ``vpos`` is the filtration position of each vertex (smaller is older).
    Returns (killed vertex, killing edge index) pairs, a mask of edges that
    closed a cycle, and the final root of every vertex.
    """
    parent = np.arange(nv)
    ne = eu.shape[0]
    dead_v = np.empty(min(ne, nv), np.int64)
    kill_e = np.empty(min(ne, nv), np.int64)
    cyc = np.zeros(ne, np.bool_)
    npair = 0
    for k in range(ne):
        a = _find(parent, eu[k])
        b = _find(parent, ev[k])
        if a == b:
            cyc[k] = True
            continue
        if vpos[a] < vpos[b]:
            parent[b] = a
            dead_v[npair] = b
        else:
            parent[a] = b
            dead_v[npair] = a
        kill_e[npair] = k
        npair += 1
    roots = np.empty(nv, np.int64)
    for i in range(nv):
        roots[i] = _find(parent, i)
    return dead_v[:npair], kill_e[:npair], cyc, roots


@njit(cache=True, nogil=True)
def _symdiff(a, b):
    out = np.empty(a.size + b.size, np.int64)
    i = 0
    j = 0
    k = 0
    while i < a.size and j < b.size:
        if a[i] < b[j]:
            out[k] = a[i]
            i += 1
            k += 1
        elif a[i] > b[j]:
            out[k] = b[j]
            j += 1
            k += 1
        else:
            i += 1
            j += 1
    while i < a.size:
        out[k] = a[i]
        i += 1
        k += 1
    while j < b.size:
        out[k] = b[j]
        j += 1
        k += 1
    return out[:k]


@njit(cache=True, nogil=True)
def _load(rows):
    # rows sorted; cancel equal neighbours (mod 2)
    out = np.empty(rows.size, np.int64)
    k = 0
    i = 0
    while i < rows.size:
        if i + 1 < rows.size and rows[i] == rows[i + 1]:
            i += 2
            continue
        out[k] = rows[i]
        k += 1
        i += 1
    return out[:k]


@njit(cache=True, nogil=True)
def reduce_columns(cols, skip, nrows):
    """Standard Z/2 reduction of a boundary block.

    ``cols`` is (ncols, width) with each row the sorted filtration positions of
    the faces of one cell, columns already in filtration order. ``skip`` marks
    columns known to reduce to zero (clearing). Returns ``low`` per column
    (-1 for zero columns).
    """
    ncols = cols.shape[0]
    pivot = np.full(nrows, -1, np.int64)
    low = np.full(ncols, -1, np.int64)
    store = List()
    for j in range(ncols):
        if skip[j]:
            store.append(np.empty(0, np.int64))
            continue
        c = _load(cols[j])
        while c.size > 0:
            q = pivot[c[c.size - 1]]
            if q < 0:
                break
            c = _symdiff(c, store[q])
        if c.size > 0:
            pivot[c[c.size - 1]] = j
            low[j] = c[c.size - 1]
        store.append(c)
    return low


@njit(cache=True, nogil=True)
def dual_union_find(face_order, cof, tpos):
    """Pairs of the top block via union-find on the dual graph.

    Top cells are the nodes and each codimension-one face joins its (at most
    two) cofaces; ``-1`` in ``cof`` stands for the region outside a box, a
    node older than everything. Faces are visited in decreasing filtration
    position (``face_order``); on a merge the younger root, the one with the
    smaller forward position, is the top cell paired with the face.
    """
    nt = tpos.shape[0]
    parent = np.arange(nt + 1)
    age = np.empty(nt + 1, np.int64)
    age[:nt] = tpos
    age[nt] = np.iinfo(np.int64).max
    pf = np.empty(nt, np.int64)
    pt = np.empty(nt, np.int64)
    k = 0
    for f in face_order:
        a = cof[f, 0]
        b = cof[f, 1]
        if a < 0:
            a = nt
        if b < 0:
            b = nt
        ra = _find(parent, a)
        rb = _find(parent, b)
        if ra == rb:
            continue
        if age[ra] > age[rb]:
            parent[rb] = ra
            pt[k] = rb
        else:
            parent[ra] = rb
            pt[k] = ra
        pf[k] = f
        k += 1
    return pf[:k], pt[:k]
