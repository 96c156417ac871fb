"""Integer kernels behind the Weyl-group tables.

Every kernel has a numba-compiled loop version and a vectorized numpy
version with identical results.  The loop versions are used when numba is
importable and the environment variable ``MOMENTGRAPH_DISABLE_JIT`` is not
set to a true value; ``benchmarks/bench_kernels.py`` compares the two.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is optional
    HAVE_NUMBA = False

JIT_DISABLED = os.environ.get("MOMENTGRAPH_DISABLE_JIT", "").lower() in ("1", "true", "yes")
USE_JIT = HAVE_NUMBA and not JIT_DISABLED


# -- descent reduction --------------------------------------------------------


def reduce_descents_numpy(start, desc, step, active):
    """Walk every start element down through descents in ``active``.

    ``desc[w, i]`` says whether ``i`` is a descent of ``w`` and ``step[i, w]``
    is the element obtained by removing it.  Returns the final elements.
    """
    cur = np.array(start, dtype=np.int64, copy=True)
    labels = np.flatnonzero(active)
    while True:
        changed = False
        for i in labels:
            hit = desc[cur, i]
            if hit.any():
                cur[hit] = step[i, cur[hit]]
                changed = True
        if not changed:
            return cur


def _reduce_descents_loops(start, desc, step, active):
    out = np.empty(start.shape[0], dtype=np.int64)
    n = active.shape[0]
    for k in range(start.shape[0]):
        w = start[k]
        moved = True
        while moved:
            moved = False
            for i in range(n):
                if active[i] and desc[w, i]:
                    w = step[i, w]
                    moved = True
        out[k] = w
    return out


# -- Bruhat order ------------------------------------------------------------


def bruhat_closure_numpy(order, succ):
    """Reachability matrix of the upward relation graph.

    ``order`` lists elements by decreasing length and ``succ[w, k]`` is an
    element strictly above ``w`` (or -1).  Entry ``[u, v]`` of the result is
    true iff ``u <= v``.
    """
    size = succ.shape[0]
    up = np.zeros((size, size), dtype=np.bool_)
    for w in order:
        up[w, w] = True
        targets = succ[w][succ[w] >= 0]
        if targets.size:
            up[w] |= np.logical_or.reduce(up[targets], axis=0)
    return up


def _bruhat_closure_loops(order, succ):
    size = succ.shape[0]
    up = np.zeros((size, size), dtype=np.bool_)
    for w in order:
        up[w, w] = True
        for k in range(succ.shape[1]):
            x = succ[w, k]
            if x >= 0:
                for j in range(size):
                    if up[x, j]:
                        up[w, j] = True
    return up


# -- closedness sweep --------------------------------------------------------


def closedness_violation_numpy(targets, stabilizers, stab_counts, perm, npos):
    """Search for a pair of labels that no stabilizer element relates.

    ``targets[k, a]`` is the double-coset target of label ``a`` at the
    ``k``-th representative (or -1), ``stabilizers[k, :stab_counts[k]]``
    lists the W_Q elements fixing that representative's coset and ``perm``
    is the root permutation table.  Returns ``(k, a, b)`` for the first
    violating pair or ``(-1, -1, -1)``.
    """
    for k in range(targets.shape[0]):
        row = targets[k]
        stab = stabilizers[k, : stab_counts[k]]
        images = perm[stab][:, :npos] % npos
        for a in np.flatnonzero(row >= 0):
            same = np.flatnonzero(row == row[a])
            same = same[same > a]
            if same.size == 0:
                continue
            reached = np.zeros(npos, dtype=np.bool_)
            reached[images[:, a]] = True
            bad = same[~reached[same]]
            if bad.size:
                return k, int(a), int(bad[0])
    return -1, -1, -1


def _closedness_violation_loops(targets, stabilizers, stab_counts, perm, npos):
    for k in range(targets.shape[0]):
        for a in range(npos):
            t = targets[k, a]
            if t < 0:
                continue
            for b in range(a + 1, npos):
                if targets[k, b] != t:
                    continue
                found = False
                for j in range(stab_counts[k]):
                    if perm[stabilizers[k, j], a] % npos == b:
                        found = True
                        break
                if not found:
                    return k, a, b
    return -1, -1, -1


if HAVE_NUMBA:
    reduce_descents_jit = njit(cache=True)(_reduce_descents_loops)
    bruhat_closure_jit = njit(cache=True)(_bruhat_closure_loops)
    closedness_violation_jit = njit(cache=True)(_closedness_violation_loops)
else:  # pragma: no cover
    reduce_descents_jit = _reduce_descents_loops
    bruhat_closure_jit = _bruhat_closure_loops
    closedness_violation_jit = _closedness_violation_loops


def reduce_descents(start, desc, step, active):
    if USE_JIT:
        return reduce_descents_jit(
            np.ascontiguousarray(start, dtype=np.int64), desc, step, np.asarray(active, dtype=np.bool_)
        )
    return reduce_descents_numpy(start, desc, step, active)


def bruhat_closure(order, succ):
    if USE_JIT:
        return bruhat_closure_jit(np.ascontiguousarray(order, dtype=np.int64), succ)
    return bruhat_closure_numpy(order, succ)


def closedness_violation(targets, stabilizers, stab_counts, perm, npos):
    if USE_JIT:
        k, a, b = closedness_violation_jit(targets, stabilizers, stab_counts, perm, npos)
        return int(k), int(a), int(b)
    return closedness_violation_numpy(targets, stabilizers, stab_counts, perm, npos)
