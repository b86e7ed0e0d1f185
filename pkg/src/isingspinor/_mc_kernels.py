"""Hot loops of the Monte Carlo sampler, in numba and in plain numpy.

Both paths consume the same pre-drawn uniforms and make the same decisions,
so for a given seed they produce identical chains.  Set the environment
variable ``ISINGSPINOR_DISABLE_NUMBA=1`` to force the numpy path.

Spin arrays carry two extra slots at the end: a ghost spin fixed at +1
(index ``n``) and a padding slot fixed at 0 (index ``n + 1``) used for
missing neighbours.
"""
from __future__ import annotations

import os

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

ENV_FLAG = "ISINGSPINOR_DISABLE_NUMBA"


def numba_disabled() -> bool:
    return os.environ.get(ENV_FLAG, "").strip().lower() not in ("", "0", "false", "no")


try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


def heat_table(beta: float, width: int) -> np.ndarray:
    """P(spin = +1) for local fields ``-width .. width``; handles beta = inf.

    Shared by both paths so they never disagree through different ``exp``.
    """
    h = np.arange(-width, width + 1, dtype=float)
    if np.isinf(beta):
        return np.where(h > 0, 1.0, np.where(h < 0, 0.0, 0.5))
    return 1.0 / (1.0 + np.exp(-2.0 * beta * h))


# -- numpy path ---------------------------------------------------------------


def sw_sweeps_numpy(spins, bi, bj, p, ubond, uflip, oi, oj, record):
    n = spins.shape[0] - 2
    nn = n + 1  # spins plus ghost take part in clusters
    sweeps = ubond.shape[0]
    obs = np.empty(sweeps)
    configs = np.empty((sweeps, n), dtype=np.int8) if record else None
    for t in range(sweeps):
        open_ = (spins[bi] == spins[bj]) & (ubond[t] < p)
        g = coo_matrix((np.ones(int(open_.sum())), (bi[open_], bj[open_])), shape=(nn, nn))
        _, labels = connected_components(g, directed=False)
        first = np.full(labels.max() + 1, nn, dtype=np.int64)
        np.minimum.at(first, labels, np.arange(nn))
        flip = uflip[t][first[labels]] < 0.5
        flip &= labels != labels[n]
        spins[:nn][flip] *= -1
        obs[t] = spins[oi] * spins[oj]
        if record:
            configs[t] = spins[:n]
    return obs, configs


def heat_bath_numpy(spins, nbr, colors, table, u, oi, oj, record):
    n = spins.shape[0] - 2
    width = nbr.shape[1]
    sweeps = u.shape[0]
    obs = np.empty(sweeps)
    configs = np.empty((sweeps, n), dtype=np.int8) if record else None
    for t in range(sweeps):
        for c in colors:
            h = spins[nbr[c]].sum(axis=1)
            prob = table[h + width]
            spins[c] = np.where(u[t, c] < prob, 1, -1)
        obs[t] = spins[oi] * spins[oj]
        if record:
            configs[t] = spins[:n]
    return obs, configs


# -- numba path -----------------------------------------------------------------

if HAVE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def _find(parent, x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    @numba.njit(cache=True, nogil=True)
    def _sw_sweeps_numba(spins, bi, bj, p, ubond, uflip, oi, oj, record):
        n = spins.shape[0] - 2
        nn = n + 1
        sweeps = ubond.shape[0]
        nb = bi.shape[0]
        obs = np.empty(sweeps)
        configs = np.empty((sweeps if record else 0, n), dtype=np.int8)
        parent = np.empty(nn, dtype=np.int64)
        low = np.empty(nn, dtype=np.int64)
        for t in range(sweeps):
            for k in range(nn):
                parent[k] = k
            for b in range(nb):
                i = bi[b]
                j = bj[b]
                if spins[i] == spins[j] and ubond[t, b] < p:
                    ri = _find(parent, i)
                    rj = _find(parent, j)
                    if ri != rj:
                        if ri < rj:
                            parent[rj] = ri
                        else:
                            parent[ri] = rj
            # roots are the smallest index of each cluster since unions keep the lower root
            ghost_root = _find(parent, n)
            for k in range(nn):
                low[k] = _find(parent, k)
            for k in range(n):
                r = low[k]
                if r != ghost_root and uflip[t, r] < 0.5:
                    spins[k] = -spins[k]
            obs[t] = spins[oi] * spins[oj]
            if record:
                for k in range(n):
                    configs[t, k] = spins[k]
        return obs, configs

    @numba.njit(cache=True, nogil=True)
    def _heat_bath_numba(spins, nbr, order, starts, table, u, oi, oj, record):
        n = spins.shape[0] - 2
        width = nbr.shape[1]
        sweeps = u.shape[0]
        obs = np.empty(sweeps)
        configs = np.empty((sweeps if record else 0, n), dtype=np.int8)
        ncol = starts.shape[0] - 1
        for t in range(sweeps):
            for c in range(ncol):
                for q in range(starts[c], starts[c + 1]):
                    k = order[q]
                    h = 0
                    for r in range(nbr.shape[1]):
                        h += spins[nbr[k, r]]
                    spins[k] = 1 if u[t, k] < table[h + width] else -1
            obs[t] = spins[oi] * spins[oj]
            if record:
                for k in range(n):
                    configs[t, k] = spins[k]
        return obs, configs


def sw_sweeps(spins, bi, bj, p, ubond, uflip, oi, oj, record=False, use_numba=None):
    """Swendsen-Wang sweeps; clusters holding the ghost never flip."""
    if use_numba is None:
        use_numba = HAVE_NUMBA and not numba_disabled()
    if use_numba:
        obs, configs = _sw_sweeps_numba(spins, bi, bj, float(p), ubond, uflip, oi, oj, record)
        return obs, (configs if record else None)
    return sw_sweeps_numpy(spins, bi, bj, p, ubond, uflip, oi, oj, record)


def heat_bath_sweeps(spins, nbr, colors, beta, u, oi, oj, record=False, use_numba=None):
    """Checkerboard heat-bath sweeps; ``colors`` lists the index arrays of each sublattice."""
    if use_numba is None:
        use_numba = HAVE_NUMBA and not numba_disabled()
    table = heat_table(beta, nbr.shape[1])
    if use_numba:
        order = np.concatenate(colors).astype(np.int64) if colors else np.zeros(0, np.int64)
        starts = np.cumsum([0] + [len(c) for c in colors]).astype(np.int64)
        obs, configs = _heat_bath_numba(spins, nbr, order, starts, table, u, oi, oj, record)
        return obs, (configs if record else None)
    return heat_bath_numpy(spins, nbr, colors, table, u, oi, oj, record)
