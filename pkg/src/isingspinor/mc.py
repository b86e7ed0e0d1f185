"""Monte Carlo estimates of the energy density with plus or free boundary.

Plus boundary: spins on the faces of the domain, every other square
touching it frozen at +1 and merged into one ghost spin.  Free boundary:
spins on the vertices of the domain, no ghost coupling.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import _mc_kernels as kernels
from .contours import BETA_C
from .lattice import DiscreteDomain, Point

SQRT2_HALF = math.sqrt(0.5)
CHUNK = 4096


@dataclass(frozen=True)
class MCParams:
    beta: float = BETA_C
    burn_in: int = 1000
    sweeps: int = 100_000
    seed: int = 0
    algorithm: str = "cluster"
    batches: int = 32
    chains: int = 1

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.algorithm not in ("cluster", "single-flip"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.batches < 16:
            raise ValueError("at least 16 batches are needed for batch-means errors")
        if self.sweeps < self.batches:
            raise ValueError("need at least one sweep per batch")


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    samples: int
    seed: int
    batches: int

    def to_dict(self) -> dict:
        return asdict(self)

    def within(self, value: float, k: float = 3.0) -> bool:
        return abs(self.mean - value) <= k * self.stderr


@dataclass
class SpinSystem:
    """Spin sites, ferromagnetic bonds and sublattice colouring.

    Index ``n`` is the ghost (+1), ``n + 1`` a zero padding slot.
    """

    sites: tuple
    bonds_i: np.ndarray
    bonds_j: np.ndarray
    neighbours: np.ndarray
    colors: list

    @property
    def n(self) -> int:
        return len(self.sites)

    @property
    def ghost(self) -> int:
        return self.n

    def initial_spins(self) -> np.ndarray:
        s = np.ones(self.n + 2, dtype=np.int8)
        s[-1] = 0
        return s


def _build(sites, neighbour_of, outside_index) -> SpinSystem:
    index = {p: i for i, p in enumerate(sites)}
    n = len(sites)
    bi, bj = [], []
    nbr = np.full((n, 4), n + 1, dtype=np.int64)
    for i, p in enumerate(sites):
        for r, q in enumerate(neighbour_of(p)):
            j = index.get(q, outside_index)
            nbr[i, r] = j
            if j == n + 1:
                continue
            if j == n or i < j:
                bi.append(i)
                bj.append(j)
    colors = [
        np.array([i for i, p in enumerate(sites) if ((p[0] + p[1]) // 2) % 2 == c], dtype=np.int64) for c in (0, 1)
    ]
    return SpinSystem(tuple(sites), np.array(bi, np.int64), np.array(bj, np.int64), nbr, colors)


def plus_system(domain: DiscreteDomain) -> SpinSystem:
    """Spins on faces; every neighbouring non-face square is the + ghost."""
    sites = domain.dual_vertices
    n = len(sites)
    return _build(sites, lambda p: [(p[0] + 2, p[1]), (p[0] - 2, p[1]), (p[0], p[1] + 2), (p[0], p[1] - 2)], n)


def free_system(domain: DiscreteDomain) -> SpinSystem:
    """Spins on vertices (doubled coordinates), nothing outside."""
    sites = tuple((2 * j, 2 * k) for j, k in domain.vertices)
    n = len(sites)
    return _build(sites, lambda p: [(p[0] + 2, p[1]), (p[0] - 2, p[1]), (p[0], p[1] + 2), (p[0], p[1] - 2)], n + 1)


def _site(system: SpinSystem, p: Point, frozen: int) -> int:
    try:
        return system.sites.index(p)
    except ValueError:
        return frozen


def observable_sites(domain: DiscreteDomain, a: Point, boundary: str) -> tuple[SpinSystem, int, int]:
    """Spin system and the two sites whose product is measured at ``a``."""
    if not domain.is_interior_horizontal(a):
        raise ValueError(f"{a} is not the midpoint of a horizontal edge of the domain")
    if boundary == "plus":
        sys_ = plus_system(domain)
        north, south = (a[0], a[1] + 1), (a[0], a[1] - 1)
        return sys_, _site(sys_, north, sys_.ghost), _site(sys_, south, sys_.ghost)
    if boundary == "free":
        sys_ = free_system(domain)
        east, west = (a[0] + 1, a[1]), (a[0] - 1, a[1])
        return sys_, sys_.sites.index(east), sys_.sites.index(west)
    raise ValueError(f"boundary must be 'plus' or 'free', not {boundary!r}")


def chain_rng(seed: int, chain: int = 0) -> np.random.Generator:
    """Counter-based Philox stream for ``(seed, chain)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(chain)])))


def _run(system: SpinSystem, oi: int, oj: int, params: MCParams, chain: int, total: int, record: bool, use_numba):
    rng = chain_rng(params.seed, chain)
    spins = system.initial_spins()
    n, nb = system.n, len(system.bonds_i)
    p_bond = -math.expm1(-2.0 * params.beta)
    done = 0
    while done < total:
        m = min(CHUNK, total - done)
        if params.algorithm == "cluster":
            u = rng.random((m, nb + n + 1))
            obs, cfg = kernels.sw_sweeps(
                spins, system.bonds_i, system.bonds_j, p_bond, u[:, :nb], u[:, nb:], oi, oj, record, use_numba
            )
        else:
            u = rng.random((m, n))
            obs, cfg = kernels.heat_bath_sweeps(
                spins, system.neighbours, system.colors, params.beta, u, oi, oj, record, use_numba
            )
        done += m
        yield obs, cfg


def sample_chain(system: SpinSystem, oi: int, oj: int, params: MCParams, chain: int = 0, use_numba=None):
    """Observable time series after burn-in for one chain."""
    total = params.burn_in + params.sweeps
    out = np.concatenate([obs for obs, _ in _run(system, oi, oj, params, chain, total, False, use_numba)])
    return out[params.burn_in :]


def sample_plus(domain: DiscreteDomain, params: MCParams, use_numba=None):
    """Stream of face-spin configurations (int8 arrays) after burn-in."""
    system = plus_system(domain)
    total = params.burn_in + params.sweeps
    seen = 0
    for _, cfg in _run(system, system.n + 1, system.n + 1, params, 0, total, True, use_numba):
        for row in cfg:
            if seen >= params.burn_in:
                yield row.copy()
            seen += 1


def batch_means(series: np.ndarray, batches: int) -> tuple[float, float]:
    usable = (len(series) // batches) * batches
    means = series[:usable].reshape(batches, -1).mean(axis=1)
    return float(means.mean()), float(means.std(ddof=1) / math.sqrt(batches))


def estimate_energy(
    domain: DiscreteDomain, a: Point, boundary: str = "plus", params: MCParams | None = None, threads: int = 1, use_numba=None
) -> Estimate:
    """Batch-means estimate of ``E[sigma sigma] - sqrt(2)/2`` across the edge at ``a``."""
    params = params or MCParams()
    system, oi, oj = observable_sites(domain, a, boundary)
    chains = range(params.chains)
    if threads > 1 and params.chains > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            series = list(pool.map(lambda c: sample_chain(system, oi, oj, params, c, use_numba), chains))
    else:
        series = [sample_chain(system, oi, oj, params, c, use_numba) for c in chains]
    means = []
    for s in series:
        usable = (len(s) // params.batches) * params.batches
        means.append(s[:usable].reshape(params.batches, -1).mean(axis=1))
    allm = np.concatenate(means)
    mean = float(allm.mean()) - SQRT2_HALF
    se = float(allm.std(ddof=1) / math.sqrt(len(allm)))
    return Estimate(mean, se, sum(len(s) for s in series), params.seed, len(allm))


def disagreement_sizes(domain: DiscreteDomain, configs) -> np.ndarray:
    """Number of primal edges separating unequal face spins (outside squares count as +)."""
    index = {d: i for i, d in enumerate(domain.dual_vertices)}
    pairs = [tuple(index.get(d, -1) for d in domain.dual_of(e)) for e in domain.edges]
    cfg = np.asarray(configs)
    padded = np.concatenate([cfg, np.ones((cfg.shape[0], 1), dtype=cfg.dtype)], axis=1)
    i = np.array([p[0] for p in pairs])
    j = np.array([p[1] for p in pairs])
    return (padded[:, i] != padded[:, j]).sum(axis=1)
