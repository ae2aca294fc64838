"""Imaginary-time Strang iteration for sector eigenpairs.

One step maps ``phi -> S(h) phi`` with ``S(h) = B (1 - h A) B`` and
``B = exp(-h V / 2)``.  Repeated steps with renormalisation are a power
iteration for the largest eigenvalue of ``S``, i.e. the lowest of ``A + V``.
Excited states are reached by Gram-Schmidt deflation against converged lower
states of the same sector.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .grid import RadialGrid, WellPotential, make_grid
from .operators import (
    SCHEMES,
    Sector,
    SectorState,
    apply_hamiltonian,
    apply_kinetic,
    as_sector,
    sector_weights,
)
from .renorm import renormalize


class InstabilityError(FloatingPointError):
    """The iteration produced non-finite samples or left the positive cone."""


@dataclass(frozen=True)
class SolverParams:
    """Settings of the Strang iteration.

    Parameters
    ----------
    h : float, optional
        Evolution step. ``None`` means ``min(h_fraction * dx, h_max)`` on
        whatever grid is being solved.
    h_fraction, h_max : float
        ``h = dx / 4`` keeps ``h * lambda_max`` below one.  The splitting
        shifts each eigenvalue of ``S`` by O(h), more for states that feel the
        potential step than for the smooth continuum just above ``v0``; the
        cap keeps that shift well below the bound-to-continuum gap of shallow
        excited states on coarse grids.
    max_iters : int
        Hard cap on iterations per state.
    eig_tol : float
        Convergence threshold on successive eigenvalue estimates.
    ortho_every : int
        Iterations between deflation passes.
    symmetrize_parity : bool
        Project 1D states onto their parity class after every step.
    scheme : {"corrected", "skip"}
        Kernel discretisation, see :func:`cauchywell.operators.apply_kinetic`.
    escape_margin, escape_window : float, int
        Stop with an "escaped" verdict once the estimate stays above
        ``v0 + escape_margin`` for ``escape_window`` consecutive iterations
        while falling by less than ``eig_tol`` per iteration on average.  A
        state still relaxing from a rough seed is not stuck and is left alone.
    """

    h: float | None = None
    h_fraction: float = 0.25
    h_max: float | None = 5e-4
    max_iters: int = 200_000
    eig_tol: float = 1e-8
    ortho_every: int = 1
    symmetrize_parity: bool = True
    scheme: str = "corrected"
    method: str = "fast"
    escape_margin: float = 0.5
    escape_window: int = 1000

    def __post_init__(self):
        if self.h is not None and not self.h > 0:
            raise ValueError(f"h must be positive, got {self.h}")
        if not self.h_fraction > 0:
            raise ValueError("h_fraction must be positive")
        if self.h_max is not None and not self.h_max > 0:
            raise ValueError("h_max must be positive")
        if not self.eig_tol > 0:
            raise ValueError("eig_tol must be positive")
        if self.max_iters < 1 or self.ortho_every < 1:
            raise ValueError("max_iters and ortho_every must be at least 1")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")

    def step_for(self, grid: RadialGrid, v0: float = 0.0) -> float:
        """Resolve ``h`` on ``grid`` and check ``h < 2 / (pi / dx + v0)``."""
        h = self.h
        if h is None:
            h = self.h_fraction * grid.step_dx
            if self.h_max is not None:
                h = min(h, self.h_max)
        limit = 2.0 / (math.pi / grid.step_dx + v0)
        if h >= limit:
            raise ValueError(f"h={h:g} violates the stability bound {limit:g}")
        return h


@dataclass(frozen=True)
class EigenResult:
    """Outcome of one sector solve.

    ``eigenvalue_at_a`` is the Rayleigh quotient of the final state, which
    carries no O(h) splitting bias; the raw splitting estimate is kept in
    ``strang_estimate``.
    """

    v0: float
    sector: Sector
    n: int
    eigenvalue_at_a: float
    eigenvalue_renormalized: float
    cutoff_a: float
    step_dx: float
    iterations: int
    converged: bool
    eigenfunction: SectorState = field(repr=False)
    strang_estimate: float = math.nan
    escaped: bool = False
    residual: float = math.nan
    h: float = math.nan
    scheme: str = "corrected"

    @property
    def is_bound(self) -> bool:
        return self.converged and self.eigenvalue_renormalized < self.v0


# ---------------------------------------------------------------------------
# single-step primitives
# ---------------------------------------------------------------------------

def _half_potential(grid: RadialGrid, potential: WellPotential, h: float) -> np.ndarray:
    return np.exp(-0.5 * h * potential(grid.nodes))


def strang_step(state: SectorState, potential: WellPotential,
                params: SolverParams) -> SectorState:
    """Return ``S(h) state`` without renormalising."""
    h = params.step_for(state.grid, potential.v0)
    return _strang(state, _half_potential(state.grid, potential, h), h, params)


def _strang(state: SectorState, half: np.ndarray, h: float,
            params: SolverParams) -> SectorState:
    g = state.with_samples(half * state.samples)
    out = g.samples - h * apply_kinetic(g, params.method, params.scheme)
    out *= half
    if not np.all(np.isfinite(out)):
        raise InstabilityError("Strang step produced non-finite samples; reduce h")
    return state.with_samples(out)


def estimate_eigenvalue(before: SectorState, after: SectorState,
                        params: SolverParams, v0: float = 0.0) -> float:
    """``E = -ln <phi | S phi> / h`` for a normalised ``phi``."""
    h = params.step_for(before.grid, v0)
    w = sector_weights(before.grid, before.sector)
    return _estimate(float(np.sum(w * before.samples * after.samples)), h)


def _estimate(overlap: float, h: float) -> float:
    if not overlap > 0:
        raise InstabilityError(f"<phi|S phi> = {overlap:g} is not positive; reduce h")
    return -math.log(overlap) / h


# ---------------------------------------------------------------------------
# seeds
# ---------------------------------------------------------------------------

def seed_samples(grid: RadialGrid, sector, n: int) -> np.ndarray:
    """Trigonometric seed of the ``n``-th state, tapered by ``exp(-(|x| - 1))``."""
    sector = as_sector(sector)
    if n < 1:
        raise ValueError("state index n starts at 1")
    x = grid.nodes
    ax = np.abs(x)
    clipped = np.minimum(ax, 1.0)
    taper = np.exp(-np.maximum(ax - 1.0, 0.0))
    k = (2 * n - 1) * math.pi / 2
    if sector is Sector.ONED_ODD:
        inner = np.sign(x) * np.sin(k * clipped)
    elif sector is Sector.ONED_EVEN:
        inner = np.cos((n - 1) * math.pi * clipped)
    else:
        inner = np.sin(k * clipped) / clipped
    return inner * taper


def _resample(samples, source: RadialGrid | None, target: RadialGrid) -> np.ndarray:
    samples = np.asarray(samples, dtype=float)
    if source is None or source == target:
        if samples.shape != (target.size,):
            raise ValueError("seed does not match the grid")
        return samples.copy()
    return np.interp(target.nodes, source.nodes, samples, left=0.0, right=0.0)


def _as_seed(seed, grid: RadialGrid) -> np.ndarray:
    if isinstance(seed, SectorState):
        return _resample(seed.samples, seed.grid, grid)
    if isinstance(seed, EigenResult):
        return _as_seed(seed.eigenfunction, grid)
    return _resample(seed, None, grid)


# ---------------------------------------------------------------------------
# solves
# ---------------------------------------------------------------------------

def solve_state(v0: float, sector, n: int, grid: RadialGrid,
                params: SolverParams | None = None,
                deflation_basis=(), seed=None) -> EigenResult:
    """Converge the ``n``-th eigenpair of a sector by Strang iteration.

    Parameters
    ----------
    deflation_basis : sequence of SectorState
        The ``n - 1`` lower states of the sector, orthonormal in the sector
        inner product.
    seed : array, SectorState or EigenResult, optional
        Starting profile; samples on another grid are linearly resampled.
        Defaults to :func:`seed_samples`.
    """
    params = params or SolverParams()
    sector = as_sector(sector)
    potential = WellPotential(v0)
    h = params.step_for(grid, v0)
    half = _half_potential(grid, potential, h)
    w = sector_weights(grid, sector)
    basis = [b.samples for b in deflation_basis]
    for b in deflation_basis:
        if b.grid != grid or b.sector != sector:
            raise ValueError("deflation basis lives on another grid or sector")
    parity = 0
    if sector.is_1d and params.symmetrize_parity:
        parity = -1 if sector is Sector.ONED_ODD else 1

    def clean(f: np.ndarray, project: bool) -> np.ndarray:
        if project:
            for b in basis:
                f = f - np.sum(w * b * f) * b
        if parity:
            f = 0.5 * (f + parity * f[::-1])
        norm = math.sqrt(np.sum(w * f * f))
        if not norm > 0:
            raise InstabilityError("state collapsed to zero")
        return f / norm

    f0 = seed_samples(grid, sector, n) if seed is None else _as_seed(seed, grid)
    f = clean(f0, True)
    state = SectorState(grid, f, sector)
    estimate = math.inf
    converged = escaped = False
    above = 0
    window_start = math.inf
    it = 0
    for it in range(1, params.max_iters + 1):
        after = _strang(state, half, h, params).samples
        new = _estimate(float(np.sum(w * state.samples * after)), h)
        f = clean(after, it % params.ortho_every == 0)
        state = state.with_samples(f)
        if new > v0 + params.escape_margin:
            if above == 0:
                window_start = new
            above += 1
        else:
            above = 0
        delta = abs(new - estimate)
        estimate = new
        if delta < params.eig_tol:
            converged = True
            break
        if above >= params.escape_window:
            if window_start - new < params.eig_tol * above:
                escaped = True
                break
            above = 0

    hf = apply_hamiltonian(state, potential, params.method, params.scheme)
    rq = float(np.sum(w * f * hf))
    residual = math.sqrt(float(np.sum(w * (hf - rq * f) ** 2)))
    result = EigenResult(
        v0=float(v0), sector=sector, n=n, eigenvalue_at_a=rq,
        eigenvalue_renormalized=math.nan, cutoff_a=grid.cutoff_a,
        step_dx=grid.step_dx, iterations=it, converged=converged,
        eigenfunction=state, strang_estimate=estimate, escaped=escaped,
        residual=residual, h=h, scheme=params.scheme)
    return renormalize(result)


def solve_sector(v0: float, sector, n_max: int, grid: RadialGrid,
                 params: SolverParams | None = None, seeds=None) -> list[EigenResult]:
    """Solve states ``n = 1 .. n_max`` of one sector, deflating as it climbs."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    seeds = list(seeds) if seeds is not None else []
    results: list[EigenResult] = []
    for n in range(1, n_max + 1):
        seed = seeds[n - 1] if n - 1 < len(seeds) else None
        basis = [r.eigenfunction for r in results]
        results.append(solve_state(v0, sector, n, grid, params, basis, seed))
    return results


def level_grids(grid: RadialGrid, coarsest_step: float = 0.04) -> list[RadialGrid]:
    """Chain of grids from coarse to ``grid``, halving the step each level."""
    chain = [grid]
    while chain[0].step_dx * 2 <= coarsest_step + 1e-12:
        try:
            chain.insert(0, make_grid(grid.kind, grid.cutoff_a, chain[0].step_dx * 2))
        except ValueError:
            break
    return chain


def solve_multilevel(v0: float, sector, n_max: int, grid: RadialGrid,
                     params: SolverParams | None = None, seeds=None,
                     coarsest_step: float = 0.04) -> list[EigenResult]:
    """:func:`solve_sector` on a coarse-to-fine chain of grids.

    Each level is seeded with the converged states of the level below, so the
    fine grid only has to remove an O(dx) seed error.  All levels use the
    step ``h`` of the finest grid: the splitting bias grows with ``h`` and at
    coarse ``h`` it can lift a shallow bound state above the continuum, which
    would send the deflated iteration to the wrong state.  The returned
    results belong to ``grid``; the total iteration count of each state over
    all levels is reported.
    """
    params = params or SolverParams()
    params = replace(params, h=params.step_for(grid, v0))
    results = None
    total = [0] * n_max
    for level in level_grids(grid, coarsest_step):
        results = solve_sector(v0, sector, n_max, level, params,
                               seeds if results is None else results)
        total = [t + r.iterations for t, r in zip(total, results)]
    return [replace(r, iterations=t) for r, t in zip(results, total)]
