"""Bound-state existence, threshold scans, tables and observables."""
from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import factorial, lpmv

from .evolution import EigenResult, SolverParams, solve_multilevel
from .grid import RadialGrid, make_grid
from .operators import Sector, SectorState, as_sector, sector_norm, sector_weights

# Infinite spherical well eigenvalues E_(n,l) of the Cauchy operator, taken
# from the literature (not computed here).
INFINITE_WELL_REFERENCE = {
    (0, 1): 2.754769, (0, 2): 5.892214, (0, 3): 9.033009,
    (1, 1): 4.121332, (1, 2): 7.342181,
    (2, 1): 5.400079, (2, 2): 8.718436,
}


class Verdict(str, enum.Enum):
    EXISTS = "exists"
    ABSENT = "absent"
    UNDETERMINED = "undetermined"


class ScanError(RuntimeError):
    """A scan met an undetermined verdict; finer solver settings are needed."""


def sector_for(l: int, route: str = "auto") -> Sector:
    """Solver sector for orbital ``l``; ``l = 0`` runs on the odd line route
    unless ``route="direct"`` asks for the radial kernel."""
    if l not in (0, 1, 2):
        raise ValueError(f"no kernel for l={l}; only l = 0, 1, 2 are available")
    if route not in ("auto", "oned", "direct"):
        raise ValueError(f"unknown route {route!r}")
    if l == 0:
        return Sector.L0_DIRECT if route == "direct" else Sector.ONED_ODD
    if route == "oned":
        raise ValueError("the line route only exists for l = 0")
    return Sector.L1 if l == 1 else Sector.L2


def default_grid(sector, cutoff_a: float = 50.0, step_dx: float = 0.001) -> RadialGrid:
    return make_grid(as_sector(sector).grid_kind, cutoff_a, step_dx)


def judge(result: EigenResult) -> Verdict:
    """Strict rule ``E_inf < v0`` on a converged result."""
    if result.escaped:
        return Verdict.ABSENT
    if not result.converged:
        return Verdict.UNDETERMINED
    return Verdict.EXISTS if result.eigenvalue_renormalized < result.v0 else Verdict.ABSENT


def _ladder(v0, sector, n, grid, params, seeds):
    return solve_multilevel(v0, sector, n, grid, params, seeds)


def exists_bound_state(v0: float, sector, n: int, grid: RadialGrid,
                       params: SolverParams | None = None,
                       seeds=None) -> tuple[Verdict, EigenResult]:
    """Solve the ``n``-th state of a sector and decide whether it is bound.

    The renormalised eigenvalue decides: a raw value below ``v0`` whose
    ``a -> inf`` extrapolation is not below ``v0`` is a truncation artefact.
    """
    ladder = _ladder(v0, sector, n, grid, params, seeds)
    return judge(ladder[-1]), ladder[-1]


@dataclass(frozen=True)
class ThresholdReport:
    """Bracket ``(v0_lower, v0_upper]`` holding the existence threshold."""

    sector: Sector
    n: int
    v0_lower: float | None
    v0_upper: float | None
    resolution: float
    found: bool
    upper_result: EigenResult | None = field(default=None, repr=False)
    verdicts: dict = field(default_factory=dict, repr=False)

    @property
    def l(self) -> int:
        return self.sector.orbital_l


def scan_threshold(sector, n: int, v0_start: float, v0_stop: float,
                   resolution: float = 0.1, grid: RadialGrid | None = None,
                   params: SolverParams | None = None, strategy: str = "walk",
                   warm_start: bool = True) -> ThresholdReport:
    """Locate the first ``v0`` on the lattice ``v0_start + k * resolution``
    where the ``n``-th state of ``sector`` exists.

    ``strategy="walk"`` steps upward and stops at the first bracket.
    ``"bisect"`` relies on existence being monotone in ``v0`` and finds the
    same bracket with O(log K) solves.
    """
    sector = as_sector(sector)
    if not v0_start < v0_stop:
        raise ValueError("need v0_start < v0_stop")
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    if strategy not in ("walk", "bisect"):
        raise ValueError(f"unknown strategy {strategy!r}")
    grid = grid or default_grid(sector)
    count = int(math.floor((v0_stop - v0_start) / resolution + 1e-9))
    lattice = [round(v0_start + k * resolution, 10) for k in range(count + 1)]
    verdicts: dict[float, Verdict] = {}
    ladders: dict[int, list[EigenResult]] = {}

    def probe(k: int) -> Verdict:
        seeds = None
        if warm_start and ladders:
            seeds = ladders[min(ladders, key=lambda j: abs(j - k))]
        ladder = _ladder(lattice[k], sector, n, grid, params, seeds)
        ladders[k] = ladder
        verdict = judge(ladder[-1])
        verdicts[lattice[k]] = verdict
        if verdict is Verdict.UNDETERMINED:
            raise ScanError(f"undetermined verdict at v0={lattice[k]}; "
                            "tighten the solver settings")
        return verdict

    def report(lo: int | None, hi: int | None) -> ThresholdReport:
        if lo is None or hi is None:
            return ThresholdReport(sector, n, None, None, resolution, False,
                                   verdicts=verdicts)
        return ThresholdReport(sector, n, lattice[lo], lattice[hi], resolution, True,
                               ladders[hi][-1], verdicts)

    if strategy == "walk":
        previous = None
        for k in range(len(lattice)):
            verdict = probe(k)
            if verdict is Verdict.EXISTS:
                return report(previous, k) if previous is not None else report(None, None)
            previous = k
        return report(None, None)

    lo, hi = 0, len(lattice) - 1
    if probe(lo) is Verdict.EXISTS or probe(hi) is Verdict.ABSENT:
        return report(None, None)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if probe(mid) is Verdict.EXISTS:
            hi = mid
        else:
            lo = mid
    return report(lo, hi)


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TableCell:
    l: int
    n: int
    v0: float
    verdict: Verdict
    eigenvalue_at_a: float | None
    eigenvalue_renormalized: float | None
    route: str

    @property
    def present(self) -> bool:
        return self.verdict is Verdict.EXISTS


@dataclass(frozen=True)
class SpectrumTable:
    """Renormalised eigenvalues on a ``v0`` x ``(l, n)`` lattice."""

    v0_values: tuple
    rows: tuple  # ((l, n), ...)
    cells: dict = field(repr=False)

    def cell(self, l: int, n: int, v0: float) -> TableCell:
        return self.cells[(l, n, round(v0, 10))]

    def reference(self, l: int, n: int) -> float | None:
        return INFINITE_WELL_REFERENCE.get((l, n))


def _table_ladder(task):
    v0, sector, n_max, grid, params = task
    try:
        return _ladder(v0, sector, n_max, grid, params, None)
    except (FloatingPointError, ValueError):
        return None


def spectrum_table(v0_values, sectors: dict, grid_for=None,
                   params: SolverParams | None = None, route: str = "auto",
                   jobs: int = 1) -> SpectrumTable:
    """Fill a table by solving each ``(l, v0)`` ladder once.

    ``sectors`` maps ``l`` to the number of states wanted; ``grid_for`` maps a
    sector to its grid (default: ``a = 50``, ``dx = 0.001``).  With
    ``jobs > 1`` the independent ladders run in worker processes.
    """
    grid_for = grid_for or default_grid
    v0_values = tuple(round(float(v), 10) for v in v0_values)
    tasks, keys = [], []
    for l, n_max in sorted(sectors.items()):
        sector = sector_for(l, route)
        grid = grid_for(sector)
        for v0 in v0_values:
            tasks.append((v0, sector, n_max, grid, params))
            keys.append((l, v0))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            ladders = list(pool.map(_table_ladder, tasks))
    else:
        ladders = [_table_ladder(t) for t in tasks]

    cells = {}
    for (l, v0), task, ladder in zip(keys, tasks, ladders):
        sector, n_max = task[1], task[2]
        for n in range(1, n_max + 1):
            if ladder is None:
                cells[(l, n, v0)] = TableCell(l, n, v0, Verdict.UNDETERMINED,
                                              None, None, sector.value)
                continue
            r = ladder[n - 1]
            cells[(l, n, v0)] = TableCell(l, n, v0, judge(r), r.eigenvalue_at_a,
                                          r.eigenvalue_renormalized, sector.value)
    rows = tuple((l, n) for l, n_max in sorted(sectors.items())
                 for n in range(1, n_max + 1))
    return SpectrumTable(v0_values, rows, cells)


# ---------------------------------------------------------------------------
# observables
# ---------------------------------------------------------------------------

def radial_state(result_or_state) -> SectorState:
    """3D radial profile of a result, normalised in its sector metric.

    Odd line states ``g`` map to ``f(r) = g(r) / r`` on the positive half of
    the grid, which has the same midpoint nodes as the radial grid.
    """
    state = result_or_state.eigenfunction if isinstance(result_or_state, EigenResult) \
        else result_or_state
    if state.sector is Sector.ONED_EVEN:
        raise ValueError("even line states have no 3D counterpart")
    if state.sector is Sector.ONED_ODD:
        grid = state.grid
        radial = make_grid("radial", grid.cutoff_a, grid.step_dx)
        g = state.samples[grid.size // 2:]
        state = SectorState(radial, g / radial.nodes, Sector.L0_DIRECT)
        return state.with_samples(state.samples / sector_norm(state))
    return state


def probability_ratio(result) -> float:
    """``P_out / P_in`` of a normalised bound state, with the well at ``r < 1``."""
    state = result.eigenfunction if isinstance(result, EigenResult) else result
    if abs(sector_norm(state) - 1.0) > 1e-6:
        raise ValueError("probability_ratio needs a normalised state")
    state = radial_state(state)
    density = sector_weights(state.grid, state.sector) * state.samples**2
    inside = float(np.sum(density[state.grid.nodes < 1.0]))
    total = float(np.sum(density))
    if not inside > 0:
        raise ValueError("state has no weight inside the well")
    return (total - inside) / inside


def spherical_harmonic_sq(l: int, m: int, theta) -> np.ndarray:
    """``|Y_l^m(theta, phi)|^2`` in the orthonormal convention."""
    if l < 0 or abs(m) > l:
        raise ValueError(f"invalid (l, m) = ({l}, {m})")
    m = abs(m)
    norm = (2 * l + 1) / (4 * math.pi) * factorial(l - m) / factorial(l + m)
    return norm * lpmv(m, l, np.cos(np.asarray(theta, dtype=float))) ** 2


@dataclass(frozen=True)
class DensityField:
    """``|psi|^2`` on an ``(r, theta)`` lattice; ``values[i, j]`` at ``(r[i], theta[j])``."""

    r: np.ndarray
    theta: np.ndarray
    values: np.ndarray

    def triples(self):
        rr, tt = np.meshgrid(self.r, self.theta, indexing="ij")
        return np.column_stack([rr.ravel(), tt.ravel(), self.values.ravel()])


def density_profile(result, l: int, m: int, theta=360, r_max: float | None = None,
                    stride: int = 1) -> DensityField:
    """Probability density ``C_l r^(2l) f(r)^2 |Y_l^m(theta)|^2``.

    ``C_l`` is the sector prefactor, which makes the field integrate to one
    over space for a normalised sector state.
    """
    if l not in (0, 1, 2) or abs(m) > l:
        raise ValueError(f"invalid (l, m) = ({l}, {m})")
    state = radial_state(result)
    if state.sector.orbital_l != l:
        raise ValueError(f"state belongs to l={state.sector.orbital_l}, not l={l}")
    if np.isscalar(theta):
        theta = np.linspace(0.0, math.pi, int(theta))
    theta = np.asarray(theta, dtype=float)
    r = state.grid.nodes
    keep = slice(None, None, stride)
    f = state.samples
    if r_max is not None:
        mask = r <= r_max
        r, f = r[mask], f[mask]
    r, f = r[keep], f[keep]
    radial = state.sector.weight_prefactor * r ** (2 * l) * f**2
    values = radial[:, None] * spherical_harmonic_sq(l, m, theta)[None, :]
    return DensityField(r, theta, values)


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def nonrel_bound_count(v0: float) -> int:
    """Number of odd-parity bound states of ``-d^2/dx^2`` in the unit well.

    There are exactly ``n`` when ``(2n-1)^2 pi^2/4 < v0 < (2n+1)^2 pi^2/4``.
    """
    if not v0 > 0:
        raise ValueError("v0 must be positive")
    root = math.sqrt(v0)
    k = round((root / (math.pi / 2) - 1) / 2)
    if k >= 0 and math.isclose(root, (2 * k + 1) * math.pi / 2, rel_tol=1e-12):
        raise ValueError(f"v0={v0} sits on a degenerate threshold")
    return int(math.floor((root / (math.pi / 2) + 1) / 2))


def infinite_well_asymptote(n: int) -> float:
    """Large-``n`` estimate ``n pi / 2 - pi / 8`` of the line infinite-well levels."""
    if n < 1:
        raise ValueError("n starts at 1")
    return n * math.pi / 2 - math.pi / 8
