"""Discretised Cauchy operator ``sqrt(-Laplacian)`` in each orbital sector.

Every sector operator is applied on a midpoint grid by a nodal sum that skips
the singular node (``u = x`` or ``r = p``); paired cells then cancel the odd
part of the principal-value integrand.

Two evaluation routes exist for each kernel:

* ``method="direct"`` is the O(N^2) reference: it sums the integrand exactly
  as written, row by row.
* ``method="fast"`` (default) splits the kernel into Toeplitz and Hankel
  pieces in the node index and evaluates them with FFTs in O(N log N).  For
  ``l >= 1`` the Hankel/Toeplitz split carries ``1/p**(2l+1)`` prefactors that
  amplify FFT round-off near the origin, so the first rows are replaced by
  exactly summed rows built from the cancellation-free kernel form.

Radial sectors use sector-weighted inner products ``<f, g> = C_l sum r**w f g dx``
with ``(C_l, w)`` = ``(4 pi, 2)``, ``(4 pi / 3, 4)``, ``(16 pi / 5, 6)`` for
``l = 0, 1, 2``; the line sectors use the plain L2 product.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from .grid import RadialGrid, WellPotential


class Sector(str, enum.Enum):
    ONED_EVEN = "oneD_even"
    ONED_ODD = "oneD_odd"
    L0_DIRECT = "l0_direct"
    L1 = "l1"
    L2 = "l2"

    @property
    def is_1d(self) -> bool:
        return self in (Sector.ONED_EVEN, Sector.ONED_ODD)

    @property
    def grid_kind(self) -> str:
        return "symmetric" if self.is_1d else "radial"

    @property
    def orbital_l(self) -> int | None:
        """Orbital index of the 3D state the sector describes."""
        return {Sector.ONED_ODD: 0, Sector.L0_DIRECT: 0, Sector.L1: 1,
                Sector.L2: 2}.get(self)

    @property
    def weight_exponent(self) -> int:
        return {Sector.L0_DIRECT: 2, Sector.L1: 4, Sector.L2: 6}.get(self, 0)

    @property
    def weight_prefactor(self) -> float:
        return {Sector.L0_DIRECT: 4 * np.pi, Sector.L1: 4 * np.pi / 3,
                Sector.L2: 16 * np.pi / 5}.get(self, 1.0)


def as_sector(value) -> Sector:
    return value if isinstance(value, Sector) else Sector(value)


class OperatorError(FloatingPointError):
    """Kernel output was not finite: the input state is malformed."""


@dataclass(frozen=True)
class SectorState:
    """Sampled profile ``f`` on a grid, tagged with its orbital sector."""

    grid: RadialGrid
    samples: np.ndarray
    sector: Sector

    def __post_init__(self):
        object.__setattr__(self, "sector", as_sector(self.sector))
        samples = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", samples)
        if samples.shape != (self.grid.size,):
            raise ValueError(f"expected {self.grid.size} samples, got {samples.shape}")
        if self.grid.kind != self.sector.grid_kind:
            raise ValueError(f"sector {self.sector.value} needs a {self.sector.grid_kind} grid")

    @property
    def weight_exponent(self) -> int:
        return self.sector.weight_exponent

    def with_samples(self, samples) -> "SectorState":
        return SectorState(self.grid, samples, self.sector)


def sector_weights(grid: RadialGrid, sector) -> np.ndarray:
    """Quadrature weights ``C_l |x|**w dx`` of the sector inner product."""
    sector = as_sector(sector)
    x = np.abs(grid.nodes)
    return sector.weight_prefactor * x ** sector.weight_exponent * grid.step_dx


def _check_compatible(s1: SectorState, s2: SectorState) -> None:
    if s1.sector != s2.sector:
        raise ValueError(f"sector mismatch: {s1.sector.value} vs {s2.sector.value}")
    if s1.grid != s2.grid:
        raise ValueError("states live on different grids")


def sector_inner(s1: SectorState, s2: SectorState) -> float:
    _check_compatible(s1, s2)
    w = sector_weights(s1.grid, s1.sector)
    return float(np.sum(w * s1.samples * s2.samples))


def sector_norm(state: SectorState) -> float:
    return float(np.sqrt(sector_inner(state, state)))


def normalized(state: SectorState) -> SectorState:
    norm = sector_norm(state)
    if not norm > 0:
        raise ValueError("cannot normalise a zero state")
    return state.with_samples(state.samples / norm)


def apply_potential(state: SectorState, potential: WellPotential) -> np.ndarray:
    return potential(state.grid.nodes) * state.samples


# ---------------------------------------------------------------------------
# cancellation-free radial kernel
# ---------------------------------------------------------------------------

_SECTOR_CONST = {0: 1 / np.pi, 1: 1 / (2 * np.pi), 2: 1 / (4 * np.pi)}
_SERIES_SWITCH = 0.5
_SERIES_TERMS = 64


def _series_coefficients(l: int) -> np.ndarray:
    m = np.arange(_SERIES_TERMS, dtype=float)
    if l == 1:
        m = m + 1
        return 16 * m * (m + 1) / (2 * m + 1)
    m = m + 2
    return 16 * m * (4 * m**2 - 4) / (4 * m**2 - 1)


def reduced_profile(l: int, t) -> np.ndarray:
    """``H_l(t)`` for ``0 < t < 1``: the sector kernel with its small-t zero removed.

    The off-diagonal weight of the sector-``l`` radial kernel between radii
    ``r`` and ``p`` is ``-c_l H_l(t) / max(r, p)**2 * (r/p)**(2l+2 if r < p else 0)``
    with ``t = min/max``.  For ``l >= 1`` the closed form cancels to
    ``O(t**(2l+1))``, so small ``t`` is evaluated from its Taylor series.
    """
    t = np.asarray(t, dtype=float)
    t2 = t * t
    if l == 0:
        return 4.0 / (1.0 - t2) ** 2
    out = np.empty_like(t)
    small = t < _SERIES_SWITCH
    if np.any(small):
        out[small] = np.polynomial.polynomial.polyval(t2[small], _series_coefficients(l))
    big = ~small
    if np.any(big):
        tb, tb2 = t[big], t2[big]
        at = np.arctanh(tb)
        if l == 1:
            g = 4 * tb * (1 + tb2) / (1 - tb2) ** 2 - 4 * at
            out[big] = g / tb**3
        else:
            g = 4 * tb * (3 - 2 * tb2 + 3 * tb2**2) / (1 - tb2) ** 2 - 12 * (1 + tb2) * at
            out[big] = g / tb**5
    return out


def _radial_offdiag_unit(l: int, rho: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Off-diagonal kernel entries in index units (multiply by ``1/dx``).

    ``rho`` are column (integration) coordinates, ``sigma`` row coordinates,
    both of the form ``j + 1/2``; broadcasting is supported, ``rho == sigma``
    entries are returned as 0.
    """
    rho, sigma = np.broadcast_arrays(np.asarray(rho, float), np.asarray(sigma, float))
    lo = np.minimum(rho, sigma)
    hi = np.maximum(rho, sigma)
    t = lo / hi
    same = rho == sigma
    t = np.where(same, 0.5, t)
    h = reduced_profile(l, t)
    out = np.where(rho > sigma, h / hi**2, t ** (2 * l + 2) * h / hi**2)
    out = -_SECTOR_CONST[l] * out
    return np.where(same, 0.0, out)


@lru_cache(maxsize=64)
def _partial_sums(n: int) -> tuple[np.ndarray, np.ndarray]:
    k = np.arange(1, n + 1, dtype=float)
    s1 = np.concatenate([[0.0], np.cumsum(1.0 / k)])
    s2 = np.concatenate([[0.0], np.cumsum(1.0 / k**2)])
    return s1, s2


@lru_cache(maxsize=32)
def _radial_diagonal(n: int) -> np.ndarray:
    """``sum_{j != i} 4 rho_j^2 / (rho_j^2 - sigma_i^2)^2`` in closed form.

    Partial fractions turn the summand into ``1/k^2 + 1/m^2 + (1/k - 1/m)/sigma``
    with ``k = j - i`` and ``m = i + j + 1``, whose sums are differences of
    harmonic-type prefix sums.
    """
    h1, h2 = _partial_sums(2 * n)
    i = np.arange(n)
    sigma = i + 0.5
    m_self = 2 * i + 1.0
    sum_k2 = h2[i] + h2[n - 1 - i]
    sum_k1 = h1[n - 1 - i] - h1[i]
    sum_m2 = h2[i + n] - h2[i] - 1.0 / m_self**2
    sum_m1 = h1[i + n] - h1[i] - 1.0 / m_self
    return sum_k2 + sum_m2 + (sum_k1 - sum_m1) / sigma


def _cauchy_1d_diagonal(n: int, window: int) -> np.ndarray:
    # every node sees the full window; offsets past the grid meet f = 0
    _, h2 = _partial_sums(window)
    return np.full(n, 2 * h2[window])


def kernel_rows(grid: RadialGrid, sector, rows=None) -> np.ndarray:
    """Dense rows of the discretised sector operator ``A`` (potential excluded).

    Entries are built pointwise from the cancellation-free kernel, so this is
    independent of the FFT route.  ``rows`` defaults to all rows.
    """
    sector = as_sector(sector)
    n, dx = grid.size, grid.step_dx
    rows = np.arange(n) if rows is None else np.atleast_1d(np.asarray(rows, dtype=int))
    cols = np.arange(n)
    if sector.is_1d:
        k = cols[None, :] - rows[:, None]
        with np.errstate(divide="ignore"):
            mat = np.where((k != 0) & (np.abs(k) <= grid.window), -1.0 / (np.pi * k**2), 0.0)
        diag = _cauchy_1d_diagonal(n, grid.window)[rows] / np.pi
    else:
        l = sector.orbital_l
        mat = _radial_offdiag_unit(l, cols[None, :] + 0.5, rows[:, None] + 0.5)
        diag = _radial_diagonal(n)[rows] / np.pi
    mat[np.arange(rows.size), rows] = diag
    return mat / dx


# ---------------------------------------------------------------------------
# direct reference sums (the integrand exactly as written)
# ---------------------------------------------------------------------------

_CHUNK_ENTRIES = 2_000_000


def _row_chunks(n: int):
    step = max(1, _CHUNK_ENTRIES // max(n, 1))
    for start in range(0, n, step):
        yield slice(start, min(n, start + step))


def _cauchy_1d_direct(f: np.ndarray, grid: RadialGrid) -> np.ndarray:
    n, dx, window = f.size, grid.step_dx, grid.window
    padded = np.concatenate([np.zeros(window), f, np.zeros(window)])
    k = np.arange(-window, window + 1)
    k = k[k != 0]
    out = np.empty_like(f)
    for sl in _row_chunks(n):
        rows = np.arange(n)[sl]
        fu = padded[rows[:, None] + window + k[None, :]]
        out[sl] = np.sum((f[rows, None] - fu) / (k * dx) ** 2, axis=1) * dx / np.pi
    return out


def _radial_direct(f: np.ndarray, grid: RadialGrid, l: int) -> np.ndarray:
    r, dx = grid.nodes, grid.step_dx
    out = np.empty_like(f)
    for sl in _row_chunks(r.size):
        p = r[sl, None]
        fp = f[sl, None]
        fr = f[None, :]
        rr = r[None, :]
        skip = rr == p
        with np.errstate(divide="ignore", invalid="ignore"):
            kern = 1.0 / (rr - p) ** 2 - 1.0 / (rr + p) ** 2
            logs = 2 * np.log(np.abs(rr - p)) - 2 * np.log(rr + p)
            if l == 0:
                terms = (fp - fr) * rr * kern / (np.pi * p)
            elif l == 1:
                terms = ((rr / p) * (2 * fp - (rr**2 + p**2) / p**2 * fr) * kern
                         - rr * fr / p**3 * logs) / (2 * np.pi)
            else:
                poly = (3 * (rr**4 + p**4) - 2 * rr**2 * p**2) / p**4
                terms = ((rr / p) * (4 * fp - fr * poly) * kern
                         - 3 * fr * rr * (rr**2 + p**2) / p**5 * logs) / (4 * np.pi)
        out[sl] = np.where(skip, 0.0, terms).sum(axis=1) * dx
    return out


# ---------------------------------------------------------------------------
# FFT route
# ---------------------------------------------------------------------------

# Sector-l off-diagonal part, in index units, is
#   -c_l / (dx sigma**(2l+1)) * sum_q sigma**(2q) * sum coef * T_kind(rho**e f)
# where T_K uses 1/k^2 - 1/m^2 and T_L uses ln k^2 - ln m^2.
_RADIAL_TERMS = {
    0: [[(1.0, 1, "K")]],
    1: [[(1.0, 3, "K"), (1.0, 1, "L")], [(1.0, 1, "K")]],
    2: [[(3.0, 5, "K"), (3.0, 3, "L")], [(-2.0, 3, "K"), (3.0, 1, "L")], [(3.0, 1, "K")]],
}
EXACT_ROWS = {0: 32, 1: 64, 2: 192}


@dataclass(frozen=True)
class _FastPlan:
    n: int
    length: int
    toeplitz: dict
    hankel: dict
    diagonal: np.ndarray
    exact_rows: np.ndarray | None


def _rfft(x, length):
    return sfft.rfft(x, length, workers=-1)


def _irfft(x, length):
    return sfft.irfft(x, length, workers=-1)


@lru_cache(maxsize=8)
def _plan(grid: RadialGrid, sector: Sector) -> _FastPlan:
    n = grid.size
    length = sfft.next_fast_len(2 * n, real=True)
    if sector.is_1d:
        window = grid.window
        circ = np.zeros(length)
        k = np.arange(1, min(window, n - 1) + 1, dtype=float)
        circ[1:k.size + 1] = 1.0 / k**2
        circ[length - k.size:] = (1.0 / k**2)[::-1]
        diag = _cauchy_1d_diagonal(n, window)
        return _FastPlan(n, length, {"K": _rfft(circ, length)}, {}, diag, None)
    toeplitz, hankel = {}, {}
    k = np.arange(1, n, dtype=float)
    m = np.arange(1, 2 * n, dtype=float)
    for kind, tfun in (("K", lambda v: 1.0 / v**2), ("L", lambda v: np.log(v**2))):
        circ = np.zeros(length)
        circ[1:n] = tfun(k)
        circ[length - n + 1:] = tfun(k)[::-1]
        toeplitz[kind] = _rfft(circ, length)
        hankel[kind] = _rfft(tfun(m), length)
    l = sector.orbital_l
    rows = min(EXACT_ROWS[l], n)
    exact = kernel_rows(grid, sector, np.arange(rows)) * grid.step_dx if rows else None
    return _FastPlan(n, length, toeplitz, hankel, _radial_diagonal(n), exact)


def _cauchy_1d_fast(f: np.ndarray, grid: RadialGrid) -> np.ndarray:
    plan = _plan(grid, Sector.ONED_ODD)
    conv = _irfft(_rfft(f, plan.length) * plan.toeplitz["K"], plan.length)[:plan.n]
    return (plan.diagonal * f - conv) / (np.pi * grid.step_dx)


def _radial_fast(f: np.ndarray, grid: RadialGrid, l: int) -> np.ndarray:
    sector = {0: Sector.L0_DIRECT, 1: Sector.L1, 2: Sector.L2}[l]
    plan = _plan(grid, sector)
    n, length = plan.n, plan.length
    sigma = np.arange(n) + 0.5
    powers = {e: sigma**e * f for e in {e for grp in _RADIAL_TERMS[l] for _, e, _ in grp}}
    fwd = {e: _rfft(g, length) for e, g in powers.items()}
    rev = {e: _rfft(g[::-1], length) for e, g in powers.items()}
    off = np.zeros(n)
    for q, group in enumerate(_RADIAL_TERMS[l]):
        toe = sum(c * fwd[e] * plan.toeplitz[kind] for c, e, kind in group)
        han = sum(c * rev[e] * plan.hankel[kind] for c, e, kind in group)
        part = _irfft(toe, length)[:n] - _irfft(han, length)[n - 1:2 * n - 1]
        # drop the j == i Hankel term, the singular node being skipped
        for c, e, kind in group:
            self_term = 1.0 / (2 * sigma) ** 2 if kind == "K" else np.log((2 * sigma) ** 2)
            part += c * self_term * powers[e]
        off += sigma ** (2 * q) * part
    off *= -_SECTOR_CONST[l] / sigma ** (2 * l + 1)
    out = plan.diagonal / np.pi * f + off
    if plan.exact_rows is not None:
        rows = plan.exact_rows.shape[0]
        out[:rows] = plan.exact_rows @ f
    return out / grid.step_dx


# ---------------------------------------------------------------------------
# skipped-cell correction
# ---------------------------------------------------------------------------

# Log coefficient of the skipped node in index units, l -> (scale, shift):
# correction_i = scale * f_i * (ln(4 pi sigma) - shift) / (pi sigma^2 dx)
_LOG_TERMS = {1: (1.0, 1.5), 2: (3.0, 2.0)}
# The local expansion is meaningless within a few cells of the origin, where
# the weighted flux form would otherwise inflate the top of the spectrum
# (by 5x for l = 2).  The first faces are left closed.
_CLOSED_FACES = 4


def skipped_cell_correction(f: np.ndarray, grid: RadialGrid, sector) -> np.ndarray:
    """Leading-order contribution of the node the nodal sum leaves out.

    Near the singular node the integrand is ``a_-1/z + a_0 + b ln z^2 + O(z)``.
    The punctured midpoint sum misses ``dx * a_0`` and, for the log part,
    ``2 b dx ln(dx / 2 pi)`` (Stirling).  For every sector ``a_0`` holds
    ``-(f'' + (w/p) f') / (2 pi)`` with ``w`` the sector weight exponent,
    discretised here in flux form so that the correction stays symmetric
    under the sector inner product; ``l = 1, 2`` add a diagonal log term.

    ``f`` may be a vector or a block of column vectors (nodes along axis 0).
    """
    sector = as_sector(sector)
    f = np.asarray(f, dtype=float)
    dx = grid.step_dx
    n = f.shape[0]
    shape = (n,) + (1,) * (f.ndim - 1)
    zero = np.zeros((1,) + f.shape[1:])
    # differences across the n + 1 cell faces; f vanishes beyond the ends
    jumps = np.diff(np.concatenate([zero, f, zero]), axis=0)
    if sector.is_1d:
        return -np.diff(jumps, axis=0) / (2 * np.pi * dx)
    w = sector.weight_exponent
    sigma = (np.arange(n) + 0.5).reshape(shape)
    face = np.arange(n + 1, dtype=float) ** w
    face[:_CLOSED_FACES] = 0.0
    flux = face.reshape((n + 1,) + shape[1:]) * jumps
    out = -np.diff(flux, axis=0) / sigma**w / (2 * np.pi * dx)
    l = sector.orbital_l
    if l in _LOG_TERMS:
        scale, shift = _LOG_TERMS[l]
        out += scale * f * (np.log(4 * np.pi * sigma) - shift) / (np.pi * sigma**2 * dx)
    return out


# ---------------------------------------------------------------------------
# public applies
# ---------------------------------------------------------------------------

def _finite(values: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise OperatorError("kernel output is not finite; the state is malformed")
    return values


def _require(state: SectorState, allowed: tuple) -> None:
    if state.sector not in allowed:
        raise ValueError(f"sector {state.sector.value} is not handled here")


def apply_cauchy_1d(state: SectorState, method: str = "fast") -> np.ndarray:
    """``(Af)(x) = (1/pi) sum_{0 < |u-x| <= a} (f(x) - f(u)) / (u-x)^2 dx``.

    The window ``|u - x| <= a`` is the same for every node; lattice points
    beyond ``[-a, a]`` carry ``f = 0``.
    """
    _require(state, (Sector.ONED_EVEN, Sector.ONED_ODD))
    f = state.samples
    if method == "direct":
        return _finite(_cauchy_1d_direct(f, state.grid))
    return _finite(_cauchy_1d_fast(f, state.grid))


def apply_radial_l0_direct(state: SectorState, method: str = "fast") -> np.ndarray:
    """Purely radial 3D kernel on ``[0, a]``."""
    _require(state, (Sector.L0_DIRECT,))
    return _apply_radial(state, 0, method)


def apply_radial_l1(state: SectorState, method: str = "fast") -> np.ndarray:
    """Reduced kernel for profiles ``psi = x_3 f(p)``."""
    _require(state, (Sector.L1,))
    return _apply_radial(state, 1, method)


def apply_radial_l2(state: SectorState, method: str = "fast") -> np.ndarray:
    """Reduced kernel for profiles ``psi = (3 x_3^2 - p^2) f(p)``."""
    _require(state, (Sector.L2,))
    return _apply_radial(state, 2, method)


def _apply_radial(state: SectorState, l: int, method: str) -> np.ndarray:
    if method == "direct":
        return _finite(_radial_direct(state.samples, state.grid, l))
    return _finite(_radial_fast(state.samples, state.grid, l))


_DISPATCH = {
    Sector.ONED_EVEN: apply_cauchy_1d,
    Sector.ONED_ODD: apply_cauchy_1d,
    Sector.L0_DIRECT: apply_radial_l0_direct,
    Sector.L1: apply_radial_l1,
    Sector.L2: apply_radial_l2,
}


SCHEMES = ("skip", "corrected")


def apply_kinetic(state: SectorState, method: str = "fast",
                  scheme: str = "corrected") -> np.ndarray:
    """Apply the sector's Cauchy kernel.

    ``scheme="skip"`` is the bare punctured nodal sum; ``"corrected"`` adds
    :func:`skipped_cell_correction`, which lifts the O(dx) consistency error
    of the punctured sum.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    out = _DISPATCH[state.sector](state, method=method)
    if scheme == "corrected":
        out = out + skipped_cell_correction(state.samples, state.grid, state.sector)
    return out


def apply_hamiltonian(state: SectorState, potential: WellPotential,
                      method: str = "fast", scheme: str = "corrected") -> np.ndarray:
    return apply_kinetic(state, method, scheme) + apply_potential(state, potential)
