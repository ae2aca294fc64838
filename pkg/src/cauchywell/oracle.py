"""Dense brute-force check of the sector operators.

The matrix of ``A + V`` is assembled from pointwise kernel rows (no FFTs, no
iteration), moved to weighted coordinates ``y = sqrt(w) f`` where the sector
inner product becomes the Euclidean one, and diagonalised by cyclic Jacobi
rotations.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import RadialGrid, WellPotential
from .operators import (
    SCHEMES,
    Sector,
    SectorState,
    as_sector,
    kernel_rows,
    sector_weights,
    skipped_cell_correction,
)

ORACLE_MAX_NODES = 2000


class JacobiError(ArithmeticError):
    """Rotations failed to drive the off-diagonal norm below tolerance."""


@dataclass(frozen=True)
class DenseOperator:
    """``A + V`` in weighted coordinates, symmetrised.

    ``asymmetry`` is ``||M - M^T||_F / ||M||_F`` before symmetrisation.
    """

    sector: Sector
    grid: RadialGrid
    matrix: np.ndarray = field(repr=False)
    sqrt_weights: np.ndarray = field(repr=False)
    asymmetry: float = 0.0

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def raw_matrix(sector, grid: RadialGrid, potential: WellPotential | None,
               scheme: str = "corrected", kinetic: bool = True) -> np.ndarray:
    """Column ``j`` is the operator applied to the ``j``-th unit sample vector."""
    sector = as_sector(sector)
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    n = grid.size
    mat = np.zeros((n, n))
    if kinetic:
        mat += kernel_rows(grid, sector)
        if scheme == "corrected":
            mat += skipped_cell_correction(np.eye(n), grid, sector)
    if potential is not None:
        mat[np.diag_indices(n)] += potential(grid.nodes)
    return mat


def assemble(sector, grid: RadialGrid, potential: WellPotential | None,
             scheme: str = "corrected", kinetic: bool = True) -> DenseOperator:
    sector = as_sector(sector)
    if grid.size > ORACLE_MAX_NODES:
        raise ValueError(f"{grid.size} nodes exceeds the oracle limit of {ORACLE_MAX_NODES}")
    if grid.kind != sector.grid_kind:
        raise ValueError(f"sector {sector.value} needs a {sector.grid_kind} grid")
    raw = raw_matrix(sector, grid, potential, scheme, kinetic)
    sw = np.sqrt(sector_weights(grid, sector))
    m = sw[:, None] * raw / sw[None, :]
    scale = np.linalg.norm(m)
    asym = float(np.linalg.norm(m - m.T) / scale) if scale > 0 else 0.0
    return DenseOperator(sector, grid, 0.5 * (m + m.T), sw, asym)


def _round_robin(n: int):
    """Rounds of disjoint index pairs covering every pair once (circle method)."""
    players = list(range(n)) + ([-1] if n % 2 else [])
    m = len(players)
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p >= 0 and q >= 0]
        if pairs:
            yield np.array(pairs).T
        players = [players[0], players[-1]] + players[1:-1]


def _off_norm(a: np.ndarray) -> float:
    # summed directly: ||A||^2 - sum(diag^2) cancels catastrophically near convergence
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def jacobi_eigh(matrix: np.ndarray, tol: float = 1e-10, max_sweeps: int = 60):
    """All eigenpairs of a symmetric matrix by cyclic Jacobi rotations.

    Each round rotates a set of disjoint ``(p, q)`` planes at once; a sweep
    visits every plane.  Stops once the off-diagonal Frobenius norm falls
    below ``tol * ||A||_F``.

    Returns
    -------
    values : ndarray, ascending
    vectors : ndarray, orthonormal columns
    """
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("need a square matrix")
    if not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise ValueError("matrix is not symmetric")
    n = a.shape[0]
    v = np.eye(n)
    target = tol * max(np.linalg.norm(a), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        if _off_norm(a) <= target:
            break
        for p, q in _round_robin(n):
            apq = a[p, q]
            active = np.abs(apq) > 1e-300
            if not active.any():
                continue
            p, q, apq = p[active], q[active], apq[active]
            tau = (a[q, q] - a[p, p]) / (2 * apq)
            big = np.abs(tau) > 1e150
            tau_sq = np.where(big, 1.0, tau * tau)
            t = np.where(big, 0.5 / np.where(big, tau, 1.0),
                         np.sign(tau) / (np.abs(tau) + np.sqrt(1 + tau_sq)))
            t[tau == 0] = 1.0
            c = 1 / np.sqrt(1 + t * t)
            s = t * c
            rows_p, rows_q = a[p, :].copy(), a[q, :].copy()
            a[p, :] = c[:, None] * rows_p - s[:, None] * rows_q
            a[q, :] = s[:, None] * rows_p + c[:, None] * rows_q
            cols_p, cols_q = a[:, p].copy(), a[:, q].copy()
            a[:, p] = cols_p * c - cols_q * s
            a[:, q] = cols_p * s + cols_q * c
            vp, vq = v[:, p].copy(), v[:, q].copy()
            v[:, p] = vp * c - vq * s
            v[:, q] = vp * s + vq * c
    else:
        if _off_norm(a) > target:
            raise JacobiError(f"off-diagonal norm {_off_norm(a):.3g} above {target:.3g}")
    values = np.diag(a).copy()
    order = np.argsort(values)
    return values[order], v[:, order]


def lowest_eigenpairs(op: DenseOperator, count: int, tol: float = 1e-10):
    """The ``count`` smallest eigenpairs as ``(value, SectorState)``.

    States are mapped back to sample coordinates, so they are orthonormal in
    the sector inner product.  1D states get a deterministic sign (positive
    sample sum on the right half); radial states positive at the origin.
    """
    if not 1 <= count <= op.size:
        raise ValueError(f"count must lie in [1, {op.size}]")
    values, vectors = jacobi_eigh(op.matrix, tol)
    out = []
    for k in range(count):
        f = vectors[:, k] / op.sqrt_weights
        f = f * _sign(f, op.sector)
        out.append((float(values[k]), SectorState(op.grid, f, op.sector)))
    return out


def _sign(f: np.ndarray, sector: Sector) -> float:
    ref = np.sum(f[f.size // 2:]) if sector.is_1d else f[0]
    return -1.0 if ref < 0 else 1.0


def parity_eigenpairs(op: DenseOperator, count: int, parity: int, tol: float = 1e-10):
    """Lowest ``count`` eigenpairs of a 1D operator restricted to one parity.

    The operator commutes with the reflection ``x -> -x``, so the even and odd
    blocks diagonalise separately on the half grid.
    """
    if not op.sector.is_1d:
        raise ValueError("parity blocks only exist for line sectors")
    n = op.size
    half = n // 2
    m = op.matrix
    right = m[half:, half:]
    cross = m[half:, :half][:, ::-1]
    block = right + parity * cross
    values, vectors = jacobi_eigh(0.5 * (block + block.T), tol)
    out = []
    for k in range(count):
        y = np.concatenate([parity * vectors[::-1, k], vectors[:, k]]) / np.sqrt(2)
        f = y / op.sqrt_weights
        f = f * _sign(f, op.sector)
        out.append((float(values[k]), SectorState(op.grid, f, op.sector)))
    return out


def residual_norm(op: DenseOperator, value: float, state: SectorState) -> float:
    """``||M y - lambda y|| / ||y||`` in weighted coordinates."""
    y = op.sqrt_weights * state.samples
    return float(np.linalg.norm(op.matrix @ y - value * y) / np.linalg.norm(y))
