import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cauchywell.evolution import (
    EigenResult,
    InstabilityError,
    SolverParams,
    _strang,
    estimate_eigenvalue,
    level_grids,
    seed_samples,
    solve_multilevel,
    solve_sector,
    solve_state,
    strang_step,
)
from cauchywell.grid import WellPotential, make_grid
from cauchywell.operators import Sector, SectorState, apply_hamiltonian, sector_inner
from cauchywell.oracle import raw_matrix

# coarse test grids keep every solve under a second or two
FAST = SolverParams(h=2e-3, eig_tol=1e-10, max_iters=100_000)


def unit(grid, samples, sector):
    s = SectorState(grid, np.asarray(samples, dtype=float), sector)
    return s.with_samples(s.samples / math.sqrt(sector_inner(s, s)))


# -- params ------------------------------------------------------------------

def test_default_step_is_quarter_dx_with_cap():
    p = SolverParams()
    assert p.step_for(make_grid("symmetric", 4, 0.001)) == pytest.approx(2.5e-4)
    assert p.step_for(make_grid("symmetric", 4, 0.01)) == pytest.approx(5e-4)


@pytest.mark.parametrize("kwargs", [dict(h=0.0), dict(h=-1.0), dict(eig_tol=0.0),
                                    dict(max_iters=0), dict(scheme="bogus")])
def test_invalid_params(kwargs):
    with pytest.raises(ValueError):
        SolverParams(**kwargs)


def test_stability_bound_enforced():
    g = make_grid("symmetric", 4, 0.1)
    limit = 2 / (math.pi / 0.1 + 2.1)
    with pytest.raises(ValueError):
        SolverParams(h=limit * 1.01).step_for(g, 2.1)
    assert SolverParams(h=limit * 0.99).step_for(g, 2.1) > 0


# -- single step -------------------------------------------------------------

def test_zero_step_is_identity():
    g = make_grid("symmetric", 2, 0.5)
    s = unit(g, np.arange(g.size), "oneD_even")
    out = _strang(s, np.ones(g.size), 0.0, SolverParams())
    np.testing.assert_array_equal(out.samples, s.samples)


@pytest.mark.parametrize("sector", ["oneD_even", "oneD_odd"])
def test_spectral_mapping_without_potential(sector):
    g = make_grid("symmetric", 3, 0.25)
    m = raw_matrix(sector, g, None, scheme="skip")
    values, vectors = np.linalg.eigh(0.5 * (m + m.T))
    flat = WellPotential(1.0, well_radius=100.0)  # V = 0 on the whole grid
    params = SolverParams(h=0.05, scheme="skip")
    for k in (0, 3, g.size - 1):
        s = SectorState(g, vectors[:, k], sector)
        out = strang_step(s, flat, params)
        np.testing.assert_allclose(out.samples, (1 - 0.05 * values[k]) * vectors[:, k],
                                   atol=1e-12)


def test_one_step_from_box_profile():
    # a = 2, dx = 0.5, v0 = 2.1, h = 0.1; reference from a 30-digit direct sum
    g = make_grid("symmetric", 2, 0.5)
    f = (np.abs(g.nodes) < 1).astype(float)
    params = SolverParams(h=0.1, scheme="skip")
    out = strang_step(SectorState(g, f, "oneD_even"), WellPotential(2.1), params).samples
    assert out[0] == pytest.approx(0.0242798805209548649, rel=1e-12)
    assert out[2] == pytest.approx(0.905391228273151106, rel=1e-12)
    assert out[3] == pytest.approx(0.961979652483602781, rel=1e-12)
    np.testing.assert_allclose(out, out[::-1], rtol=1e-13)


def test_non_finite_step_aborts():
    g = make_grid("symmetric", 2, 0.5)
    f = np.ones(g.size)
    f[2] = np.nan
    with pytest.raises((InstabilityError, FloatingPointError, ArithmeticError)):
        strang_step(SectorState(g, f, "oneD_even"), WellPotential(2.1), SolverParams(h=0.1))


# -- eigenvalue estimate -----------------------------------------------------

def test_estimate_inverts_the_defining_map():
    g = make_grid("radial", 2, 0.5)
    s = unit(g, np.ones(g.size), "l1")
    params = SolverParams(h=2e-4)
    after = s.with_samples(s.samples * math.exp(-2e-4 * 2.0))
    assert estimate_eigenvalue(s, after, params) == pytest.approx(2.0, rel=1e-12)
    # unit norm holds to rounding, and 1 ulp over h = 2e-4 is about 1e-12
    assert estimate_eigenvalue(s, s, params) == pytest.approx(0.0, abs=1e-10)


def test_estimate_rejects_left_cone():
    g = make_grid("radial", 2, 0.5)
    s = unit(g, np.ones(g.size), "l1")
    with pytest.raises(InstabilityError):
        estimate_eigenvalue(s, s.with_samples(-s.samples), SolverParams(h=1e-3))


# -- seeds -------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3])
def test_seed_shapes(n):
    g = make_grid("symmetric", 4, 0.01)
    odd = seed_samples(g, "oneD_odd", n)
    even = seed_samples(g, "oneD_even", n)
    np.testing.assert_allclose(odd, -odd[::-1])
    np.testing.assert_allclose(even, even[::-1])
    # interior sign changes of the odd seed on x > 0 equal n - 1
    half = odd[g.size // 2:][g.nodes[g.size // 2:] < 1]
    assert np.sum(np.diff(np.sign(half)) != 0) == n - 1
    r = make_grid("radial", 4, 0.01)
    assert np.all(np.isfinite(seed_samples(r, "l2", n)))


def test_seed_index_starts_at_one():
    with pytest.raises(ValueError):
        seed_samples(make_grid("radial", 2, 0.5), "l0_direct", 0)


# -- solves ------------------------------------------------------------------

@pytest.fixture(scope="module")
def odd_ladder():
    g = make_grid("symmetric", 8, 0.05)
    return solve_sector(8.3, "oneD_odd", 2, g, FAST)


def test_result_fields(odd_ladder):
    r = odd_ladder[0]
    assert isinstance(r, EigenResult)
    assert r.converged and r.is_bound and not r.escaped
    assert 0 < r.eigenvalue_renormalized < r.v0
    assert r.cutoff_a == 8 and r.step_dx == 0.05 and r.n == 1
    assert r.eigenvalue_renormalized == pytest.approx(r.eigenvalue_at_a + 2 / math.pi / 8)


def test_unit_norm_and_orthogonality(odd_ladder):
    a, b = (r.eigenfunction for r in odd_ladder)
    assert sector_inner(a, a) == pytest.approx(1, abs=1e-9)
    assert sector_inner(b, b) == pytest.approx(1, abs=1e-9)
    assert abs(sector_inner(a, b)) < 1e-6
    assert odd_ladder[0].eigenvalue_at_a < odd_ladder[1].eigenvalue_at_a


def test_parity_preserved(odd_ladder):
    for r in odd_ladder:
        f = r.eigenfunction.samples
        assert np.abs(f + f[::-1]).max() < 1e-9


def test_residual_small(odd_ladder):
    for r in odd_ladder:
        assert r.residual < 1e-2 * r.eigenvalue_at_a


def test_rayleigh_quotient_is_reported(odd_ladder):
    r = odd_ladder[0]
    s = r.eigenfunction
    hf = apply_hamiltonian(s, WellPotential(r.v0), "fast", r.scheme)
    assert r.eigenvalue_at_a == pytest.approx(sector_inner(s, s.with_samples(hf)), rel=1e-12)


def test_non_convergence_reported_honestly():
    g = make_grid("symmetric", 4, 0.1)
    r = solve_state(2.1, "oneD_odd", 1, g, SolverParams(h=2e-3, max_iters=5))
    assert not r.converged and r.iterations == 5


def test_escape_without_bound_state():
    # l = 2 has no bound state for shallow wells; the estimate sits in the continuum
    g = make_grid("radial", 6, 0.1)
    params = SolverParams(h=2e-3, eig_tol=1e-12, max_iters=50_000, escape_margin=0.0,
                          escape_window=500)
    r = solve_state(0.5, "l2", 1, g, params)
    assert r.escaped or not r.is_bound


def test_deflation_basis_must_match():
    g = make_grid("radial", 4, 0.1)
    other = SectorState(make_grid("radial", 4, 0.05), np.ones(80), "l1")
    with pytest.raises(ValueError):
        solve_state(3.5, "l1", 2, g, FAST, deflation_basis=[other])


def test_level_chain():
    chain = level_grids(make_grid("radial", 4, 0.005))
    assert [g.step_dx for g in chain] == pytest.approx([0.04, 0.02, 0.01, 0.005])


def test_multilevel_matches_single_level():
    g = make_grid("radial", 6, 0.02)
    direct = solve_sector(3.5, "l1", 1, g, FAST)[0]
    multi = solve_multilevel(3.5, "l1", 1, g, FAST)[0]
    assert multi.eigenvalue_at_a == pytest.approx(direct.eigenvalue_at_a, abs=1e-5)
    assert multi.iterations >= 1


@settings(max_examples=10)
@given(st.integers(1, 40), st.sampled_from(["oneD_odd", "oneD_even", "l0_direct", "l1", "l2"]))
def test_invariants_after_any_iteration_count(k, sector):
    kind = "symmetric" if sector.startswith("oneD") else "radial"
    g = make_grid(kind, 4, 0.1)
    params = SolverParams(h=5e-3, max_iters=k)
    ground = solve_state(6.0, sector, 1, g, params)
    f = ground.eigenfunction
    assert sector_inner(f, f) == pytest.approx(1, abs=1e-9)
    excited = solve_state(6.0, sector, 2, g, params, deflation_basis=[f])
    e = excited.eigenfunction
    assert abs(sector_inner(e, f)) < 1e-6
    if sector == "oneD_odd":
        assert np.abs(e.samples + e.samples[::-1]).max() < 1e-9


def test_monotone_tail():
    g = make_grid("symmetric", 4, 0.1)
    params = SolverParams(h=5e-3, eig_tol=1e-9)
    r = solve_state(6.0, "oneD_odd", 1, g, params)
    s = r.eigenfunction
    pot = WellPotential(6.0)
    estimates = []
    for _ in range(50):
        after = strang_step(s, pot, params)
        estimates.append(estimate_eigenvalue(s, after, params, 6.0))
        s = unit(g, after.samples, "oneD_odd")
    d = np.diff(estimates)
    assert np.all(d <= params.eig_tol) or np.all(d >= -params.eig_tol)


@pytest.mark.slow
def test_ground_state_at_production_grid_shape():
    # coarser step than production; within 1% of the tabulated a = 50 value
    g = make_grid("symmetric", 50, 0.01)
    r = solve_multilevel(2.1, "oneD_odd", 1, g)[0]
    assert r.eigenvalue_at_a == pytest.approx(2.02603, rel=0.01)
