import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cauchywell.evolution import EigenResult, SolverParams, solve_multilevel
from cauchywell.grid import make_grid
from cauchywell.operators import Sector, SectorState, sector_inner
from cauchywell.spectrum import (
    INFINITE_WELL_REFERENCE,
    ScanError,
    Verdict,
    density_profile,
    exists_bound_state,
    infinite_well_asymptote,
    judge,
    nonrel_bound_count,
    probability_ratio,
    radial_state,
    scan_threshold,
    sector_for,
    spectrum_table,
    spherical_harmonic_sq,
)

COARSE = SolverParams(h=2e-3, eig_tol=1e-10)


def coarse_grid(sector, a=8.0, dx=0.05):
    return make_grid(Sector(sector).grid_kind, a, dx)


def unit_state(grid, samples, sector):
    s = SectorState(grid, np.asarray(samples, dtype=float), sector)
    return s.with_samples(s.samples / math.sqrt(sector_inner(s, s)))


# -- sector routing ----------------------------------------------------------

def test_sector_routes():
    assert sector_for(0) is Sector.ONED_ODD
    assert sector_for(0, "direct") is Sector.L0_DIRECT
    assert sector_for(2, "direct") is Sector.L2
    with pytest.raises(ValueError):
        sector_for(1, "oned")
    with pytest.raises(ValueError):
        sector_for(3)


# -- verdicts ----------------------------------------------------------------

def result(value, v0=2.0, converged=True, escaped=False, sector="oneD_odd", a=50.0):
    g = make_grid("radial", 2, 0.5)
    return EigenResult(v0=v0, sector=Sector(sector), n=1, eigenvalue_at_a=value,
                       eigenvalue_renormalized=value + 2 / math.pi / a, cutoff_a=a,
                       step_dx=0.001, iterations=10, converged=converged,
                       eigenfunction=SectorState(g, np.ones(4), "l1"), escaped=escaped)


def test_renormalized_value_decides():
    # raw 1.9926 < 2 but the a -> inf value 2.0053 is not
    assert judge(result(1.9926)) is Verdict.ABSENT
    assert judge(result(2.02603, v0=2.1)) is Verdict.EXISTS
    assert judge(result(1.0, converged=False)) is Verdict.UNDETERMINED
    assert judge(result(1.0, escaped=True)) is Verdict.ABSENT


def test_exists_on_coarse_grid():
    g = coarse_grid("oneD_odd")
    verdict, r = exists_bound_state(3.0, "oneD_odd", 1, g, COARSE)
    assert verdict is Verdict.EXISTS and 0 < r.eigenvalue_renormalized < 3.0
    verdict, _ = exists_bound_state(1.5, "oneD_odd", 1, g, COARSE)
    assert verdict is Verdict.ABSENT


def test_unconverged_scan_raises():
    g = coarse_grid("oneD_odd")
    with pytest.raises(ScanError):
        scan_threshold("oneD_odd", 1, 1.5, 3.0, grid=g, params=SolverParams(h=2e-3, max_iters=3))


@pytest.fixture(scope="module")
def walk_and_bisect():
    g = coarse_grid("oneD_odd")
    return [scan_threshold("oneD_odd", 1, 1.6, 2.6, 0.1, g, COARSE, strategy=s)
            for s in ("walk", "bisect")]


def test_threshold_report_invariants(walk_and_bisect):
    for rep in walk_and_bisect:
        assert rep.found
        assert rep.v0_upper - rep.v0_lower == pytest.approx(rep.resolution, abs=1e-9)
        assert rep.verdicts[rep.v0_upper] is Verdict.EXISTS
        assert rep.verdicts[rep.v0_lower] is Verdict.ABSENT
        assert rep.upper_result.is_bound
        assert rep.l == 0


def test_walk_and_bisect_agree(walk_and_bisect):
    walk, bisect = walk_and_bisect
    assert (walk.v0_lower, walk.v0_upper) == (bisect.v0_lower, bisect.v0_upper)
    assert len(bisect.verdicts) <= len(walk.verdicts) + 1


def test_scan_exhausted_range():
    g = coarse_grid("oneD_odd")
    rep = scan_threshold("oneD_odd", 1, 1.0, 1.3, 0.1, g, COARSE)
    assert not rep.found and rep.v0_lower is None and rep.v0_upper is None


def test_scan_validates_inputs():
    with pytest.raises(ValueError):
        scan_threshold("l1", 1, 3.0, 2.0)
    with pytest.raises(ValueError):
        scan_threshold("l1", 1, 2.0, 3.0, resolution=0.0)


def test_existence_monotone_in_v0(walk_and_bisect):
    walk = walk_and_bisect[0]
    seen = [walk.verdicts[v] for v in sorted(walk.verdicts)]
    first = seen.index(Verdict.EXISTS)
    assert all(v is Verdict.EXISTS for v in seen[first:])


def test_table_on_coarse_grid():
    grid_for = lambda s: coarse_grid(s, 8.0, 0.05)
    table = spectrum_table([5.2, 8.3], {0: 2, 1: 1}, grid_for, COARSE)
    assert table.rows == ((0, 1), (0, 2), (1, 1))
    for v0 in (5.2, 8.3):
        col = [table.cell(0, n, v0) for n in (1, 2)]
        present = [c.eigenvalue_renormalized for c in col if c.present]
        assert all(np.diff(present) > 0)
        assert all(e < v0 for e in present)
    # eigenvalues grow with the well depth
    assert table.cell(0, 1, 8.3).eigenvalue_renormalized > table.cell(0, 1, 5.2).eigenvalue_renormalized
    assert table.reference(0, 1) == INFINITE_WELL_REFERENCE[(0, 1)]
    assert table.reference(2, 3) is None


# -- observables -------------------------------------------------------------

def test_ratio_zero_for_state_inside_well():
    g = make_grid("radial", 4, 0.1)
    s = unit_state(g, (g.nodes < 1).astype(float), "l1")
    assert probability_ratio(s) == 0.0


def test_ratio_by_direct_nodal_sum():
    g = make_grid("radial", 4, 0.1)
    f = np.exp(-g.nodes)
    s = unit_state(g, f, "l0_direct")
    dens = 4 * math.pi * g.nodes**2 * s.samples**2 * 0.1
    inside = dens[g.nodes < 1].sum()
    assert probability_ratio(s) == pytest.approx((1 - inside) / inside, rel=1e-12)


def test_ratio_needs_normalized_state():
    g = make_grid("radial", 4, 0.1)
    with pytest.raises(ValueError):
        probability_ratio(SectorState(g, np.ones(g.size), "l0_direct"))


def test_line_state_maps_to_radial_profile():
    g = make_grid("symmetric", 4, 0.1)
    odd = unit_state(g, np.sign(g.nodes) * np.exp(-np.abs(g.nodes)) * np.abs(g.nodes), "oneD_odd")
    rad = radial_state(odd)
    assert rad.sector is Sector.L0_DIRECT
    np.testing.assert_allclose(rad.samples / rad.samples[0], np.exp(-rad.grid.nodes) / np.exp(-0.05))
    assert sector_inner(rad, rad) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        radial_state(SectorState(g, np.ones(g.size), "oneD_even"))


def test_ratio_same_on_both_l0_routes():
    g = make_grid("symmetric", 4, 0.1)
    odd = unit_state(g, np.sign(g.nodes) * np.exp(-np.abs(g.nodes)) * np.abs(g.nodes), "oneD_odd")
    assert probability_ratio(odd) == pytest.approx(probability_ratio(radial_state(odd)))


def test_harmonic_nodes_and_constant():
    assert spherical_harmonic_sq(1, 0, math.pi / 2) == pytest.approx(0, abs=1e-30)
    node = math.acos(1 / math.sqrt(3))
    assert spherical_harmonic_sq(2, 0, node) == pytest.approx(0, abs=1e-30)
    theta = np.linspace(0, math.pi, 7)
    np.testing.assert_allclose(spherical_harmonic_sq(0, 0, theta), 1 / (4 * math.pi))
    with pytest.raises(ValueError):
        spherical_harmonic_sq(1, 2, 0.3)


@given(st.sampled_from([(0, 0), (1, 0), (1, 1), (2, 0), (2, 1), (2, 2)]))
def test_harmonics_normalized(lm):
    l, m = lm
    theta = np.linspace(0, math.pi, 20001)
    integrand = spherical_harmonic_sq(l, m, theta) * np.sin(theta) * 2 * math.pi
    assert np.trapezoid(integrand, theta) == pytest.approx(1.0, rel=1e-6)


def test_density_profile_shapes_and_nodes():
    g = make_grid("radial", 4, 0.05)
    s = unit_state(g, np.exp(-g.nodes), "l1")
    field = density_profile(s, 1, 0, theta=np.array([0.0, math.pi / 2]), r_max=3, stride=2)
    assert field.values.shape == (len(field.r), 2)
    assert field.r.max() <= 3
    np.testing.assert_allclose(field.values[:, 1], 0, atol=1e-30)
    assert field.triples().shape == (2 * len(field.r), 3)
    with pytest.raises(ValueError):
        density_profile(s, 1, 2)
    with pytest.raises(ValueError):
        density_profile(s, 2, 0)


def test_density_integrates_to_one():
    g = make_grid("radial", 6, 0.01)
    s = unit_state(g, np.exp(-2 * g.nodes), "l2")
    field = density_profile(s, 2, 1, theta=4001)
    angular = np.trapezoid(field.values * np.sin(field.theta)[None, :] * 2 * math.pi, field.theta, axis=1)
    assert np.sum(angular * field.r**2) * 0.01 == pytest.approx(1.0, rel=1e-5)


def test_s_wave_density_is_isotropic():
    g = make_grid("radial", 4, 0.1)
    s = unit_state(g, np.exp(-g.nodes), "l0_direct")
    field = density_profile(s, 0, 0, theta=5)
    np.testing.assert_allclose(field.values, field.values[:, :1] * np.ones((1, 5)))
    # 4 pi r^2 prefactor times 1/(4 pi): the density is f^2 itself
    np.testing.assert_allclose(field.values[:, 0], s.samples**2)


# -- closed forms ------------------------------------------------------------

@pytest.mark.parametrize("v0,count", [(2.0, 0), (5.0, 1), (25.0, 2), (500.0, 7)])
def test_nonrel_counts(v0, count):
    assert nonrel_bound_count(v0) == count


@pytest.mark.parametrize("k", [0, 1, 3])
def test_nonrel_degenerate_threshold(k):
    with pytest.raises(ValueError, match="degenerate"):
        nonrel_bound_count(((2 * k + 1) * math.pi / 2) ** 2)


@given(st.floats(0.01, 1e4))
def test_nonrel_count_inequality(v0):
    n = nonrel_bound_count(v0)
    assert (2 * n - 1) * math.pi / 2 < math.sqrt(v0) or n == 0
    assert math.sqrt(v0) <= (2 * n + 1) * math.pi / 2


def test_asymptote_values():
    assert infinite_well_asymptote(5) == pytest.approx(7.46128, abs=5e-6)
    assert infinite_well_asymptote(2) == pytest.approx(2.74889, abs=5e-6)
    assert INFINITE_WELL_REFERENCE[(0, 1)] - infinite_well_asymptote(2) == pytest.approx(0.00588, abs=1e-5)
    with pytest.raises(ValueError):
        infinite_well_asymptote(0)


@given(st.integers(1, 1000))
def test_asymptote_even_gap(n):
    gap = infinite_well_asymptote(2 * n + 2) - infinite_well_asymptote(2 * n)
    assert gap == pytest.approx(math.pi, rel=1e-12)
