import numpy as np
import pytest

from wavelab.linwave import FreeWaveData, dalembert_evolve
from wavelab.nlwave import (EvolutionError, EvolveOptions, chi, critical_norm_trace, energy,
                            evolve, ode_blowup, plateau_state, support_radius)
from wavelab.radial import Params, RadialGrid, RadialProfile, StatePair, bump

P7 = Params(7.0)


def bump_state(grid, amp, params=P7, centre=0.0, width=1.0):
    u = RadialProfile(grid, amp * bump((grid.r - centre) / width))
    return StatePair(u, RadialProfile.zeros(grid), params, 0.0)


def test_chi_plateaus():
    r = np.array([0.0, 0.24, 0.25, 0.5, 0.51, 3.0]) * 4.0
    c = chi(r, 4.0)
    assert np.all(c[:3] == 0) and np.all(c[3:] == 1)
    x = np.linspace(0, 4, 401)
    assert np.all(np.diff(chi(x, 4.0)) >= 0)


def test_options_validation():
    with pytest.raises(ValueError):
        EvolveOptions(t_end=1.0, cfl=1.5)
    with pytest.raises(ValueError):
        EvolveOptions(t_end=1.0, variant="cutoff")
    with pytest.raises(ValueError):
        EvolveOptions(t_end=1.0, variant="perturbation", r0=4.0)
    with pytest.raises(ValueError):
        EvolveOptions(t_end=1.0, variant="other")


def test_zero_data_stays_zero():
    g = RadialGrid(2.0, 257)
    z = RadialProfile.zeros(g)
    tr = evolve(StatePair(z, z, P7, 0.0), EvolveOptions(t_end=1.0))
    assert np.all(tr.amplitude == 0) and np.all(tr.energy == 0) and np.all(tr.support == 0)
    assert tr.blowup is None
    assert support_radius(tr.states[-1]) == 0.0


def test_light_cone_must_stay_on_grid():
    g = RadialGrid(2.0, 257)
    with pytest.raises(EvolutionError):
        evolve(bump_state(g, 0.1), EvolveOptions(t_end=1.5))


def test_plateau_matches_ode_solution():
    g = RadialGrid(4.0, 2049)
    init = plateau_state(g, P7, T=1.0, R=2.0, width=0.5)
    assert init.u.values[0] == pytest.approx(P7.c_p, rel=1e-15)
    tr = evolve(init, EvolveOptions(t_end=0.5))
    exact = ode_blowup(tr.times, 1.0, P7)
    assert np.max(np.abs(tr.u_origin - exact)) < 1e-5


def test_blowup_detection():
    # at n = 2049 the last resolved steps already overshoot T and bias the exponent fit
    g = RadialGrid(4.0, 4097)
    tr = evolve(plateau_state(g, P7, T=1.0, R=2.0, width=0.5), EvolveOptions(t_end=1.2))
    assert tr.blowup is not None
    assert tr.blowup["T_est"] == pytest.approx(1.0, abs=1e-4)
    assert tr.blowup["fit_exponent"] == pytest.approx(-P7.beta, rel=0.02)
    # the discrete solution lags the continuum blow-up by a few steps
    assert tr.times[-1] < 1.0 + 10 * tr.dt


def test_tiny_data_follow_free_evolution():
    # at cfl = 1 the three-point leapfrog reproduces d'Alembert on the nodes
    g = RadialGrid(3.0, 2049)
    init = bump_state(g, 1e-4, centre=0.8, width=0.6)
    tr = evolve(init, EvolveOptions(t_end=1.0, cfl=1.0))
    st = tr.states[-1]
    v, _ = dalembert_evolve(FreeWaveData.from_u(init.u, init.ut), st.time)
    assert np.max(np.abs(g.r * st.u.values - v.values[:g.n])) < 1e-10


def test_energy_zero_and_two_forms():
    g = RadialGrid(4.0, 4097)
    z = RadialProfile.zeros(g)
    assert energy(StatePair(z, z, P7, 0.0)) == 0.0
    st = plateau_state(g, P7, T=1.0, R=2.0, width=0.5)
    eu, ev = energy(st, "u"), energy(st, "v")
    assert abs(eu - ev) <= 1e-8 * abs(eu)
    with pytest.raises(ValueError):
        energy(st, "w")


@pytest.mark.parametrize("sign", [1, -1])
def test_energy_conservation(sign):
    g = RadialGrid(3.0, 4097)
    tr = evolve(bump_state(g, 0.5, Params(7.0, sign)), EvolveOptions(t_end=1.0))
    e0 = tr.energy[0]
    assert np.max(np.abs(tr.energy - e0)) <= 1e-6 * (abs(e0) + 1)


def test_finite_speed():
    g = RadialGrid(3.0, 2049)
    tr = evolve(bump_state(g, 0.5), EvolveOptions(t_end=1.0))
    assert np.all(tr.support <= 1.0 + tr.times + 2 * g.dr)


def test_finite_speed_inward_blowup():
    # data supported in [0, 1] blowing up before t = 1
    g = RadialGrid(4.0, 4097)
    init = bump_state(g, 3.0)
    tr = evolve(init, EvolveOptions(t_end=2.0))
    assert tr.blowup is not None and tr.blowup["T_est"] < 1.0
    p, A = P7.p, tr.amplitude
    resolved = tr.dt ** 2 * p * A ** (p - 1) < 0.05
    assert np.all(tr.support[resolved] <= 1.0 + tr.times[resolved])


def test_cutoff_variant_is_free_near_origin():
    g = RadialGrid(4.0, 2049)
    r0 = 8.0
    init = bump_state(g, 2.0, width=r0 / 8)
    t_end = r0 / 4 - r0 / 8 - 2 * g.dr
    cut = evolve(init, EvolveOptions(t_end=t_end, variant="cutoff", r0=r0))
    free = evolve(init, EvolveOptions(t_end=t_end, linear=True))
    assert np.array_equal(cut.states[-1].u.values, free.states[-1].u.values)


def test_time_reversibility():
    g = RadialGrid(3.0, 2049)
    init = bump_state(g, 0.8)
    fwd = evolve(init, EvolveOptions(t_end=0.5))
    end = fwd.states[-1]
    back_init = StatePair(end.u, end.ut.with_values(-end.ut.values), P7, 0.0)
    back = evolve(back_init, EvolveOptions(t_end=0.5))
    err = np.max(np.abs(back.states[-1].u.values - init.u.values))
    assert err < 50 * fwd.dt ** 2


def test_backward_evolution():
    g = RadialGrid(3.0, 2049)
    init = bump_state(g, 0.3)
    tr = evolve(StatePair(init.u, init.ut, P7, 1.0), EvolveOptions(t_end=0.5))
    assert tr.times[-1] == pytest.approx(0.5)
    assert np.all(np.diff(tr.times) < 0)


def test_snapshots_at_exact_times():
    g = RadialGrid(4.0, 2049)
    tr = evolve(plateau_state(g, P7, T=1.0, R=2.0, width=0.5),
                EvolveOptions(t_end=0.5, snap_times=(0.1234, 0.4)))
    for t in (0.1234, 0.4):
        st = tr.state_at(t)
        assert st.u.values[0] == pytest.approx(float(ode_blowup(t, 1.0, P7)), rel=1e-5)


def test_critical_norm_trace_zero_and_modes():
    g = RadialGrid(2.0, 257)
    z = RadialProfile.zeros(g)
    tr = evolve(StatePair(z, z, P7, 0.0), EvolveOptions(t_end=0.5, snap_every=10))
    out = critical_norm_trace(tr)
    assert np.all(out["total"] == 0)
    out = critical_norm_trace(tr, ("lightcone", 1.0))
    assert np.all(out["total"] == 0)
    with pytest.raises(ValueError):
        critical_norm_trace(tr, "sideways")


def test_critical_norm_is_linear_in_amplitude():
    g = RadialGrid(4.0, 2049)
    a = evolve(bump_state(g, 1e-3), EvolveOptions(t_end=0.3))
    b = evolve(bump_state(g, 2e-3), EvolveOptions(t_end=0.3))
    na, nb = critical_norm_trace(a)["total"], critical_norm_trace(b)["total"]
    assert np.allclose(nb, 2 * na, rtol=1e-9)
