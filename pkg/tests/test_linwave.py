import numpy as np
import pytest

from wavelab.linwave import (FreeWaveData, channel_check, dalembert_evolve, exterior_energy,
                             random_free_data)
from wavelab.radial import RadialGrid, RadialProfile, bump, derivative, quadrature


def energy_1d(v, vt):
    return quadrature(v.with_values(derivative(v.values, v.grid.dr) ** 2 + vt.values ** 2), "1")


def transport_data(sign=1.0):
    g = RadialGrid(6.0, 3001)
    v0 = RadialProfile(g, bump((g.r - 3.0) / 1.0))
    v1 = v0.with_values(sign * derivative(v0.values, g.dr))
    return FreeWaveData(v0, v1)


def test_time_zero_is_identity():
    data = transport_data()
    v, vt = dalembert_evolve(data, 0.0)
    assert np.allclose(v.values, data.v0.values, atol=1e-12)
    assert np.allclose(vt.values, data.v1.values, atol=1e-10)


@pytest.mark.parametrize("t", [0.7, 2.5, -1.3])
def test_energy_conserved(t):
    g = RadialGrid(5.0, 4001)
    v0 = RadialProfile(g, g.r * np.exp(-g.r ** 2) * np.where(g.r < 4.5, 1.0, 0.0))
    data = FreeWaveData(v0, RadialProfile.zeros(g))
    e0 = energy_1d(data.v0, data.v1)
    v, vt = dalembert_evolve(data, t)
    assert energy_1d(v, vt) == pytest.approx(e0, rel=1e-8)


def test_leftward_transport():
    data = transport_data(+1.0)
    t = 0.5
    v, _ = dalembert_evolve(data, t)
    expect = bump((v.r + t - 3.0) / 1.0)
    assert np.max(np.abs(v.values - expect)) < 1e-6


@pytest.mark.parametrize("n,tol", [(1601, 1e-5), (3201, 1e-6)])
def test_time_reversal(n, tol):
    g = RadialGrid(3.0, n)
    data = random_free_data(np.random.default_rng(3), g, support=1.5)
    t = 1.2
    v, vt = dalembert_evolve(data, t)
    back = FreeWaveData(v, vt.with_values(-vt.values))
    v2, vt2 = dalembert_evolve(back, t)
    assert np.max(np.abs(v2.values[:n] - data.v0.values)) < tol
    assert np.max(np.abs(-vt2.values[:n] - data.v1.values)) < tol


def test_finite_speed_exact():
    g = RadialGrid(2.0, 801)
    data = random_free_data(np.random.default_rng(9), g, support=1.0)
    for t in (0.3, 1.0, -0.8):
        v, vt = dalembert_evolve(data, t)
        out = v.r >= 1.0 + abs(t) + 1e-12
        assert np.all(v.values[out] == 0) and np.all(vt.values[out] == 0)


def test_odd_extension_requires_zero_at_origin():
    g = RadialGrid(1.0, 65)
    with pytest.raises(ValueError):
        FreeWaveData(RadialProfile(g, np.ones(g.n)), RadialProfile.zeros(g))


def test_exterior_energy_examples():
    g = RadialGrid(4.0, 2001)
    z = RadialProfile.zeros(g)
    assert exterior_energy(z, z, 1.0) == 0.0
    v = RadialProfile(g, bump((g.r - 1.0) / 0.45))
    assert exterior_energy(v, z, 0.0) == pytest.approx(energy_1d(v, z), rel=1e-12)
    assert exterior_energy(v, z, 1.5) == 0.0
    with pytest.raises(ValueError):
        exterior_energy(v, z, -1.0)


def test_channel_outgoing_keeps_everything_forward():
    data = transport_data(-1.0)
    rep = channel_check(data, 1.0, np.linspace(-3, 3, 61))
    assert rep.initial_exterior > 0
    assert rep.min_over_t_pos == pytest.approx(rep.initial_exterior, rel=1e-6)
    assert rep.ratio >= 0.5


def test_channel_zero_data():
    g = RadialGrid(2.0, 201)
    z = RadialProfile.zeros(g)
    rep = channel_check(FreeWaveData(z, z), 0.5, np.linspace(-1, 1, 11))
    assert rep.initial_exterior == rep.min_over_t_pos == rep.min_over_t_neg == 0.0


def test_channel_requires_symmetric_grid():
    data = transport_data()
    with pytest.raises(ValueError):
        channel_check(data, 0.0, np.linspace(0, 1, 5))
    with pytest.raises(ValueError):
        channel_check(data, -1.0)


def test_channel_small_sweep():
    rng = np.random.default_rng(123)
    g = RadialGrid(2.0, 801)
    t_grid = np.linspace(-5, 5, 201)
    for _ in range(10):
        data = random_free_data(rng, g, support=2.0)
        for r0 in (0.0, 0.5, 1.0):
            rep = channel_check(data, r0, t_grid)
            if rep.initial_exterior > 0:
                assert rep.ratio >= 0.5 - 1e-6
