import numpy as np
import pytest

from wavelab.radial import (AlgebraicTail, Params, RadialGrid, RadialProfile, bump, derivative,
                            exterior_identity, exterior_smallness, hdot_norm, interpolate,
                            psi_truncate, quadrature, random_bump_profile, second_derivative,
                            sine_transform, strauss_ratio)

# independent values (mpmath, 30 digits)
C_P7 = 0.873580464736298869047220426814
PI_4 = 0.785398163397448299634014040531
GAUSS_EXT_R1 = 0.258221542161406728918171193176   # int_1^inf (2 r e^{-r^2})^2 r^2 dr


def gaussian(n=8001, r_max=8.0):
    g = RadialGrid(r_max, n)
    return RadialProfile.from_function(g, lambda r: np.exp(-r * r))


def test_params_exponents():
    P = Params(7.0)
    assert P.s_p == pytest.approx(1.5 - 1.0 / 3.0, abs=1e-15)
    assert P.q_p == 9.0
    assert P.alpha == pytest.approx(-2.0 / 3.0, abs=1e-15)
    assert -1 < P.alpha < -0.5
    assert P.c_p == pytest.approx(C_P7, rel=1e-14)
    assert P.c_p ** 6 == pytest.approx(4.0 / 9.0, rel=1e-14)


@pytest.mark.parametrize("p,sign", [(1.0, 1), (7.0, 0), (7.0, 2)])
def test_params_rejects(p, sign):
    with pytest.raises(ValueError):
        Params(p, sign)


def test_grid():
    g = RadialGrid(2.0, 401)
    assert g.dr == pytest.approx(0.005)
    assert g.r[0] == 0.0 and g.r[-1] == pytest.approx(2.0)
    with pytest.raises(ValueError):
        RadialGrid(1.0, 8)


def test_quadrature_examples():
    g = RadialGrid(1.0, 1025)
    one = RadialProfile(g, np.ones(g.n))
    assert quadrature(one, "r2", 0.0, 1.0) == pytest.approx(1.0 / 3.0, rel=1e-12)
    assert quadrature(one, "cone", 0.0, 1.0, beta=-0.5) == pytest.approx(PI_4, rel=1e-8)
    zero = RadialProfile.zeros(g)
    for w, b in (("1", None), ("r2", None), ("cone", -0.5)):
        assert quadrature(zero, w, beta=b) == 0.0


def test_quadrature_nonintegrable_weight():
    g = RadialGrid(1.0, 257)
    one = RadialProfile(g, np.ones(g.n))
    with pytest.raises(ValueError):
        quadrature(one, "cone", 0.0, 1.0, beta=-1.5)


def test_algebraic_tail_closes_integral():
    # f = 1/r^4 beyond 1 is carried by its tail model: int_1^inf r^-4 r^2 dr = 1
    g = RadialGrid(2.0, 2049)
    f = RadialProfile(g, np.where(g.r >= 1, 1.0 / np.maximum(g.r, 1) ** 4, 1.0), AlgebraicTail(4, 1.0))
    assert quadrature(f, "r2", 1.0, None) == pytest.approx(1.0, rel=1e-8)


def test_derivatives_fourth_order():
    errs = []
    for n in (401, 801):
        g = RadialGrid(3.0, n)
        f = np.sin(g.r)
        errs.append(np.max(np.abs(derivative(f, g.dr) - np.cos(g.r))))
        assert np.max(np.abs(second_derivative(f, g.dr) + f)) < 1e-5
    assert errs[0] / errs[1] > 12
    g = RadialGrid(1.0, 65)
    assert np.all(derivative(np.full(g.n, 2.5), g.dr) == 0.0)
    assert np.all(second_derivative(np.full(g.n, 2.5), g.dr) == 0.0)


def test_interpolate_is_exact_at_nodes_and_accurate_between():
    g = RadialGrid(2.0, 801)
    f = np.exp(-g.r)
    assert np.allclose(interpolate(f, g.dr, g.r), f, rtol=0, atol=1e-15)
    x = np.linspace(0, 2, 777)
    assert np.max(np.abs(interpolate(f, g.dr, x) - np.exp(-x))) < 1e-10


def test_sine_transform_half_wave():
    g = RadialGrid(np.pi, 4097)
    v = RadialProfile(g, np.sin(g.r))
    xi = np.array([0.5, 1.0, 2.5])
    V = sine_transform(v, xi)
    expect = np.array([np.sin(np.pi * 0.5) / (1 - 0.25), np.pi / 2, np.sin(np.pi * 2.5) / (1 - 6.25)])
    assert np.allclose(V, expect, rtol=1e-6, atol=1e-6)


def test_sine_transform_zero_and_origin_check():
    g = RadialGrid(1.0, 65)
    assert np.all(sine_transform(RadialProfile.zeros(g), np.linspace(0, 5, 7)) == 0)
    with pytest.raises(ValueError):
        sine_transform(RadialProfile(g, np.ones(g.n)))


def test_plancherel_random_bump():
    rng = np.random.default_rng(11)
    g = RadialGrid(4.0, 4097)
    v = random_bump_profile(rng, g, support=2.0)
    ft = sine_transform(v)
    lhs = 2 / np.pi * np.sum(ft.values ** 2) * ft.grid.dr
    rhs = quadrature(v.with_values(v.values ** 2), "1")
    assert lhs == pytest.approx(rhs, rel=1e-6)


def test_hdot_norm_zero_and_l2():
    g = RadialGrid(8.0, 4097)
    assert hdot_norm(RadialProfile.zeros(g), 1.2) == 0.0
    f = RadialProfile(g, bump((g.r - 1.5) / 1.2) + 0.3 * bump(g.r / 0.8))
    n0 = hdot_norm(f, 0.0)
    assert n0 ** 2 == pytest.approx(quadrature(f.with_values(f.values ** 2), "r2"), rel=1e-6)


def test_hdot_norm_h1_matches_v_derivative():
    g = RadialGrid(8.0, 4097)
    f = RadialProfile(g, bump((g.r - 1.5) / 1.2))
    dv = derivative(g.r * f.values, g.dr)
    assert hdot_norm(f, 1.0) ** 2 == pytest.approx(quadrature(f.with_values(dv ** 2), "1"), rel=1e-6)


@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_hdot_norm_scaling(lam):
    s = Params(7.0).s_p
    g = RadialGrid(16.0, 8193)
    base = RadialProfile(g, bump((g.r - 2.0) / 1.5))
    scaled = RadialProfile(g, bump((g.r / lam - 2.0) / 1.5))
    assert hdot_norm(scaled, s) == pytest.approx(lam ** (1.5 - s) * hdot_norm(base, s), rel=1e-4)


def test_hdot_norm_under_resolved():
    g = RadialGrid(1.0, 65)
    rough = RadialProfile(g, np.where((g.r > 0.3) & (g.r < 0.6), 1.0, 0.0))
    with pytest.raises(ValueError):
        hdot_norm(rough, 2.0)


def test_exterior_identity_gaussian():
    lhs, rhs = exterior_identity(gaussian(), 1.0)
    assert lhs == pytest.approx(GAUSS_EXT_R1, rel=1e-8)
    assert abs(lhs - rhs) <= 1e-8 * lhs


def test_exterior_identity_zero_and_inverse_r():
    g = RadialGrid(4.0, 4001)
    assert exterior_identity(RadialProfile.zeros(g), 1.0) == (0.0, 0.0)
    # u = 1/r outside r0 = 1 (smoothly capped inside): v is constant there
    u = RadialProfile(g, 1.0 / np.maximum(g.r, 0.5), AlgebraicTail(1.0, 1.0))
    lhs, rhs = exterior_identity(u, 1.0)
    assert lhs == pytest.approx(1.0, rel=1e-8)
    assert rhs == pytest.approx(1.0, rel=1e-8)


def test_strauss_ratio():
    g = RadialGrid(16.0, 8193)
    f = RadialProfile(g, bump((g.r - 2.0) / 1.5))
    assert strauss_ratio(f) <= 1.0
    capped = RadialProfile(g, np.where(g.r < 12, 1.0 / np.maximum(g.r, 1.0),
                                       bump((g.r - 12) / 4.0) / 12.0))
    assert strauss_ratio(capped) <= 1.0
    with pytest.raises(ValueError):
        strauss_ratio(RadialProfile.zeros(g))


def test_strauss_random_sweep():
    rng = np.random.default_rng(5)
    g = RadialGrid(8.0, 4097)
    worst = max(strauss_ratio(random_bump_profile(rng, g, support=3.0)) for _ in range(100))
    assert worst <= 1 + 1e-6


def test_psi_truncate():
    g = RadialGrid(4.0, 801)
    f = RadialProfile(g, np.cos(g.r))
    h = RadialProfile(g, np.sin(g.r) ** 2)
    ft, ht = psi_truncate(f, h, 1.0)
    inside = g.r <= 1.0
    assert np.allclose(ft.values[inside], np.cos(1.0), atol=1e-12)
    assert np.all(ht.values[g.r < 1.0] == 0)
    assert np.array_equal(ft.values[~inside], f.values[~inside])
    # idempotent
    ft2, ht2 = psi_truncate(ft, ht, 1.0)
    assert np.allclose(ft2.values, ft.values, atol=1e-14)
    assert np.array_equal(ht2.values, ht.values)
    # tiny R: identity up to the first cell
    fs, hs = psi_truncate(f, h, g.dr)
    assert np.max(np.abs(fs.values - f.values)) < 1e-4
    # constant f stays constant
    c = RadialProfile(g, np.full(g.n, 3.0))
    ct, _ = psi_truncate(c, h, 2.0)
    assert np.allclose(ct.values, 3.0)


def test_psi_truncate_norm_is_exterior_plus_core():
    # the frozen core has no gradient, so N_1(f~)^2 = int_R^inf f_r^2 r^2 dr, which
    # in v = r f~ form splits as int_R^inf v_r^2 dr + R f(R)^2
    g = RadialGrid(12.0, 8193)
    f = RadialProfile(g, bump((g.r - 1.0) / 2.5))
    ft, _ = psi_truncate(f, RadialProfile.zeros(g), 1.0)
    lhs, rhs = exterior_identity(f, 1.0)
    assert hdot_norm(ft, 1.0) ** 2 == pytest.approx(lhs, rel=1e-4)
    assert hdot_norm(ft, 1.0) ** 2 == pytest.approx(rhs, rel=1e-4)


def test_exterior_smallness():
    g = RadialGrid(8.0, 4097)
    z = RadialProfile.zeros(g)
    assert exterior_smallness(z, z, 1.0, 7.0) == 0.0
    inner = RadialProfile(g, bump(g.r / 0.9))
    assert exterior_smallness(inner, z, 1.0, 7.0) == 0.0
    f = RadialProfile(g, bump((g.r - 3.0) / 2.5))
    vals = [exterior_smallness(f, f, r0, 7.0) for r0 in (1.0, 2.0, 4.0)]
    assert vals[0] >= vals[1] >= vals[2] > 0
