import numpy as np
import pytest

from frontlab.errors import ConfigError, GridTooSmall
from frontlab.grid import Grid, build_ops, cutoffs, gaussian_quadrature_weights


def test_grid_points_centered():
    g = Grid(L=8.0, N=160, order=2)
    assert g.dx == pytest.approx(0.1)
    assert g.x[0] == pytest.approx(-8.0 + 0.05)
    assert g.x[-1] == pytest.approx(8.0 - 0.05)


def test_grid_rejects_unresolved_cutoff():
    with pytest.raises(ConfigError, match="cutoff unresolved"):
        Grid(L=8.0, N=64, order=2, m_cutoff=10.0)  # dx = 0.25


def test_grid_rejects_short_domain():
    with pytest.raises(ConfigError, match="do not vanish"):
        Grid(L=4.0, N=80, order=2, m_cutoff=10.0)


def test_build_ops_too_few_points():
    g = Grid(L=6.0, N=16, order=4, validate_cutoff=False)
    with pytest.raises(GridTooSmall):
        build_ops(g, 4)


def test_d1_order2_interior_stencil():
    g = Grid(L=6.0, N=120, order=2)
    ops = build_ops(g, 2)
    row = ops.D[1].toarray()[60]
    i = 60
    expected = np.zeros(g.N)
    expected[i - 1] = -1.0 / (2 * g.dx)
    expected[i + 1] = 1.0 / (2 * g.dx)
    assert np.allclose(row, expected, atol=1e-13)


def test_d2_order4_interior_stencil():
    g = Grid(L=6.0, N=120, order=4)
    ops = build_ops(g, 2)
    row = ops.D[2].toarray()[60]
    stencil = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12 * g.dx**2)
    assert np.allclose(row[58:63], stencil, rtol=1e-13)
    assert np.allclose(np.delete(row, range(58, 63)), 0.0)


def test_constants_annihilated_all_orders():
    for order in (2, 4):
        g = Grid(L=6.0, N=120, order=order)
        ops = build_ops(g, 4)
        ones = np.ones(g.N)
        for j, D in ops.D.items():
            assert np.max(np.abs(D @ ones)) == pytest.approx(0.0, abs=1e-11), (order, j)
            assert np.max(np.abs(np.asarray(D.sum(axis=1)).ravel())) < 1e-11


@pytest.mark.parametrize("order", [2, 4])
@pytest.mark.parametrize("deriv", [1, 2, 3, 4])
def test_differentiation_accuracy_order(order, deriv):
    # interior error on sin(x) must shrink at the nominal rate; coarser grids
    # for high derivatives keep the roundoff floor (~eps/dx^deriv) out of reach
    Ns = (120, 240, 480) if deriv <= 2 else (48, 96, 192)
    errs = []
    dxs = []
    for N in Ns:
        g = Grid(L=6.0, N=N, order=order, validate_cutoff=False)
        ops = build_ops(g, 4)
        f = np.sin(g.x)
        exact = np.sin(g.x + deriv * np.pi / 2.0)
        approx = ops.D[deriv] @ f
        interior = slice(8, g.N - 8)
        errs.append(np.max(np.abs((approx - exact)[interior])))
        dxs.append(g.dx)
    slope = np.polyfit(np.log(dxs), np.log(errs), 1)[0]
    assert abs(slope - order) < 0.2


def test_cutoffs_partition_of_unity():
    g = Grid(L=8.0, N=160)
    cd = cutoffs(g)
    assert np.all(cd.chi_plus + cd.chi_minus == 1.0)


def test_cutoff_values_and_slope():
    # chi_+ activates ahead of the front: ~0 in the wake, ~1 at +L,
    # value 1/2 and slope m/4 at the interface.
    g = Grid(L=8.0, N=320, m_cutoff=10.0)
    cd = cutoffs(g)
    i0 = np.argmin(np.abs(g.x))
    assert cd.chi_plus[-1] == pytest.approx(1.0, abs=1e-12)
    assert cd.chi_plus[0] == pytest.approx(0.0, abs=1e-12)
    # derivative near 0 matches the logistic formula m s(1-s) ~ m/4
    s = cd.chi_plus[i0]
    assert cd.dchi_plus[1][i0] == pytest.approx(10.0 * s * (1 - s), rel=1e-12)
    assert abs(cd.dchi_plus[1][i0] - 10.0 / 4.0) < 0.05


def test_cutoff_derivative_polynomials():
    # closed forms for the first four logistic derivatives
    g = Grid(L=8.0, N=320, m_cutoff=10.0)
    cd = cutoffs(g)
    s = cd.chi_plus
    m = 10.0
    base = s * (1 - s)
    assert np.allclose(cd.dchi_plus[1], m * base, rtol=1e-13)
    assert np.allclose(cd.dchi_plus[2], m**2 * base * (1 - 2 * s), rtol=1e-13)
    assert np.allclose(cd.dchi_plus[3], m**3 * base * (1 - 6 * s + 6 * s**2), rtol=1e-13)
    assert np.allclose(
        cd.dchi_plus[4], m**4 * base * (1 - 14 * s + 36 * s**2 - 24 * s**3), rtol=1e-12
    )


def test_cutoff_first_derivative_matches_finite_differences():
    g = Grid(L=8.0, N=3200, m_cutoff=10.0)
    cd = cutoffs(g)
    fd = np.gradient(cd.chi_plus, g.dx)
    mid = slice(g.N // 2 - 200, g.N // 2 + 200)
    assert np.allclose(fd[mid], cd.dchi_plus[1][mid], rtol=5e-5, atol=1e-8)


def test_cutoff_derivatives_vanish_at_boundary():
    g = Grid(L=8.0, N=160)
    cd = cutoffs(g)
    for k in range(1, 5):
        assert abs(cd.dchi_plus[k][0]) < 1e-12
        assert abs(cd.dchi_plus[k][-1]) < 1e-12


def test_quadrature_weights_sum_to_sqrt_pi():
    g = Grid(L=8.0, N=400)
    w = gaussian_quadrature_weights(g)
    assert np.sum(w) == pytest.approx(np.sqrt(np.pi), abs=1e-8)


def test_quadrature_zero_on_midpoint_profile():
    g = Grid(L=8.0, N=160)
    w = gaussian_quadrature_weights(g)
    u_minus, u_plus = 1.3, 0.2
    profile = np.full(g.N, 0.5 * (u_minus + u_plus))
    assert np.dot(w, profile - 0.5 * (u_minus + u_plus)) == pytest.approx(0.0, abs=1e-15)


def test_quadrature_weight_negligible_at_boundary():
    g = Grid(L=6.0, N=120)
    w = gaussian_quadrature_weights(g)
    assert w[0] < 1e-15
    assert w[-1] < 1e-15


def test_dirichlet_reflection_kills_constant_second_derivative():
    g = Grid(L=6.0, N=120, bc=("dirichlet", "dirichlet"))
    ops = build_ops(g, 2)
    ones = np.ones(g.N)
    # odd reflection does NOT annihilate constants at the boundary rows
    r = ops.D[2] @ ones
    assert abs(r[0]) > 1.0
    assert np.max(np.abs(r[10:-10])) < 1e-12
