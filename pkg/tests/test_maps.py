import math

import numpy as np
import pytest

from metriclab import geometry as G
from metriclab import maps as MP
from metriclab import metrics as M
from metriclab.errors import DivergentValueError, DomainError


@pytest.fixture(scope="module")
def hyp():
    return M.hyperbolic_density()


def test_identity_eval_and_derivative():
    f = MP.from_name("identity")
    z = 0.3 + 0.1j
    assert f(z) == pytest.approx(z)
    assert f.derivative(z) == pytest.approx(1.0)


def test_power_cusp_values():
    f = MP.PowerCusp(0.0, 0.25, 0.5)
    assert f(0.0) == pytest.approx(0.25)
    assert f.derivative(0.0) == pytest.approx(-0.125)
    with pytest.raises(DivergentValueError):
        f.derivative(1.0)
    # alpha = 1 has a finite derivative everywhere on the closed disc
    g = MP.PowerCusp(0.0, 0.25, 1.0)
    assert g.derivative(1.0) == pytest.approx(-0.25)


def test_blaschke_conventions():
    b = MP.BlaschkeProduct((0.0,))
    assert b(0.37 + 0.1j) == pytest.approx(0.37 + 0.1j)
    assert b.derivative(0.0) == pytest.approx(1.0)
    b2 = MP.BlaschkeProduct((0.5, -0.3j))
    # derivative at a zero of the product: product-rule branch
    fd = (b2(0.5 + 1e-8) - b2(0.5)) / 1e-8
    assert b2.derivative(0.5) == pytest.approx(fd, abs=1e-6)
    with pytest.raises(ValueError):
        MP.BlaschkeProduct((1.0,))


def test_map_validation_rejects_escaping_image():
    with pytest.raises(DomainError):
        MP.PolynomialMap((0.0, 3.0))  # 3z leaves the unit disc


def test_affine_into_compact_image(ellipse15):
    f = MP.AffineInto(ellipse15, MP.PolynomialMap((0.0, 1.0)), 0.5)
    rng = np.random.default_rng(9)
    zs = np.exp(2j * np.pi * rng.random(64)) * np.sqrt(rng.random(64))
    img = np.asarray(f(zs))
    assert bool(G.contains(ellipse15, img).all())
    assert float(G.curve_distance(ellipse15, img).min()) > 0.4
    with pytest.raises(ValueError):
        MP.AffineInto(ellipse15, MP.PolynomialMap((0.0, 1.0)), 1.5)


def test_weighted_derivative_values(hyp):
    ident = MP.from_name("identity")
    assert MP.weighted_derivative(ident, hyp, 0.0) == pytest.approx(1.0)
    sq = MP.from_name("square")
    assert MP.weighted_derivative(sq, hyp, 0.5) == pytest.approx(
        1.0 / (1 - 0.0625), abs=1e-12)


def test_weighted_derivative_outside_target(disc):
    qh = M.quasihyperbolic_density(G.ellipse(0.2, 0.1))
    ident = MP.from_name("identity")
    with pytest.raises(DomainError):
        MP.weighted_derivative(ident, qh, 0.5)


def test_hyperbolic_derivative_modulus_exact(hyp):
    rng = np.random.default_rng(123)
    zs = 0.85 * np.sqrt(rng.random(128)) * np.exp(2j * np.pi * rng.random(128))
    for name in ("identity", "square", "cusp_a50", "blaschke_pair"):
        f = MP.from_name(name)
        gap = np.abs(MP.weighted_derivative(f, hyp, zs)
                     - MP.hyperbolic_derivative_modulus(f, zs))
        assert float(gap.max()) < 1e-15


def test_limit_quotient_matches_weighted_derivative(hyp):
    # d_omega(f(z), f(z+h))/h -> f*(z); solver quotient at h = 0.02 within 5%
    h = 0.02
    points = (0.0, 0.3 + 0.1j, -0.25 - 0.2j)
    for name in ("identity", "scale_50", "cusp_a50", "cusp_a70", "blaschke_pair"):
        f = MP.from_name(name)
        for z in points:
            fstar = MP.weighted_derivative(f, hyp, z)
            fz, fw = complex(f(z)), complex(f(z + h))
            if fz == fw:
                continue
            q = M.weighted_distance(hyp, fz, fw, 1e-3).distance / h
            assert q == pytest.approx(fstar, rel=0.05), (name, z)


def test_limit_quotient_vanishing_derivative(hyp):
    # f(z) = z^2 at z = 0: f* = 0 and the quotient decays linearly in h,
    # q(h) = artanh(h^2)/h ~ h
    f = MP.from_name("square")
    assert MP.weighted_derivative(f, hyp, 0.0) == 0.0
    qs = []
    for h in (0.08, 0.04, 0.02):
        q = M.weighted_distance(hyp, complex(f(0.0)), complex(f(h)), 1e-3).distance / h
        assert q == pytest.approx(h, rel=1e-3)
        qs.append(q)
    assert qs[0] > qs[1] > qs[2]


def test_path_upper_bound_examples(hyp):
    ident = MP.from_name("identity")
    lhs, rhs = MP.path_upper_bound_check(ident, hyp, 0.0, 0.5)
    assert rhs == pytest.approx(math.atanh(0.5), abs=1e-9)
    assert lhs == pytest.approx(rhs, rel=1e-2)
    assert MP.path_upper_bound_check(ident, hyp, 0.3j, 0.3j) == (0.0, 0.0)
    sq = MP.from_name("square")
    lhs, rhs = MP.path_upper_bound_check(sq, hyp, -0.4, 0.4)
    assert lhs == 0.0
    assert rhs > 0.0


def test_path_upper_bound_random_triples(hyp):
    rng = np.random.default_rng(2718)
    names = ("identity", "square", "scale_50", "cusp_a50", "blaschke_pair")
    checked = 0
    while checked < 100:
        name = names[int(rng.integers(len(names)))]
        f = MP.from_name(name)
        z = complex(*(1.4 * (rng.random(2) - 0.5)))
        w = complex(*(1.4 * (rng.random(2) - 0.5)))
        if abs(z) > 0.75 or abs(w) > 0.75:
            continue
        fz, fw = complex(f(z)), complex(f(w))
        if abs(fz - fw) < 5e-3:
            continue
        checked += 1
        lhs, rhs = MP.path_upper_bound_check(f, hyp, z, w, resolution=0.02)
        assert lhs <= rhs * 1.01 + 1e-12, (name, z, w)


def test_boundary_trace_values():
    ident = MP.from_name("identity")
    tr = MP.boundary_trace(ident, 8, 1.0)
    assert np.allclose(tr.values[::2], [1, 1j, -1, -1j])
    assert tr.exact
    const = MP.from_name("const_25")
    trc = MP.boundary_trace(const, 16)
    assert np.allclose(trc.values, 0.25)
    cusp = MP.boundary_trace(MP.PowerCusp(0.0, 0.25, 0.5), 16, 1.0)
    assert cusp.values[0] == pytest.approx(0.0, abs=1e-12)
    assert cusp.values[8] == pytest.approx(0.25 * math.sqrt(2), abs=1e-12)
    # compactly contained image: the whole trace stays strictly inside
    assert bool(G.contains(G.unit_disc(), cusp.values).all())


def test_boundary_trace_validation():
    ident = MP.from_name("identity")
    with pytest.raises(ValueError):
        MP.boundary_trace(ident, 4)
    with pytest.raises(ValueError):
        MP.boundary_trace(ident, 16, 1.5)
    approx = MP.boundary_trace(ident, 16, 1 - 1e-4)
    assert not approx.exact
    assert approx.radius == 1 - 1e-4


def test_trace_export(tmp_path):
    tr = MP.boundary_trace(MP.from_name("identity"), 16)
    out = tmp_path / "trace.dat"
    MP.write_trace_file(tr, out)
    data = np.loadtxt(out)
    assert np.array_equal(data[:, 1] + 1j * data[:, 2], tr.values)


def test_catalog_resolution(ellipse15):
    cat = MP.catalog()
    assert set(cat) >= {"identity", "square", "cusp_a50"}
    f = MP.from_name("cusp_a50", ellipse15)
    assert f.variant == "affine_into"
    rng = np.random.default_rng(1)
    zs = np.sqrt(rng.random(32)) * np.exp(2j * np.pi * rng.random(32))
    assert bool(G.contains(ellipse15, np.asarray(f(zs))).all())
    with pytest.raises(ValueError):
        MP.from_name("no_such_map")
