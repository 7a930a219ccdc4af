import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weyltrans.jets import GradJet, Jet, JetDomainError, JetError, compose, jet_space


def random_jet(rng, space, scale=1.0):
    return Jet(space, scale * rng.uniform(-1.0, 1.0, size=space.size))


def test_polynomial_product_two_vars():
    s = jet_space(2, 2)
    x = Jet.variable(s, 0, 0.0)
    y = Jet.variable(s, 1, 0.0)
    p = (1.0 + x) * (1.0 + y)
    assert p.coefficient((0, 0)) == 1.0
    assert p.coefficient((1, 0)) == 1.0
    assert p.coefficient((0, 1)) == 1.0
    assert p.coefficient((1, 1)) == 1.0
    assert p.coefficient((2, 0)) == 0.0


def test_multiplicative_identity():
    rng = np.random.default_rng(7)
    s = jet_space(3, 3)
    j = random_jet(rng, s)
    one = Jet.constant(s, 1.0)
    assert np.array_equal((j * one).coeffs, j.coeffs)


def test_geometric_series_via_division():
    s = jet_space(1, 3)
    x = Jet.variable(s, 0, 0.0)
    g = Jet.constant(s, 1.0) / (1.0 - x)
    # oracle: coefficients of 1/(1-x) are identically 1
    assert np.allclose(g.coeffs, np.ones(4), atol=1e-14)


def test_exp_series():
    s = jet_space(1, 2)
    x = Jet.variable(s, 0, 0.0)
    e = x.exp()
    assert np.allclose(e.coeffs, [1.0, 1.0, 0.5], atol=1e-15)


def test_log_exp_inverse_pair():
    rng = np.random.default_rng(11)
    s = jet_space(2, 3)
    for _ in range(20):
        a = random_jet(rng, s)
        back = a.exp().log()
        assert np.max(np.abs(back.coeffs - a.coeffs)) < 1e-12


def test_sin_at_constant():
    s = jet_space(1, 2)
    c = Jet.constant(s, math.pi / 2)
    v = c.sin()
    assert abs(v.value - 1.0) < 1e-15
    assert np.max(np.abs(v.coeffs[1:])) == 0.0


def test_partial_of_monomial():
    s = jet_space(2, 3)
    x = Jet.variable(s, 0, 0.0)
    y = Jet.variable(s, 1, 0.0)
    f = x * x * y
    d = f.partial(0)
    assert d.space.order == 2
    assert d.coefficient((1, 1)) == 2.0
    others = [a for a in d.space.exponents if a != (1, 1)]
    assert all(d.coefficient(a) == 0.0 for a in others)


def test_mixed_partials_commute():
    rng = np.random.default_rng(3)
    s = jet_space(3, 3)
    j = random_jet(rng, s)
    ab = j.partial(0).partial(1)
    ba = j.partial(1).partial(0)
    assert np.array_equal(ab.coeffs, ba.coeffs)


def test_partial_sin_is_cos():
    s = jet_space(1, 5)
    x = Jet.variable(s, 0, 0.4)
    lhs = x.sin().partial(0)
    rhs = Jet.variable(jet_space(1, 4), 0, 0.4).cos()
    assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) < 1e-14


def test_ring_axioms_random():
    rng = np.random.default_rng(42)
    s = jet_space(2, 3)
    for _ in range(50):
        a, b, c = (random_jet(rng, s) for _ in range(3))
        assoc = (a * b) * c - a * (b * c)
        dist = a * (b + c) - (a * b + a * c)
        assert np.max(np.abs(assoc.coeffs)) < 1e-12
        assert np.max(np.abs(dist.coeffs)) < 1e-12


def test_bit_reproducible():
    rng = np.random.default_rng(5)
    s = jet_space(3, 3)
    a = random_jet(rng, s)
    b = random_jet(rng, s)

    def work():
        return ((a * b + a) / (1.0 + b * b)).exp().coeffs

    assert np.array_equal(work(), work())


def test_first_order_matches_central_differences():
    # d/dx of exp(sin(x*y)) at (0.3, 0.7), jet vs finite differences
    def f(x, y):
        return math.exp(math.sin(x * y))

    s = jet_space(2, 1)
    x0, y0 = 0.3, 0.7
    j = (Jet.variable(s, 0, x0) * Jet.variable(s, 1, y0)).sin().exp()
    h = 1e-6
    fd_x = (f(x0 + h, y0) - f(x0 - h, y0)) / (2 * h)
    fd_y = (f(x0, y0 + h) - f(x0, y0 - h)) / (2 * h)
    assert abs(j.coefficient((1, 0)) - fd_x) < 1e-6
    assert abs(j.coefficient((0, 1)) - fd_y) < 1e-6


def test_space_mismatch_raises():
    a = Jet.constant(jet_space(2, 2), 1.0)
    b = Jet.constant(jet_space(2, 3), 1.0)
    with pytest.raises(JetError):
        a + b


def test_division_by_zero_constant_raises():
    s = jet_space(1, 2)
    x = Jet.variable(s, 0, 0.0)
    with pytest.raises(JetDomainError):
        (1.0 + x) / x


def test_log_domain_error():
    s = jet_space(1, 2)
    with pytest.raises(JetDomainError):
        Jet.constant(s, -2.0).log()


def test_partial_of_order_zero_raises():
    with pytest.raises(JetError):
        Jet.constant(jet_space(2, 0), 1.0).partial(0)


def test_pow_matches_repeated_multiplication():
    rng = np.random.default_rng(9)
    s = jet_space(2, 3)
    a = random_jet(rng, s) + 2.0
    assert np.max(np.abs((a**3).coeffs - (a * a * a).coeffs)) < 1e-12
    inv2 = a**-2
    direct = 1.0 / (a * a)
    assert np.max(np.abs(inv2.coeffs - direct.coeffs)) < 1e-12


def test_powf_against_exp_log():
    s = jet_space(1, 3)
    x = Jet.variable(s, 0, 1.7)
    lhs = x.powf(0.5)
    rhs = (0.5 * x.log()).exp()
    assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) < 1e-13


def test_compose_dispatcher():
    s = jet_space(1, 2)
    x = Jet.variable(s, 0, 0.2)
    assert np.allclose(compose("exp", x).coeffs, x.exp().coeffs)
    assert np.allclose(compose("pow_c", x, 3).coeffs, (x**3).coeffs)
    with pytest.raises(JetError):
        compose("tanh", x)


def test_truncate_and_restrict():
    s = jet_space(2, 3)
    x = Jet.variable(s, 0, 0.5)
    y = Jet.variable(s, 1, 2.0)
    f = x * y + y * y
    t = f.truncate(1)
    assert t.space.order == 1
    assert t.value == f.value
    assert t.coefficient((1, 0)) == f.coefficient((1, 0))
    r = f.restrict((1,))
    assert r.space.num_vars == 1
    # restriction fixes x at its base value: g(y) = 0.5*y + y^2
    assert abs(r.coefficient((1,)) - (0.5 + 2 * 2.0)) < 1e-14
    assert abs(r.coefficient((2,)) - 1.0) < 1e-14


def test_antiderivative_inverts_partial():
    s = jet_space(2, 3)
    x = Jet.variable(s, 0, 0.0)
    y = Jet.variable(s, 1, 0.0)
    f = x * y + x * x  # vanishes at x=0, exactly representable
    back = f.partial(0).antiderivative(0)
    # antiderivative lives one order lower than f was
    assert np.max(np.abs(back.coeffs - f.truncate(2).coeffs)) < 1e-14


def test_batched_matches_scalar():
    rng = np.random.default_rng(21)
    s = jet_space(2, 2)
    pts = rng.uniform(0.5, 1.5, size=5)
    xb = Jet.variable(s, 0, pts)
    fb = (xb * xb).log() + xb
    for i, p in enumerate(pts):
        xi = Jet.variable(s, 0, p)
        fi = (xi * xi).log() + xi
        assert np.max(np.abs(fb.coeffs[i] - fi.coeffs)) < 1e-14


def test_gradjet_tracks_ambient_partials():
    # f(u, v) = u^2 * exp(v); seed u, v as ambient directions over a jet base
    s = jet_space(1, 2)
    t = Jet.variable(s, 0, 0.3)
    u = GradJet.seed(t + 1.0, 0, 2)  # u = t + 1
    v = GradJet.seed(0.5 * t, 1, 2)  # v = t/2
    f = u * u * v.exp()
    # value: (t+1)^2 exp(t/2)
    direct = (t + 1.0) * (t + 1.0) * (0.5 * t).exp()
    assert np.max(np.abs(f.val.coeffs - direct.coeffs)) < 1e-13
    # df/du = 2u exp(v), df/dv = u^2 exp(v), both as jets in t
    du = 2.0 * (t + 1.0) * (0.5 * t).exp()
    dv = (t + 1.0) * (t + 1.0) * (0.5 * t).exp()
    assert np.max(np.abs(f.grad[0].coeffs - du.coeffs)) < 1e-13
    assert np.max(np.abs(f.grad[1].coeffs - dv.coeffs)) < 1e-13


@given(
    st.lists(st.floats(-1, 1), min_size=10, max_size=10),
    st.lists(st.floats(-1, 1), min_size=10, max_size=10),
)
@settings(max_examples=50, deadline=None)
def test_product_commutes(acoeffs, bcoeffs):
    s = jet_space(2, 2)  # ten coefficients
    a = Jet(s, np.array(acoeffs))
    b = Jet(s, np.array(bcoeffs))
    assert np.max(np.abs((a * b).coeffs - (b * a).coeffs)) < 1e-12
