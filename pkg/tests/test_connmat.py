import pytest

from connexa.connmat import (
    GaugeMap,
    Mat2,
    TEStruct,
    apply_gauge,
    apply_isomorphism,
    compose_gauges,
    flatness_residuals,
    gauge_residuals,
    induced_euler,
    invert_gauge,
    restrict_origin,
    scalar_exp_gauge,
)
from connexa.errors import NotInvertibleError, UnfoldingError
from connexa.formalnf import NormalFormId, build_normal_form
from connexa.scalars import HALF, S, ZERO
from connexa.series import TSeries, ZTSeries

from conftest import rand_scalar

NZ = NT = 8


def basis(which):
    return Mat2.basis(which, 4, 4)


def test_product_table():
    c1, c2, d, e = basis("c1"), basis("c2"), basis("d"), basis("e")
    assert c2 * c2 == Mat2.zero(4, 4)
    assert d * d == c1
    assert e * e == Mat2.zero(4, 4)
    assert c2 * d == c2
    assert d * c2 == -c2
    assert d * e == e
    assert e * d == -e
    assert c2 * e == (c1 - d).scale(HALF)
    assert e * c2 == (c1 + d).scale(HALF)
    assert c2.commutator(d) == c2.scale(S(2))
    assert c2.commutator(e) == -d
    assert d.commutator(e) == e.scale(S(2))
    assert e.commutator(c2) == d


def test_mat_mul_matches_entrywise(rng):
    for _ in range(1000):
        comps = []
        for _ in range(8):
            vals = [rand_scalar(rng, 2) for _ in range(2)]
            comps.append(ZTSeries.from_zcoeffs(
                [TSeries.of(vals, 3)], 3))
        a = Mat2(*comps[:4])
        b = Mat2(*comps[4:])
        prod = a * b
        a11, a12, a21, a22 = a.entries()
        b11, b12, b21, b22 = b.entries()
        m11 = a11 * b11 + a12 * b21
        m12 = a11 * b12 + a12 * b22
        m21 = a21 * b11 + a22 * b21
        m22 = a21 * b12 + a22 * b22
        assert prod == Mat2.from_entries(m11, m12, m21, m22)


def test_inverse(rng):
    for _ in range(20):
        m = Mat2.identity(5, 4)
        bump = Mat2(
            ZTSeries.z_monomial(rand_scalar(rng, 2), 1, 5, 4),
            ZTSeries.t2(5, 4).scale(rand_scalar(rng, 2)),
            ZTSeries.z_monomial(rand_scalar(rng, 2), 2, 5, 4),
            ZTSeries.t2(5, 4),
        )
        m = m + bump
        inv = m.inverse()
        assert m * inv == Mat2.identity(5, 4)
        assert inv * m == Mat2.identity(5, 4)
    with pytest.raises(NotInvertibleError):
        Mat2.basis("c2", 4, 4).inverse()


def _nf(family, **params):
    return build_normal_form(NormalFormId(family, params), NZ, NT)


def test_flatness_examples():
    s = _nf("F1", c=S(0), alpha=S(0), c0=S(0))
    assert flatness_residuals(s).flat
    # A1=C1, A2=C2+zE, B=0 is not flat: the z A_i term survives
    zero = Mat2.zero(NZ, NT)
    a2 = Mat2.basis("c2", NZ, NT) + Mat2.basis("e", NZ, NT).scale_zt(
        ZTSeries.z(NZ, NT)
    )
    s_bad = TEStruct(Mat2.identity(NZ, NT), a2, zero, "TE")
    rep = flatness_residuals(s_bad)
    assert not rep.flat
    assert rep.rz1 == Mat2.identity(NZ, NT).shift_z(1)
    # constant commuting matrices give a flat family-only structure
    s_t = TEStruct(
        Mat2.identity(NZ, NT), Mat2.basis("c2", NZ, NT), zero, "T"
    )
    assert flatness_residuals(s_t).flat


def test_gauge_identity_and_round_trip(rng):
    s = _nf("F1", c=S(1), alpha=S("1/2"), c0=S(2))
    ident = GaugeMap(Mat2.identity(NZ, NT))
    assert apply_gauge(s, ident) == s
    g = scalar_exp_gauge(TSeries.of([0, 1, "1/2"], NZ), NZ, NT)
    out = apply_gauge(s, g)
    back = apply_gauge(out, invert_gauge(g))
    assert back == s.truncate(*back.orders)
    assert all(r.is_zero() for r in gauge_residuals(s, g, out))


def test_scalar_gauge_clears_tail():
    # b1 = c + alpha z + z^2 is cleared by exp(-z) C1
    s = _nf("F1", c=S(1), alpha=S(0), c0=S(1))
    g = scalar_exp_gauge(TSeries.of([0, 1], NZ), NZ, NT)
    out = apply_gauge(s, g)
    b1 = out.B.c1.zc[2].const
    assert b1 == TSeries.const(S(1), NT)  # picked up z^2 coefficient
    back = apply_gauge(out, scalar_exp_gauge(TSeries.of([0, -1], NZ), NZ, NT))
    assert back == s


def test_isomorphism_flip():
    s = _nf("F1", c=S(1), alpha=S("1/2"), c0=S(2))
    lam = TSeries.var(NT).scale(S(-1))
    out = apply_isomorphism(s, GaugeMap(Mat2.basis("d", NZ, NT), lam))
    target = _nf("F1", c=S(1), alpha=S("1/2"), c0=S(-2))
    assert out == target.truncate(*out.orders)


def test_compose_and_invert_isomorphisms(rng):
    s = _nf("NF3-2", c=S(1), alpha=S(0))
    lam1 = TSeries.of([0, 1, 1], NT)
    lam2 = TSeries.of([0, 2, 0, "1/3"], NT)
    g1 = GaugeMap(Mat2.identity(NZ, NT), lam1)
    g2 = GaugeMap(Mat2.identity(NZ, NT), lam2)
    seq = apply_gauge(apply_gauge(s, g1), g2)
    net = apply_gauge(s, compose_gauges(g1, g2))
    nz = min(seq.orders[0], net.orders[0])
    nt = min(seq.orders[1], net.orders[1])
    assert seq.truncate(nz, nt) == net.truncate(nz, nt)


def test_flatness_invariance(rng):
    s = _nf("NF3-5", c=S(1), alpha=S(2), lam=S(1), gamma=S(3))
    for _ in range(5):
        sigma = TSeries.of([ZERO] + [rand_scalar(rng, 2) for _ in range(3)], NZ)
        out = apply_gauge(s, scalar_exp_gauge(sigma, NZ, NT))
        assert flatness_residuals(out).flat


def test_induced_euler_examples():
    s = _nf("F1", c=S(1), alpha=S(0), c0=S(2))
    e = induced_euler(s)
    assert e.c == S(-1)
    assert e.g == TSeries.var(NT).scale(HALF) - TSeries.const(S(2), NT)
    s = _nf("FR", c=S(0), alpha=S(0), r=2)
    e = induced_euler(s)
    assert e.g == TSeries.var(NT).scale(S("1/4"))
    # B^(0) = -t1 C1 alone fails the unfolding span condition
    bad = TEStruct(
        Mat2.identity(NZ, NT),
        Mat2.basis("c2", NZ, NT).scale_zt(ZTSeries.t2(NZ, NT)),
        -Mat2.identity(NZ, NT).scale_zt(ZTSeries.t1(NZ, NT)),
        "TE",
    )
    with pytest.raises(UnfoldingError):
        induced_euler(bad)


def test_induced_euler_transforms_correctly(rng):
    # push-forward of the induced field matches the induced field of the image
    from connexa.euler import push_forward_g
    from connexa.formalnf import _mobius_gauge

    s = _nf("NF3-2", c=S(1), alpha=S(0))
    e = induced_euler(s)
    g = _mobius_gauge(S(2), S(1), S("1/2"), NZ, NT)
    out = apply_isomorphism(s, g)
    e2 = induced_euler(out)
    lam_inv = g.lam.truncate(out.orders[1]).reverse()
    pushed = push_forward_g(e.g, lam_inv)
    n = min(pushed.order, e2.g.order)
    assert pushed.truncate(n) == e2.g.truncate(n)
    assert e2.c == e.c


def test_restrict_origin():
    s = _nf("F1", c=S(1), alpha=S("1/2"), c0=S(2))
    r = restrict_origin(s)
    assert r.c == S(1) and r.alpha == S("1/2")
    assert r.eta == TSeries.const(S(2), NZ)  # b2 at the origin
    assert r.lam == TSeries.const(S("-1/2"), NZ)
    assert r.beta.is_zero()
    assert r.gam == TSeries.one(NZ - 1)
    # reconstruction matches the structure's pole matrix at the origin
    c1, c2, d, e = r.bz_components()
    oc1, oc2, od, oe = s.B.at_origin()
    n = c1.order
    assert c1 == oc1.truncate(n)
    assert c2 == oc2.truncate(n)
    assert d == od.truncate(n)
    assert e == oe.truncate(n)
    assert c2 == TSeries.const(S(2), n)
    assert d == TSeries.of([0, "-1/4"], n)
    assert e == TSeries.of([0, 2], n)
