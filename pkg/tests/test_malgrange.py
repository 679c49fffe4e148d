import pytest

from connexa.connmat import apply_gauge, flatness_residuals, induced_euler
from connexa.errors import ShapeError
from connexa.euler import euler_normal_form, realizable_by_te
from connexa.formalnf import NormalFormId, build_normal_form
from connexa.malgrange import (
    assign_c1,
    build_hnf,
    classify_holomorphic,
    first_type_normal_form,
    holo_normal_form_second_type,
    malgrange_connection,
    malgrange_xy,
    second_type_replay,
    xy_residuals,
)
from connexa.origin import ConstMat
from connexa.scalars import ONE, QUARTER, S, ZERO, integer
from connexa.series import TSeries, exp_linear

from conftest import rand_nonzero, rand_scalar

NZ, NT = 8, 12


def test_xy_initial_conditions_and_residuals(rng):
    for _ in range(15):
        binf = ConstMat(*[rand_scalar(rng, 3) for _ in range(4)])
        c0 = rand_nonzero(rng, 3)
        st = malgrange_xy(binf, c0, NT)
        assert st.x[0].is_zero() and st.y[0] == c0
        rx, ry = xy_residuals(st)
        assert rx.is_zero() and ry.is_zero()


def test_xy_closed_form_double_root():
    # entries (B11, B12, B21, B22) with B12*B21 = -1/16, B11-B22 = -1/2,
    # B12 = c0: x = 4 c0 t/(t+4), y = (c0/16) e^{-t} (t+4)^2
    c0 = S(2)
    binf = ConstMat(ZERO, -(ONE / integer(32)), -QUARTER, c0)
    st = malgrange_xy(binf, c0, NT)
    assert st.closed_form_checked
    t = TSeries.var(NT)
    inv = (TSeries.one(NT) + t.scale(QUARTER)).invert()
    assert st.x == t.scale(c0) * inv
    poly = TSeries.of([4, 1], NT).pow_int(2)
    assert st.y == (exp_linear(S(-1), NT) * poly).scale(c0 / S(16))


def test_xy_closed_form_triangular():
    # B21 = 0, B11 - B22 = -1/2: x = 2 c0 (1 - e^{-t/2}), y = c0 e^{-t/2}
    c0 = S(3)
    binf = ConstMat(ZERO, ZERO, -QUARTER, c0)
    st = malgrange_xy(binf, c0, NT)
    assert st.closed_form_checked
    decay = exp_linear(S("-1/2"), NT)
    assert st.x == (TSeries.one(NT) - decay).scale(S(2) * c0)
    assert st.y == decay.scale(c0)


def test_connection_flat_and_profiled(rng):
    binf = ConstMat(S(1), S(2), S("1/3"), S(-1))
    c0 = S(2)
    st = malgrange_xy(binf, c0, NT)
    s = malgrange_connection(st, S(1), NZ)
    assert flatness_residuals(s).flat
    a2 = s.A2
    assert a2.c1.is_zero()
    assert (a2 * a2).is_zero()
    # B^(0) + (t1 - c) C1 is independent of t1 and d1 B^(0) = -C1
    assert s.B.dt1() == -(
        __import__("connexa.connmat", fromlist=["Mat2"]).Mat2.identity(NZ, NT)
    )


def test_second_type_branches_and_c1():
    c0 = S(1)
    b0o = ConstMat(S(1), c0, ZERO, ZERO)
    for b21, family, lam in [
        (S("-1/16"), "HNF-MAL1", None),
        (S("15/16"), "HNF-MAL2", S(1)),
        (S("3/16"), "HNF-MAL3", None),
    ]:
        binf = ConstMat(S("1/2"), b21, -QUARTER, c0)
        res = holo_normal_form_second_type(b0o, binf, NZ, NT)
        assert res.normal_form.family == family
        if lam is not None:
            assert res.normal_form.params["lam"] == lam
        assert assign_c1(res.normal_form) == b21
        assert second_type_replay(res, S(1), NZ)
        assert flatness_residuals(res.target).flat


def test_second_type_rejects_first_type():
    b0o = ConstMat(S(0), S(1), ZERO, ZERO)
    binf = ConstMat(S(0), ZERO, -QUARTER, S(1))
    with pytest.raises(ShapeError):
        holo_normal_form_second_type(b0o, binf, NZ, NT)


def test_lambda_branch_invariance():
    # both root orders give the same invariant; lam and -lam-2 match
    lam = S(1)
    other = -lam - S(2)
    c0 = S(3)
    c1a = (S(4) * lam * lam + S(8) * lam + S(3)) / (S(16) * c0)
    c1b = (S(4) * other * other + S(8) * other + S(3)) / (S(16) * c0)
    assert c1a == c1b


def test_first_type_lands_on_unit_family():
    c0, c, alpha = S(2), S(1), S("1/2")
    b0o = ConstMat(c, c0, ZERO, ZERO)
    binf = ConstMat(alpha, ZERO, -QUARTER, c0)
    nfid, target, steps, st = first_type_normal_form(b0o, binf, NZ, NT)
    assert nfid == NormalFormId("F1", dict(c=c, alpha=alpha, c0=c0))
    univ = malgrange_connection(st, c, NZ)
    out = univ
    for g in steps:
        out = apply_gauge(out, g)
    nz = min(out.orders[0], target.orders[0])
    nt = min(out.orders[1], target.orders[1])
    assert out.truncate(nz, nt) == target.truncate(nz, nt)
    e = induced_euler(target)
    assert e.g == TSeries.var(NT).scale(S("1/2")) - TSeries.const(c0, NT)


def test_intermediate_pullback_matrices():
    # the intermediate frame of the first-type path:
    # A2 = C2 + t2 D - t2^2 E before the final shear
    c0, c = S(2), S(0)
    b0o = ConstMat(c, c0, ZERO, ZERO)
    binf = ConstMat(ZERO, ZERO, -QUARTER, c0)
    nfid, target, steps, st = first_type_normal_form(b0o, binf, NZ, NT)
    univ = malgrange_connection(st, c, NZ)
    mid = apply_gauge(univ, steps[0])
    from connexa.connmat import Mat2
    from connexa.series import ZTSeries

    nzm, ntm = mid.orders
    t2 = ZTSeries.t2(nzm, ntm)
    expected_a2 = (
        Mat2.basis("c2", nzm, ntm)
        + Mat2.basis("d", nzm, ntm).scale_zt(t2)
        - Mat2.basis("e", nzm, ntm).scale_zt(t2 * t2)
    )
    assert mid.A2 == expected_a2


def test_classify_elementary():
    s = build_normal_form(
        NormalFormId("NF3-3", dict(c=S(1), alpha=S(0), lam=S("1/2"))), NZ, NT
    )
    rep = classify_holomorphic(s)
    assert rep.elementary
    assert rep.normal_form.family == "NF3-3"
    assert "coincide" in rep.notes[0]


def test_classify_nonelementary_forms():
    s = build_normal_form(
        NormalFormId("F1", dict(c=S(1), alpha=S(0), c0=S(2))), NZ, NT
    )
    rep = classify_holomorphic(s)
    assert not rep.elementary
    assert rep.normal_form.family == "F1"
    assert rep.pencil.c1.is_zero()
    assert rep.formal_vs_holo.isomorphic  # identity pencil data
    s = build_hnf(
        NormalFormId("HNF-MAL2", dict(c=S(0), alpha=S(0), c0=S(1), lam=S(1))),
        NZ, NT,
    )
    rep = classify_holomorphic(s)
    assert rep.normal_form == NormalFormId(
        "HNF-MAL2", dict(c=S(0), alpha=S(0), c0=S(1), lam=S(1))
    )
    assert rep.pencil.c1 == S("15/16")
    assert not rep.formal_vs_holo.isomorphic
    s = build_hnf(
        NormalFormId("HNF-MAL3", dict(c=S(0), alpha=S(0), c0=S(2))), NZ, NT
    )
    rep = classify_holomorphic(s)
    assert rep.normal_form.family == "HNF-MAL3"
    assert rep.pencil.u() == S("3/16")


def test_assign_c1_table():
    mk = lambda fam, **p: NormalFormId(fam, {"c": ZERO, "alpha": ZERO, **p})
    assert assign_c1(mk("HNF-MAL1", c0=S(2))) == S("-1/32")
    assert assign_c1(mk("HNF-MAL3", c0=S(1))) == S("3/16")
    assert assign_c1(mk("HNF-MAL2", c0=S(1), lam=S(1))) == S("15/16")
    assert assign_c1(mk("F1", c0=S(5))).is_zero()
    with pytest.raises(ShapeError):
        assign_c1(mk("F1", c0=S(0)))


def test_classify_accepts_deformation_frame():
    # structures in the raw deformation frame are reduced automatically
    binf = ConstMat.from_entries(S("1/4"), S(2), S(0), S("3/4"))
    st = malgrange_xy(binf, S(2), 10)
    s = malgrange_connection(st, S(1), 8)
    rep = classify_holomorphic(s)
    assert rep.normal_form == NormalFormId(
        "F1", dict(c=S(1), alpha=S("1/2"), c0=S(2))
    )
    assert rep.pencil.c1.is_zero() and rep.formal_vs_holo.isomorphic
    binf = ConstMat.from_entries(S("-1/4"), S(1), S("15/16"), S("1/4"))
    st = malgrange_xy(binf, S(1), 12)
    s = malgrange_connection(st, S(0), 10)
    rep = classify_holomorphic(s)
    assert rep.normal_form.family == "HNF-MAL2"
    assert rep.pencil.c1 == S("15/16")
    assert not rep.warnings  # restriction is an exact pencil after reduction


def test_induced_fields_of_normal_forms_realizable():
    for build, fam, params in [
        (build_normal_form, "F1", dict(c0=S(2))),
        (build_normal_form, "NF3-2", dict()),
        (build_hnf, "HNF-MAL1", dict(c0=S(1))),
        (build_hnf, "HNF-MAL2", dict(c0=S(1), lam=S(1))),
        (build_hnf, "HNF-MAL3", dict(c0=S(1))),
    ]:
        nf = NormalFormId(fam, dict(c=S(0), alpha=S(0), **params))
        s = build(nf, NZ, NT)
        e = induced_euler(s)
        enf = euler_normal_form(e).normal_form
        assert realizable_by_te(enf)
