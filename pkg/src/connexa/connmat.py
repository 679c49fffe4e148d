"""2x2 matrix algebra in the {C1, C2, D, E} basis and the structure model.

The basis is C1 = Id, C2 lower triangular, D diagonal, E upper triangular,
with the product table

    C2*C2 = 0      D*D = C1       E*E = 0
    C2*D  = C2     D*C2 = -C2     D*E = E      E*D = -E
    C2*E  = (C1 - D)/2            E*C2 = (C1 + D)/2

A structure is a triple (A1, A2, B) of such matrices over the z/t series
ring, with connection data z^{-1} A_i dt_i + z^{-2} B dz.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    NotInvertibleError,
    OrderMismatchError,
    ShapeError,
    T1DegreeError,
    UnfoldingError,
)
from .euler import EulerField
from .scalars import HALF, ONE, ZERO, Scalar
from .series import TSeries, ZTSeries

_NEG_HALF = -HALF


@dataclass(frozen=True)
class Mat2:
    """Coordinates of a 2x2 matrix in the {C1, C2, D, E} basis."""

    c1: ZTSeries
    c2: ZTSeries
    d: ZTSeries
    e: ZTSeries

    def __post_init__(self):
        o = self.c1.orders
        if not (self.c2.orders == o and self.d.orders == o and self.e.orders == o):
            raise OrderMismatchError("matrix components have mixed orders")

    @property
    def orders(self) -> tuple[int, int]:
        return self.c1.orders

    @property
    def nz(self) -> int:
        return self.c1.nz

    @property
    def nt(self) -> int:
        return self.c1.nt

    # -- constructors ----------------------------------------------------

    @staticmethod
    def zero(nz: int, nt: int) -> Mat2:
        z = ZTSeries.zero(nz, nt)
        return Mat2(z, z, z, z)

    @staticmethod
    def identity(nz: int, nt: int) -> Mat2:
        return Mat2.basis("c1", nz, nt)

    @staticmethod
    def basis(which: str, nz: int, nt: int, coeff=ONE) -> Mat2:
        comp = {k: ZTSeries.zero(nz, nt) for k in ("c1", "c2", "d", "e")}
        comp[which] = ZTSeries.const(coeff, nz, nt)
        return Mat2(**comp)

    @staticmethod
    def from_consts(c1, c2, d, e, nz: int, nt: int) -> Mat2:
        return Mat2(
            ZTSeries.const(c1, nz, nt),
            ZTSeries.const(c2, nz, nt),
            ZTSeries.const(d, nz, nt),
            ZTSeries.const(e, nz, nt),
        )

    # -- entrywise view (oracle) -------------------------------------------

    def entries(self) -> tuple[ZTSeries, ZTSeries, ZTSeries, ZTSeries]:
        """(m11, m12, m21, m22) = (c1 + d, e, c2, c1 - d)."""
        return (self.c1 + self.d, self.e, self.c2, self.c1 - self.d)

    @staticmethod
    def from_entries(m11: ZTSeries, m12: ZTSeries, m21: ZTSeries, m22: ZTSeries) -> Mat2:
        c1 = (m11 + m22).scale(HALF)
        d = (m11 - m22).scale(HALF)
        return Mat2(c1, m21, d, m12)

    # -- linear structure ---------------------------------------------------

    def __add__(self, o: Mat2) -> Mat2:
        return Mat2(self.c1 + o.c1, self.c2 + o.c2, self.d + o.d, self.e + o.e)

    def __sub__(self, o: Mat2) -> Mat2:
        return Mat2(self.c1 - o.c1, self.c2 - o.c2, self.d - o.d, self.e - o.e)

    def __neg__(self) -> Mat2:
        return Mat2(-self.c1, -self.c2, -self.d, -self.e)

    def scale(self, c: Scalar) -> Mat2:
        return Mat2(self.c1.scale(c), self.c2.scale(c), self.d.scale(c), self.e.scale(c))

    def scale_zt(self, q: ZTSeries) -> Mat2:
        return Mat2(self.c1 * q, self.c2 * q, self.d * q, self.e * q)

    def __mul__(self, o: Mat2) -> Mat2:
        x1, x2, x3, x4 = self.c1, self.c2, self.d, self.e
        y1, y2, y3, y4 = o.c1, o.c2, o.d, o.e
        c1 = x1 * y1 + x3 * y3 + (x2 * y4 + x4 * y2).scale(HALF)
        c2 = x1 * y2 + x2 * y1 + x2 * y3 - x3 * y2
        d = x1 * y3 + x3 * y1 + (x4 * y2 - x2 * y4).scale(HALF)
        e = x1 * y4 + x4 * y1 + x3 * y4 - x4 * y3
        return Mat2(c1, c2, d, e)

    def commutator(self, o: Mat2) -> Mat2:
        return self * o - o * self

    # -- queries ------------------------------------------------------------

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in (self.c1, self.c2, self.d, self.e))

    def is_t1_free(self) -> bool:
        return all(c.is_t1_free() for c in (self.c1, self.c2, self.d, self.e))

    def is_t2_free(self) -> bool:
        return all(c.is_t2_free() for c in (self.c1, self.c2, self.d, self.e))

    def map(self, fn) -> Mat2:
        return Mat2(fn(self.c1), fn(self.c2), fn(self.d), fn(self.e))

    def truncate(self, nz: int, nt: int) -> Mat2:
        return self.map(lambda c: c.truncate(nz, nt))

    def shift_z(self, k: int) -> Mat2:
        return self.map(lambda c: c.shift_z(k))

    def dz(self) -> Mat2:
        return self.map(lambda c: c.dz())

    def z2dz(self) -> Mat2:
        return self.map(lambda c: c.z2dz())

    def dt(self) -> Mat2:
        return self.map(lambda c: c.dt())

    def dt1(self) -> Mat2:
        return self.map(lambda c: c.dt1())

    def compose_t2(self, lam: TSeries) -> Mat2:
        return self.map(lambda c: c.compose_t2(lam))

    def at_origin(self) -> tuple[TSeries, TSeries, TSeries, TSeries]:
        return (
            self.c1.at_origin(),
            self.c2.at_origin(),
            self.d.at_origin(),
            self.e.at_origin(),
        )

    def const_term(self) -> tuple[Scalar, Scalar, Scalar, Scalar]:
        return (
            self.c1.zc[0].const.at0(),
            self.c2.zc[0].const.at0(),
            self.d.zc[0].const.at0(),
            self.e.zc[0].const.at0(),
        )

    # -- inversion -------------------------------------------------------------

    def inverse(self) -> Mat2:
        """Series inverse by Newton iteration; needs invertible constant term."""
        if not self.is_t1_free():
            raise T1DegreeError("only t1-free matrices are inverted")
        a, b, c, dd = self.const_term()
        det = a * a - c * c - b * dd
        if det.is_zero():
            raise NotInvertibleError("constant term is singular")
        nz, nt = self.orders
        inv0 = Mat2.from_consts(a / det, -b / det, -c / det, -dd / det, nz, nt)
        ident = Mat2.identity(nz, nt)
        x = inv0
        for _ in range(1 + max(nz + nt, 2).bit_length()):
            err = ident - self * x
            if err.is_zero():
                return x
            x = x + x * err
        if (ident - self * x).is_zero():
            return x
        raise NotInvertibleError("Newton iteration failed to converge")


def mat_mul(a: Mat2, b: Mat2) -> Mat2:
    return a * b


# ---------------------------------------------------------------------------
# structures


@dataclass(frozen=True)
class TEStruct:
    """Connection data z^{-1}A1 dt1 + z^{-1}A2 dt2 (+ z^{-2}B dz for kind TE)."""

    A1: Mat2
    A2: Mat2
    B: Mat2
    kind: str = "TE"  # "TE" | "T"

    def __post_init__(self):
        if self.kind not in ("TE", "T"):
            raise ShapeError("kind must be 'TE' or 'T'")
        if not (self.A1.orders == self.A2.orders == self.B.orders):
            raise OrderMismatchError("structure matrices have mixed orders")

    @property
    def orders(self) -> tuple[int, int]:
        return self.A1.orders

    def truncate(self, nz: int, nt: int) -> TEStruct:
        return TEStruct(
            self.A1.truncate(nz, nt),
            self.A2.truncate(nz, nt),
            self.B.truncate(nz, nt),
            self.kind,
        )

    def validate_t1_profile(self):
        """A_i must be t1-free; B may carry t1 only in its C1 slope, = -1."""
        if not (self.A1.is_t1_free() and self.A2.is_t1_free()):
            raise T1DegreeError("A-matrices must not depend on t1")
        for comp in (self.B.c2, self.B.d, self.B.e):
            if not comp.is_t1_free():
                raise T1DegreeError("B carries t1 outside its C1 component")
        if self.kind == "TE":
            slope = self.B.c1.t1_slope_z()
            expected = TSeries.of([-1], slope.order)
            if slope != expected or not all(
                a.slope.is_constant() for a in self.B.c1.zc
            ):
                raise ShapeError("B's C1 component must have t1 slope -1")


@dataclass(frozen=True)
class FlatnessReport:
    rt: Mat2
    rz1: Mat2 | None
    rz2: Mat2 | None

    @property
    def flat(self) -> bool:
        if not self.rt.is_zero():
            return False
        for r in (self.rz1, self.rz2):
            if r is not None and not r.is_zero():
                return False
        return True


def flatness_residuals(s: TEStruct) -> FlatnessReport:
    """Residuals of the zero-curvature equations, exact at reduced t-order.

    R_t   = z d1(A2) - z d2(A1) + [A1, A2]
    R_z,i = z di(B) - z^2 dz(A_i) + z A_i + [A_i, B]
    """
    nz, nt = s.orders
    ntr = nt - 1
    a1r = s.A1.truncate(nz, ntr)
    a2r = s.A2.truncate(nz, ntr)
    rt = (
        s.A2.dt1().truncate(nz, ntr).shift_z(1)
        - s.A1.dt().shift_z(1)
        + a1r.commutator(a2r)
    )
    if s.kind == "T":
        return FlatnessReport(rt, None, None)
    br = s.B.truncate(nz, ntr)
    rz1 = (
        s.B.dt1().shift_z(1)
        - s.A1.z2dz()
        + s.A1.shift_z(1)
        + s.A1.commutator(s.B)
    )
    rz2 = (
        s.B.dt().shift_z(1)
        - s.A2.z2dz().truncate(nz, ntr)
        + a2r.shift_z(1)
        + a2r.commutator(br)
    )
    return FlatnessReport(rt, rz1, rz2)


# ---------------------------------------------------------------------------
# gauge maps and base changes


@dataclass(frozen=True)
class GaugeMap:
    """A frame change T (expressed in source coordinates) covering the base
    automorphism (t1, t2) -> (t1, lam(t2)); lam None means the identity."""

    tmat: Mat2
    lam: TSeries | None = None

    def __post_init__(self):
        if not self.tmat.is_t1_free():
            raise T1DegreeError("gauge matrices must be t1-free")
        a, b, c, d = self.tmat.const_term()
        if (a * a - c * c - b * d).is_zero():
            raise NotInvertibleError("gauge constant term is singular")
        if self.lam is not None:
            if not self.lam.at0().is_zero():
                raise ShapeError("base map must fix the origin")
            if self.lam.order > 1 and self.lam[1].is_zero():
                raise NotInvertibleError("base map must be invertible at 0")

    def is_identity_base(self) -> bool:
        return self.lam is None


def identity_gauge(nz: int, nt: int) -> GaugeMap:
    return GaugeMap(Mat2.identity(nz, nt))


def scalar_exp_gauge(sigma_z: TSeries, nz: int, nt: int) -> GaugeMap:
    """exp(sigma(z)) * C1 with sigma(0) = 0."""
    if sigma_z.order != nz:
        raise OrderMismatchError("sigma order must match nz")
    expo = sigma_z.exp()
    comp = ZTSeries.from_zseries(expo, nz, nt)
    zero = ZTSeries.zero(nz, nt)
    return GaugeMap(Mat2(comp, zero, zero, zero))


def compose_gauges(first: GaugeMap, second: GaugeMap) -> GaugeMap:
    """The map equal to applying ``first`` then ``second``."""
    nz = min(first.tmat.nz, second.tmat.nz)
    nt = min(first.tmat.nt, second.tmat.nt)
    t1 = first.tmat.truncate(nz, nt)
    t2 = second.tmat.truncate(nz, nt)
    if second.lam is None:
        return GaugeMap(t1 * t2, first.lam.truncate(nt) if first.lam else None)
    lam2 = second.lam.truncate(nt)
    t1c = t1.compose_t2(lam2)
    tmat = t1c * t2
    if first.lam is None:
        lam = lam2
    else:
        lam = first.lam.truncate(nt).compose(lam2)
    return GaugeMap(tmat, lam)


def invert_gauge(g: GaugeMap) -> GaugeMap:
    if g.lam is None:
        return GaugeMap(g.tmat.inverse())
    lam_inv = g.lam.reverse()
    return GaugeMap(g.tmat.compose_t2(lam_inv).inverse(), lam_inv)


def apply_gauge(s: TEStruct, g: GaugeMap) -> TEStruct:
    """Image structure; for a pure gauge

        A~_i = T^{-1}(z di(T) + A_i T),   B~ = T^{-1}(z^2 dz(T) + B T)

    and for a base change the A2/B inputs are first composed with lam and
    the A2 relation picks up the lam' factor.
    """
    nz = min(s.orders[0], g.tmat.nz)
    nt = min(s.orders[1], g.tmat.nt)
    s = s.truncate(nz, nt)
    t = g.tmat.truncate(nz, nt)
    tinv = t.inverse()
    if g.lam is None:
        if t.is_t2_free():
            ntr = nt
            a2_src = s.A2
            b_src = s.B
            a1_src = s.A1
            t_r = t
            tinv_r = tinv
            zdt2 = Mat2.zero(nz, ntr)
        else:
            ntr = nt - 1
            a2_src = s.A2.truncate(nz, ntr)
            b_src = s.B.truncate(nz, ntr)
            a1_src = s.A1.truncate(nz, ntr)
            t_r = t.truncate(nz, ntr)
            tinv_r = tinv.truncate(nz, ntr)
            zdt2 = t.dt().shift_z(1)
        a1 = tinv_r * (a1_src * t_r)
        a2 = tinv_r * (zdt2 + a2_src * t_r)
        b = tinv_r * (t.z2dz().truncate(nz, ntr) + b_src * t_r)
        return TEStruct(a1, a2, b, s.kind)
    lam = g.lam.truncate(nt)
    ntr = nt - 1
    lam_dot = lam.derivative()
    a1c = s.A1.compose_t2(lam).truncate(nz, ntr)
    a2c = s.A2.compose_t2(lam).truncate(nz, ntr)
    bc = s.B.compose_t2(lam).truncate(nz, ntr)
    t_r = t.truncate(nz, ntr)
    tinv_r = tinv.truncate(nz, ntr)
    zdt2 = t.dt().shift_z(1)
    a1 = tinv_r * (a1c * t_r)
    a2 = tinv_r * (zdt2 + a2c.map(lambda c: c.mul_t(lam_dot)) * t_r)
    b = tinv_r * (t.z2dz().truncate(nz, ntr) + bc * t_r)
    return TEStruct(a1, a2, b, s.kind)


def apply_isomorphism(s: TEStruct, g: GaugeMap) -> TEStruct:
    """Alias separating the covered-base-map case in reports."""
    return apply_gauge(s, g)


def gauge_residuals(s: TEStruct, g: GaugeMap, out: TEStruct) -> list[Mat2]:
    """Residuals of the defining relations for the claimed image ``out``."""
    nz = min(s.orders[0], out.orders[0])
    nt = min(s.orders[1], out.orders[1]) - 1
    t = g.tmat
    if g.lam is None:
        lam_dot = None
        a1c, a2c, bc = s.A1, s.A2, s.B
    else:
        lam_dot = g.lam.derivative()
        a1c = s.A1.compose_t2(g.lam)
        a2c = s.A2.compose_t2(g.lam)
        bc = s.B.compose_t2(g.lam)
    tr = t.truncate(nz, nt)
    o = out.truncate(nz, nt)
    a2term = a2c.truncate(nz, nt)
    if lam_dot is not None:
        a2term = a2term.map(lambda c: c.mul_t(lam_dot.truncate(nt)))
    res1 = a1c.truncate(nz, nt) * tr - tr * o.A1
    res2 = t.dt().shift_z(1).truncate(nz, nt) + a2term * tr - tr * o.A2
    res3 = t.z2dz().truncate(nz, nt) + bc.truncate(nz, nt) * tr - tr * o.B
    return [res1, res2, res3]


# ---------------------------------------------------------------------------
# induced rescaling field and the origin restriction


def induced_euler(s: TEStruct) -> EulerField:
    """Solve e1 A1^(0) + e2 A2^(0) = -B^(0) for the induced field."""
    nz, nt = s.orders
    a1_0 = s.A1.map(lambda c: c.truncate(1, nt))
    if a1_0 != Mat2.identity(1, nt):
        raise UnfoldingError("A1 must be the identity at z-order 0")
    comps = []
    for zt in (s.A2.c2, s.A2.d, s.A2.e):
        ap = zt.zc[0]
        if not ap.is_t1_free():
            raise T1DegreeError("A2 must be t1-free")
        comps.append(ap.const)
    b_comps = []
    for zt in (s.B.c2, s.B.d, s.B.e):
        ap = zt.zc[0]
        if not ap.is_t1_free():
            raise T1DegreeError("B carries t1 outside its C1 component")
        b_comps.append(-ap.const)
    pivot = None
    for idx, comp in enumerate(comps):
        if not comp.at0().is_zero():
            pivot = idx
            break
    if pivot is None:
        raise UnfoldingError("A2^(0) does not complete a frame at the origin")
    e2 = b_comps[pivot].div(comps[pivot])
    for idx in range(3):
        if e2 * comps[idx] != b_comps[idx]:
            raise UnfoldingError("-B^(0) is not in the span of A1^(0), A2^(0)")
    a2c1 = s.A2.c1.zc[0].const
    bc1 = s.B.c1.zc[0]
    e1_const = -bc1.const - e2 * a2c1
    e1_slope = -bc1.slope
    if not (e1_slope.is_constant() and e1_slope.at0() == ONE):
        raise ShapeError("induced field has no unit t1 slope")
    if not e1_const.is_constant():
        raise ShapeError("induced field t1-part depends on t2")
    return EulerField(e1_const.at0(), e2)


@dataclass(frozen=True)
class OriginRestriction:
    """One-variable data of the structure restricted to t1 = t2 = 0."""

    eta: TSeries
    lam: TSeries
    beta: TSeries
    gam: TSeries
    c: Scalar
    alpha: Scalar

    def bz_components(self) -> tuple[TSeries, TSeries, TSeries, TSeries]:
        """(c1, c2, d, e) z-series of the restricted pole matrix."""
        n = min(self.eta.order, self.lam.order, self.beta.order, self.gam.order)
        c1 = TSeries.of([self.c, self.alpha], n)
        c2 = self.eta.truncate(n)
        d = (self.lam.truncate(n) + TSeries.one(n)).scale(_NEG_HALF).shift(1)
        e = (self.gam.truncate(n) * self.eta.truncate(n)).shift(1) - (
            self.beta.truncate(n).scale(HALF).shift(2)
        )
        return (c1, c2, d, e)


def prenormal_components(s: TEStruct) -> tuple[ZTSeries, ZTSeries, TSeries]:
    """(f, b2, b1) read off a structure with A1 = C1, A2 = C2 + z f E.

    Raises ShapeError if the structure is not of that shape or b1 is not
    constant in t2.
    """
    nz, nt = s.orders
    s.validate_t1_profile()
    if s.A1 != Mat2.identity(nz, nt):
        raise ShapeError("A1 must be C1")
    if (
        not s.A2.c1.is_zero()
        or not s.A2.d.is_zero()
        or s.A2.c2 != ZTSeries.one(nz, nt)
    ):
        raise ShapeError("A2 must be C2 + z f E")
    e_comp = s.A2.e
    if not e_comp.zc[0].is_zero():
        raise ShapeError("A2's E component must be divisible by z")
    if nz < 2:
        raise ShapeError("need z-order at least 2")
    f = ZTSeries(e_comp.zc[1:])  # exact to z-order nz - 1
    b2 = s.B.c2
    b1_zt = s.B.c1
    for ap in b1_zt.zc:
        if not ap.const.is_constant():
            raise ShapeError("B's C1 part must not depend on t2")
    b1 = TSeries(tuple(ap.const.at0() for ap in b1_zt.zc))
    return f, b2, b1


def restrict_origin(s: TEStruct) -> OriginRestriction:
    """Restriction at the origin of a structure in pre-normal shape."""
    f, b2, b1 = prenormal_components(s)
    if any(not c.is_zero() for c in b1.coeffs[2:]):
        raise ShapeError("not pre-normal: C1 part has z-order above 1")
    nz = s.orders[0]
    eta = b2.at_origin()
    lam = b2.dt().at_origin()
    beta = b2.dt().dt().at_origin()
    gam = f.at_origin().truncate(nz - 1)
    return OriginRestriction(
        eta=eta,
        lam=lam,
        beta=beta,
        gam=gam,
        c=b1[0],
        alpha=b1[1] if nz > 1 else ZERO,
    )
