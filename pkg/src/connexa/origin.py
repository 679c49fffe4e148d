"""Origin-slice analysis: elementary test, cyclic-vector valuation test,
eigen-section search, pole reduction to a constant pencil, and the
isomorphism decision between such pencils."""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt

from .connmat import Mat2, OriginRestriction
from .errors import (
    ExactFieldError,
    NotInvertibleError,
    ReductionFailedError,
    ShapeError,
)
from .formalnf import PreNormalForm
from .odekit import FuchsProblem, fuchs_regular_singular, solve_linear_system
from .scalars import HALF, ONE, QUARTER, ZERO, Scalar, integer
from .series import Laurent, TSeries, ZTSeries


# ---------------------------------------------------------------------------
# constant 2x2 matrices in the basis coordinates


@dataclass(frozen=True)
class ConstMat:
    c1: Scalar
    c2: Scalar
    d: Scalar
    e: Scalar

    @staticmethod
    def zero() -> ConstMat:
        return ConstMat(ZERO, ZERO, ZERO, ZERO)

    @staticmethod
    def identity() -> ConstMat:
        return ConstMat(ONE, ZERO, ZERO, ZERO)

    def __add__(self, o: ConstMat) -> ConstMat:
        return ConstMat(self.c1 + o.c1, self.c2 + o.c2, self.d + o.d, self.e + o.e)

    def __sub__(self, o: ConstMat) -> ConstMat:
        return ConstMat(self.c1 - o.c1, self.c2 - o.c2, self.d - o.d, self.e - o.e)

    def __neg__(self) -> ConstMat:
        return ConstMat(-self.c1, -self.c2, -self.d, -self.e)

    def scale(self, t: Scalar) -> ConstMat:
        return ConstMat(self.c1 * t, self.c2 * t, self.d * t, self.e * t)

    def __mul__(self, o: ConstMat) -> ConstMat:
        x1, x2, x3, x4 = self.c1, self.c2, self.d, self.e
        y1, y2, y3, y4 = o.c1, o.c2, o.d, o.e
        return ConstMat(
            x1 * y1 + x3 * y3 + (x2 * y4 + x4 * y2) * HALF,
            x1 * y2 + x2 * y1 + x2 * y3 - x3 * y2,
            x1 * y3 + x3 * y1 + (x4 * y2 - x2 * y4) * HALF,
            x1 * y4 + x4 * y1 + x3 * y4 - x4 * y3,
        )

    def det(self) -> Scalar:
        return self.c1 * self.c1 - self.d * self.d - self.c2 * self.e

    def inverse(self) -> ConstMat:
        dt = self.det()
        if dt.is_zero():
            raise NotInvertibleError("singular constant matrix")
        return ConstMat(self.c1 / dt, -self.c2 / dt, -self.d / dt, -self.e / dt)

    def conjugate_by(self, s: ConstMat) -> ConstMat:
        return s.inverse() * self * s

    def entries(self) -> tuple[Scalar, Scalar, Scalar, Scalar]:
        """(m11, m12, m21, m22)."""
        return (self.c1 + self.d, self.e, self.c2, self.c1 - self.d)

    @staticmethod
    def from_entries(m11, m12, m21, m22) -> ConstMat:
        return ConstMat((m11 + m22) * HALF, m21, (m11 - m22) * HALF, m12)

    def is_zero(self) -> bool:
        return all(x.is_zero() for x in (self.c1, self.c2, self.d, self.e))


def zmat(c1: TSeries, c2: TSeries, d: TSeries, e: TSeries) -> Mat2:
    """A z-only matrix as a Mat2 with t-order 1."""
    n = c1.order
    return Mat2(
        ZTSeries.from_zseries(c1, n, 1),
        ZTSeries.from_zseries(c2, n, 1),
        ZTSeries.from_zseries(d, n, 1),
        ZTSeries.from_zseries(e, n, 1),
    )


def zmat_coeff(m: Mat2, k: int) -> ConstMat:
    return ConstMat(
        m.c1.zc[k].const.at0(),
        m.c2.zc[k].const.at0(),
        m.d.zc[k].const.at0(),
        m.e.zc[k].const.at0(),
    )


def zmat_from_consts(coeffs: list[ConstMat], nz: int) -> Mat2:
    def ser(pick) -> TSeries:
        vals = [pick(c) for c in coeffs]
        vals += [ZERO] * (nz - len(vals))
        return TSeries(tuple(vals[:nz]))

    return zmat(
        ser(lambda c: c.c1), ser(lambda c: c.c2), ser(lambda c: c.d), ser(lambda c: c.e)
    )


def restriction_zmat(r: OriginRestriction) -> Mat2:
    return zmat(*r.bz_components())


# ---------------------------------------------------------------------------
# elementary dichotomy


def is_elementary(p: PreNormalForm) -> bool:
    """Exact product test at the base point."""
    f00, b200 = p.at_origin()
    return (f00 * b200).is_zero()


def restrict_prenormal(p: PreNormalForm) -> OriginRestriction:
    """Origin restriction straight from pre-normal data (no structure
    rebuild, so b2 need not be polynomial)."""
    return OriginRestriction(
        eta=p.b2.at_origin(),
        lam=p.b2.dt().at_origin(),
        beta=p.b2.dt().dt().at_origin(),
        gam=p.f.at_origin(),
        c=p.c,
        alpha=p.alpha,
    )


def is_elementary_restriction(r: OriginRestriction) -> bool:
    return (r.eta.at0() * r.gam.at0()).is_zero()


def cyclic_fuchs(r: OriginRestriction, twist: bool = True) -> bool:
    """Valuation test for a regular singularity of the (possibly trace-
    twisted) origin slice, via the cyclic-vector companion form."""
    c = ZERO if twist else r.c
    alpha = ZERO if twist else r.alpha
    n = min(r.eta.order, r.lam.order, r.beta.order, r.gam.order)
    eta = r.eta.truncate(n)
    lamz = r.lam.truncate(n)
    beta = r.beta.truncate(n)
    gam = r.gam.truncate(n)
    if eta.is_zero():
        # logarithmic-pole branch: the pole matrix is z * (holomorphic)
        return c.is_zero()
    half_lam1 = (lamz + TSeries.one(n)).scale(HALF)
    p = Laurent(-2, TSeries.of([c, alpha], n) - half_lam1.shift(1))
    q = Laurent(-2, eta)
    u = Laurent(-1, eta * gam - beta.scale(HALF).shift(1))
    w = Laurent(-2, TSeries.of([c, alpha], n) + half_lam1.shift(1))
    logq = q.log_derivative()
    a1 = p + logq + w
    a0 = p.dz() + q * u - p * logq - p * w
    return fuchs_regular_singular(FuchsProblem((a0, a1), 2, "v1"))


# ---------------------------------------------------------------------------
# eigen-section search


@dataclass(frozen=True)
class IrreducibilityReport:
    verdict: str  # "irreducible" | "reducible" | "inconclusive"
    witness_k: int | None = None
    witness: TSeries | None = None
    notes: tuple[str, ...] = ()


def irreducibility_check(
    r: OriginRestriction, k_min: int = None, k_max: int = None
) -> IrreducibilityReport:
    """Search for an eigen-section g = z^k * (unit) of the origin slice.

    No solution for any k in range certifies that the slice admits a
    constant-pencil reduction.  The coefficient equations are solved
    exactly; quadratic branch points outside Q(i) are reported as
    inconclusive rather than guessed.
    """
    n = min(r.eta.order, r.lam.order, r.beta.order, r.gam.order)
    if k_min is None:
        k_min = -n
    if k_max is None:
        k_max = n
    eta = r.eta.truncate(n)
    lamz = r.lam.truncate(n)
    beta = r.beta.truncate(n)
    gam = r.gam.truncate(n)
    if eta.is_zero():
        return IrreducibilityReport(
            "reducible", None, None, ("first frame vector is an eigen-section",)
        )
    notes: list[str] = []
    lam1 = lamz + TSeries.one(n)
    const_part = {}  # exponent -> Scalar, from -beta z^2/2 + eta gam z
    etagam = eta * gam
    for j, coeff in enumerate(etagam.coeffs):
        if not coeff.is_zero():
            const_part[j + 1] = const_part.get(j + 1, ZERO) + coeff
    for j, coeff in enumerate(beta.coeffs):
        if not coeff.is_zero():
            const_part[j + 2] = const_part.get(j + 2, ZERO) - coeff * HALF

    for k in range(k_min, k_max + 1):
        found = _try_eigen_section(k, n, eta, lam1, const_part, notes)
        if found is not None:
            return IrreducibilityReport("reducible", k, found, tuple(notes))
    verdict = "irreducible" if not notes else "inconclusive"
    return IrreducibilityReport(verdict, None, None, tuple(notes))


def _try_eigen_section(k, n, eta, lam1, const_part, notes):
    """Solve k z^{k+1} R + z^{k+2} R' - z^{k+1} lam1 R - z^{2k} eta R^2
    + (const part) = 0 coefficientwise for R with R(0) != 0."""

    def residual_coeff(o: int, coeffs: list[Scalar]) -> Scalar:
        acc = const_part.get(o, ZERO)
        j = o - (k + 1)
        if 0 <= j < n:
            acc = acc + integer(k + j) * coeffs[j]
            for i in range(j + 1):
                li = lam1[j - i]
                if not li.is_zero():
                    acc = acc - li * coeffs[i]
        m = o - 2 * k
        if m >= 0:
            for i in range(min(m, n - 1) + 1):
                ri = coeffs[i]
                if ri.is_zero():
                    continue
                for jj in range(min(m - i, n - 1) + 1):
                    ei = m - i - jj
                    if ei < n and not coeffs[jj].is_zero():
                        acc = acc - eta[ei] * ri * coeffs[jj]
        return acc

    o_min = min(2 * k, k + 1, min(const_part) if const_part else 1)
    o_max = o_min + n - 1
    first_app = lambda j: min(k + 1 + j, 2 * k + j)

    def solve_from(order: int, coeffs: list[Scalar], next_idx: int):
        for o in range(order, o_max + 1):
            while next_idx < n and first_app(next_idx) < o:
                next_idx += 1  # unknown never appeared; it stays 0
            probe = next_idx < n and first_app(next_idx) == o
            if not probe:
                if not residual_coeff(o, coeffs).is_zero():
                    return None
                continue
            vals = []
            for x in (ZERO, ONE, integer(2)):
                trial = list(coeffs)
                trial[next_idx] = x
                vals.append(residual_coeff(o, trial))
            c0 = vals[0]
            c2 = (vals[2] - vals[1] - vals[1] + vals[0]) * HALF
            c1 = vals[1] - vals[0] - c2
            if c2.is_zero():
                if c1.is_zero():
                    if not c0.is_zero():
                        return None
                    coeffs[next_idx] = ZERO  # undetermined here; pin to 0
                    next_idx += 1
                    continue
                coeffs[next_idx] = -c0 / c1
                next_idx += 1
                continue
            disc = c1 * c1 - integer(4) * c2 * c0
            root = disc.sqrt()
            if root is None:
                notes.append(
                    f"k={k}: branch point needs sqrt({disc}) outside Q(i)"
                )
                return None
            for sgn in (ONE, -ONE):
                x = (-c1 + root * sgn) / (integer(2) * c2)
                trial = list(coeffs)
                trial[next_idx] = x
                res = solve_from(o + 1, trial, next_idx + 1)
                if res is not None:
                    return res
            return None
        return coeffs

    out = solve_from(o_min, [ZERO] * n, 0)
    if out is None or out[0].is_zero():
        return None
    return TSeries(tuple(out))


# ---------------------------------------------------------------------------
# reduction to a constant pencil


@dataclass(frozen=True)
class BirkhoffReduction:
    b0: ConstMat
    binf: ConstMat
    gauge: Mat2  # z-only frame change, applied to the input
    log: tuple[str, ...] = ()


_C2 = ConstMat(ZERO, ONE, ZERO, ZERO)


def birkhoff_reduce(bz: Mat2) -> BirkhoffReduction:
    """Reduce z^{-2} B(z) dz to z^{-2}(B0 + z Binf) dz by a z-series frame.

    The residue must be regular with a single eigenvalue.  The z-linear
    target coefficient is fixed first: its components along the image of
    the residue bracket carry one genuine degree of freedom, used to kill
    the first obstruction in the unreachable direction.  With the target
    pinned, the frame is one exact global linear solve, and the defining
    equation is re-checked on the whole window.
    """
    nz = bz.nz
    if bz.nt != 1:
        raise ShapeError("expected a z-only matrix (t-order 1)")
    log: list[str] = []
    pre = Mat2.identity(nz, 1)
    cur = bz
    res = zmat_coeff(cur, 0)
    if res.d.is_zero() and res.e.is_zero():
        c0 = res.c2
        if c0.is_zero():
            raise ShapeError("residue is scalar, not regular")
    else:
        nil = res - ConstMat.identity().scale(res.c1)
        if not (nil * nil).is_zero():
            raise ShapeError("residue has two distinct eigenvalues")
        m11, m12, m21, m22 = nil.entries()
        if not (m11.is_zero() and m21.is_zero()):
            v = (ONE, ZERO)
        else:
            v = (ZERO, ONE)
        u = (m11 * v[0] + m12 * v[1], m21 * v[0] + m22 * v[1])
        s = ConstMat.from_entries(v[0], u[0], v[1], u[1])
        cur = _const_gauge(cur, s)
        pre = pre * _embed_const(s, nz)
        log.append("residue conjugated to lower-triangular form")
        res = zmat_coeff(cur, 0)
        c0 = res.c2
    b0 = ConstMat(res.c1, c0, ZERO, ZERO)
    coeffs = [zmat_coeff(cur, k) for k in range(nz)]
    if all(c.is_zero() for c in coeffs[2:]):
        binf = coeffs[1]
        return BirkhoffReduction(b0, binf, pre, tuple(log) + ("already a pencil",))

    def order2_obstruction(delta2: Scalar) -> Scalar:
        binf_try = coeffs[1] + _C2.scale(delta2)
        t1 = ConstMat(ZERO, ZERO, delta2 / (integer(2) * c0), ZERO)
        r2 = (
            -t1
            + t1 * binf_try
            - coeffs[1] * t1
            - (coeffs[2] if nz > 2 else ConstMat.zero())
        )
        return r2.e

    e_at_0 = order2_obstruction(ZERO)
    e_at_1 = order2_obstruction(ONE)
    slope = e_at_1 - e_at_0
    if slope.is_zero():
        if not e_at_0.is_zero():
            raise ReductionFailedError(
                "obstruction in the unreachable direction cannot be absorbed",
                order=2,
            )
        delta2 = ZERO
    else:
        delta2 = -e_at_0 / slope
    binf = coeffs[1] + _C2.scale(delta2)
    if not delta2.is_zero():
        log.append("z-linear target adjusted along the bracket image")

    # global linear solve for T^(1..nz-1); T^(0) = Id
    m_top = nz - 1
    nun = 4 * m_top

    def var(m: int, comp: int) -> int:  # comp: 0=c1, 1=c2, 2=d, 3=e
        return 4 * (m - 1) + comp

    def mul_basis(comp: int, right: ConstMat | None, left: ConstMat | None):
        """Row contribution of (X * right) or (left * X) for X a basis unit."""
        unit = [ZERO, ZERO, ZERO, ZERO]
        unit[comp] = ONE
        x = ConstMat(*unit)
        prod = x * right if right is not None else left * x
        return (prod.c1, prod.c2, prod.d, prod.e)

    btilde = {0: b0, 1: binf}
    rows: list[list[Scalar]] = []
    rhs: list[Scalar] = []
    for m in range(1, nz):
        row_block = [[ZERO] * nun for _ in range(4)]
        const_block = [ZERO, ZERO, ZERO, ZERO]
        # (m-1) T^(m-1)
        if m - 1 >= 1:
            for comp in range(4):
                row_block[comp][var(m - 1, comp)] = integer(m - 1)
        # sum_l B^(l) T^(m-l)
        for l in range(0, m + 1):
            bl = coeffs[l]
            ml = m - l
            if ml == 0:
                for comp, valv in enumerate((bl.c1, bl.c2, bl.d, bl.e)):
                    const_block[comp] = const_block[comp] + valv
            elif ml <= m_top:
                for comp in range(4):
                    contrib = mul_basis(comp, None, bl)
                    for out_c in range(4):
                        row_block[out_c][var(ml, comp)] = (
                            row_block[out_c][var(ml, comp)] + contrib[out_c]
                        )
        # - sum_l T^(m-l) Btilde^(l)
        for l, btl in btilde.items():
            ml = m - l
            if ml < 0:
                continue
            if ml == 0:
                for comp, valv in enumerate((btl.c1, btl.c2, btl.d, btl.e)):
                    const_block[comp] = const_block[comp] - valv
            elif ml <= m_top:
                for comp in range(4):
                    contrib = mul_basis(comp, btl, None)
                    for out_c in range(4):
                        row_block[out_c][var(ml, comp)] = (
                            row_block[out_c][var(ml, comp)] - contrib[out_c]
                        )
        for comp in range(4):
            rows.append(row_block[comp])
            rhs.append(-const_block[comp])
    solved = solve_linear_system(rows, rhs)
    if solved is None:
        raise ReductionFailedError(
            "global frame system is inconsistent inside the window"
        )
    sol, _free = solved
    tmats = [ConstMat.identity()] + [
        ConstMat(sol[var(m, 0)], sol[var(m, 1)], sol[var(m, 2)], sol[var(m, 3)])
        for m in range(1, nz)
    ]
    tser = zmat_from_consts(tmats, nz)
    if not birkhoff_residual(cur, tser, b0, binf).is_zero():
        raise ReductionFailedError("frame fails the defining equation")
    total = pre * tser
    log.append("frame found by one global linear solve")
    return BirkhoffReduction(b0, binf, total, tuple(log))


def _embed_const(s: ConstMat, nz: int) -> Mat2:
    return zmat(
        TSeries.const(s.c1, nz),
        TSeries.const(s.c2, nz),
        TSeries.const(s.d, nz),
        TSeries.const(s.e, nz),
    )


def _const_gauge(mat: Mat2, s: ConstMat) -> Mat2:
    return _z_gauge(mat, _embed_const(s, mat.nz))


def _z_gauge(mat: Mat2, t: Mat2) -> Mat2:
    """B -> T^{-1}(z^2 T' + B T) for z-only data."""
    return t.inverse() * (t.z2dz() + mat * t)


def birkhoff_residual(b_in: Mat2, t: Mat2, b0: ConstMat, binf: ConstMat) -> Mat2:
    nz = b_in.nz
    target = zmat_from_consts([b0, binf], nz)
    return t.z2dz() + b_in * t - t * target


# ---------------------------------------------------------------------------
# normalized pencil data and the isomorphism decision


@dataclass(frozen=True)
class BirkhoffData:
    """Invariant tuple of a non-elementary pencil in normalized shape."""

    c: Scalar
    alpha: Scalar
    c0: Scalar
    c1: Scalar

    def __post_init__(self):
        if self.c0.is_zero():
            raise ShapeError("pencil data requires c0 != 0")

    def u(self) -> Scalar:  # the product invariant c0*c1
        return self.c0 * self.c1

    def ssq(self) -> Scalar:  # the square invariant c0^2
        return self.c0 * self.c0

    def b0_matrix(self) -> ConstMat:
        return ConstMat(self.c, self.c0, ZERO, ZERO)

    def binf_matrix(self) -> ConstMat:
        return ConstMat(self.alpha, self.c1, -QUARTER, self.c0)


def normalize_birkhoff(b0: ConstMat, binf: ConstMat) -> tuple[BirkhoffData, list[ConstMat]]:
    """Constant conjugations onto the normalized pencil shape."""
    if not (b0.d.is_zero() and b0.e.is_zero()):
        raise ShapeError("pencil head must be c*C1 + c0*C2")
    if b0.c2.is_zero():
        raise ShapeError("pencil head must have c0 != 0")
    if binf.e.is_zero():
        raise ShapeError("the E coefficient of the z-part must be nonzero")
    gauges: list[ConstMat] = []
    cur_b0, cur_binf = b0, binf
    if cur_binf.d != -QUARTER:
        s = -(cur_binf.d + QUARTER) / cur_binf.e
        t1 = ConstMat(ONE, s, ZERO, ZERO)
        cur_b0 = cur_b0.conjugate_by(t1)
        cur_binf = cur_binf.conjugate_by(t1)
        gauges.append(t1)
    if cur_b0 != b0 or cur_binf.d != -QUARTER or cur_binf.e != binf.e:
        raise ShapeError("triangular conjugation left an unexpected shape")
    c0 = cur_b0.c2
    f = cur_binf.e
    if f != c0:
        c0_new = (c0 * f).sqrt()
        if c0_new is None:
            raise ExactFieldError(
                f"normalized c0 needs sqrt({c0 * f}) outside Q(i); "
                "use the invariant route instead"
            )
        denom = c0 - c0_new
        t2 = ConstMat(-(c0_new + c0) / denom, ZERO, -(c0_new - c0) / denom, ZERO)
        cur_b0 = cur_b0.conjugate_by(t2)
        cur_binf = cur_binf.conjugate_by(t2)
        gauges.append(t2)
    if not (
        cur_b0.d.is_zero()
        and cur_b0.e.is_zero()
        and cur_binf.d == -QUARTER
        and cur_binf.e == cur_b0.c2
    ):
        raise ShapeError("normalization left an unexpected shape")
    data = BirkhoffData(cur_b0.c1, cur_binf.c1, cur_b0.c2, cur_binf.c2)
    return data, gauges


def birkhoff_invariants(b0: ConstMat, binf: ConstMat) -> tuple[Scalar, Scalar, Scalar, Scalar]:
    """(c, alpha, c0^2, c0*c1) of the normalized pencil, never erring.

    These products are well defined even when the square root needed by
    normalize_birkhoff leaves Q(i).
    """
    if not (b0.d.is_zero() and b0.e.is_zero()):
        raise ShapeError("pencil head must be c*C1 + c0*C2")
    c0 = b0.c2
    f = binf.e
    if c0.is_zero() or f.is_zero():
        raise ShapeError("degenerate pencil")
    cur_binf = binf
    if cur_binf.d != -QUARTER:
        s = -(cur_binf.d + QUARTER) / f
        t1 = ConstMat(ONE, s, ZERO, ZERO)
        cur_binf = cur_binf.conjugate_by(t1)
    return (b0.c1, cur_binf.c1, c0 * f, cur_binf.c2 * f)


@dataclass(frozen=True)
class BirkhoffIsoReport:
    isomorphic: bool
    certificate: str
    n: int | None = None
    n_bound: int | None = None
    flags: tuple[str, ...] = ()


def _abs_bound(x: Scalar) -> int:
    """An integer upper bound for |x|."""
    n = x.norm_sq()
    return isqrt(int(n.numerator // n.denominator)) + 1


def birkhoff_iso_decision(
    d1: BirkhoffData, d2: BirkhoffData, n_max: int = 64
) -> BirkhoffIsoReport:
    """Decide isomorphism of two normalized pencils.

    Necessary conditions first, then the constant-isomorphism pre-check,
    then the quadratic chain condition indexed by n >= 2 with its side
    conditions.  Everything is expressed through the products c0^2 and
    c0*c1, which are invariant under the residual sign ambiguity.
    """
    if d1.c != d2.c or d1.alpha != d2.alpha:
        return BirkhoffIsoReport(False, "distinct trace invariants")
    if d1.ssq() != d2.ssq():
        return BirkhoffIsoReport(False, "distinct c0 up to sign")
    u1, u2 = d1.u(), d2.u()
    usum = u1 + u2
    udiff = u1 - u2
    # explicit bound on admissible n from the chain equation (informational;
    # the chain equation itself is solved in closed form)
    height = 8 * _abs_bound(usum) + 4 * _abs_bound(udiff) ** 2
    n_bound = 2 + isqrt(1 + height) // 2
    flags: tuple[str, ...] = ()
    if u1 == u2:
        cert = (
            "identity"
            if (d1.c0, d1.c1) == (d2.c0, d2.c1)
            else "constant isomorphism diag(1,-1)"
        )
        if d1.c1.is_zero() and d2.c1.is_zero() and d1.c0 == -d2.c0:
            if _chain_n(usum, udiff, n_max) is None:
                flags = flags + (
                    "constant isomorphism holds but the polynomial chain "
                    "condition has no admissible index",
                )
        return BirkhoffIsoReport(True, cert, None, n_bound, flags)
    n = _chain_n(usum, udiff, n_max)
    if n is None:
        return BirkhoffIsoReport(
            False, "no admissible chain index", None, n_bound, flags
        )
    return BirkhoffIsoReport(
        True, f"chain condition at n={n}", n, n_bound, flags
    )


def _chain_n(usum: Scalar, udiff: Scalar, n_max: int) -> int | None:
    """Solve 4 udiff^2 - 8 (n-1)^2 usum + (2n-1)(2n-3)(n-1)^2 = 0 exactly.

    With m = n - 1 the equation reads 4 m^4 - (8 usum + 1) m^2
    + 4 udiff^2 = 0, a quadratic in m^2, so the admissible integers are
    found in closed form; n_max only caps the side-condition sweep.
    """
    bcoef = integer(8) * usum + ONE
    disc = bcoef * bcoef - integer(64) * udiff * udiff
    root = disc.sqrt()
    if root is None:
        return None
    candidates: set[int] = set()
    for sign in (ONE, -ONE):
        msq = (bcoef + root * sign) / integer(8)
        if not msq.is_nonneg_integer():
            continue
        m = isqrt(msq.as_int())
        if m >= 1 and m * m == msq.as_int():
            candidates.add(m + 1)
    sweep_cap = max(n_max, 200_000)
    for n in sorted(candidates):
        nn = integer(n)
        ok = True
        for r in range(2, min(n, sweep_cap + 1)):
            rr = integer(r)
            num = (integer(2 * n - 1)) * (integer(2 * n - 3)) * (nn - ONE) ** 2 - (
                integer(2 * r - 1)
            ) * (integer(2 * r - 3)) * (rr - ONE) ** 2
            den = integer(8 * (n - r) * (n - 2 + r))
            if usum == num / den:
                ok = False
                break
        if ok:
            return n
    return None
