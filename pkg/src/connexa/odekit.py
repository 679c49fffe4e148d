"""Solvable one-variable problems used by the classification pipelines.

Four problem classes: the regular linear recursion t*u' + A(t)u = b(t),
the quadratic-polynomial system m*x + b'*x - b*x' = g with x''' = 0, the
one-parameter Riccati family t*tau' + r*tau = tau^2 f (1 + c t^r tau),
and the valuation test for a regular singularity in companion form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    NoFormalSolutionError,
    NotAUnitError,
    UnsupportedShapeError,
)
from .scalars import ONE, ZERO, Scalar, integer
from .series import Laurent, TSeries

# Rational upper bound for 4*sum(1/n^2) = 2*pi^2/3 = 6.5797...; using a
# slightly larger rational keeps the convolution check fully exact.
CONV_CONSTANT = Fraction(329, 50)


# ---------------------------------------------------------------------------
# exact linear algebra on small matrices


def solve_linear_system(
    rows: list[list[Scalar]], rhs: list[Scalar]
) -> tuple[list[Scalar], list[int]] | None:
    """Solve rows * x = rhs exactly.

    Returns (solution, free_column_indices) with free variables set to
    zero, or None when the system is inconsistent.
    """
    m = len(rows)
    n = len(rows[0]) if m else 0
    a = [list(r) + [v] for r, v in zip(rows, rhs)]
    pivots: list[tuple[int, int]] = []
    r = 0
    for col in range(n):
        piv = None
        for i in range(r, m):
            if not a[i][col].is_zero():
                piv = i
                break
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = ONE / a[r][col]
        a[r] = [x * inv for x in a[r]]
        for i in range(m):
            if i != r and not a[i][col].is_zero():
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append((r, col))
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if not a[i][n].is_zero():
            return None
    sol = [ZERO] * n
    pivot_cols = set()
    for row, col in pivots:
        sol[col] = a[row][n]
        pivot_cols.add(col)
    free = [c for c in range(n) if c not in pivot_cols]
    return sol, free


# ---------------------------------------------------------------------------
# t u' + A(t) u = b(t)


@dataclass(frozen=True)
class LinearOdeSolution:
    u: tuple[TSeries, ...]
    free_parameters: tuple[tuple[int, int], ...]  # (order n, component index)


def solve_linear_t_ode(
    a_matrix: list[list[TSeries]], b_vector: list[TSeries]
) -> LinearOdeSolution:
    """Formal solution of t*u' + A(t)u = b(t) by coefficient recursion.

    Order n solves (n*Id + A(0)) u_n = b_n - sum_{k>=1} A^(k) u_{n-k}.
    Singular-but-consistent steps return one solution (free components
    set to zero) and report the freedom; inconsistent steps raise.
    """
    d = len(b_vector)
    order = b_vector[0].order
    for row in a_matrix:
        for entry in row:
            if entry.order != order:
                raise UnsupportedShapeError("matrix/vector orders differ")
    u_coeffs: list[list[Scalar]] = []
    freedoms: list[tuple[int, int]] = []
    for n in range(order):
        rows = [
            [
                (integer(n) if i == j else ZERO) + a_matrix[i][j][0]
                for j in range(d)
            ]
            for i in range(d)
        ]
        rhs = []
        for i in range(d):
            acc = b_vector[i][n]
            for k in range(1, n + 1):
                for j in range(d):
                    ak = a_matrix[i][j][k]
                    if not ak.is_zero():
                        acc = acc - ak * u_coeffs[n - k][j]
            rhs.append(acc)
        solved = solve_linear_system(rows, rhs)
        if solved is None:
            raise NoFormalSolutionError(
                f"inconsistent singular step at order {n}"
            )
        sol, free = solved
        freedoms.extend((n, j) for j in free)
        u_coeffs.append(sol)
    u = tuple(
        TSeries(tuple(u_coeffs[n][i] for n in range(order))) for i in range(d)
    )
    return LinearOdeSolution(u, tuple(freedoms))


def linear_t_ode_residual(
    a_matrix: list[list[TSeries]], b_vector: list[TSeries], u: tuple[TSeries, ...]
) -> list[TSeries]:
    d = len(b_vector)
    out = []
    for i in range(d):
        acc = u[i].xdx() - b_vector[i]
        for j in range(d):
            acc = acc + a_matrix[i][j] * u[j]
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# m x + b' x - b x' = g   with x''' = 0


@dataclass(frozen=True)
class ThirdDerSolution:
    verdict: str  # "unique" | "solvable-iff-condition" | "no-solution"
    x: TSeries | None
    condition: str = ""


def _quad(coeffs: tuple[Scalar, Scalar, Scalar], order: int) -> TSeries:
    return TSeries.of(list(coeffs), order)


def solve_third_der(m: Scalar, b: TSeries, g: TSeries) -> ThirdDerSolution:
    """Solve m*x + b'*x - b*x' = g over quadratic polynomials x.

    b must be one of the shapes lam*t, lam*t + 1, t^2; g must be a
    quadratic polynomial.  The three resonant verdicts follow the shape
    case analysis; at a resonant solvable step the free component is 0.
    """
    if m.is_zero():
        raise UnsupportedShapeError("m must be nonzero")
    order = b.order
    if any(not c.is_zero() for c in g.coeffs[3:]):
        raise UnsupportedShapeError("right side must be quadratic")
    g0, g1, g2 = g[0], (g[1] if order > 1 else ZERO), (g[2] if order > 2 else ZERO)
    bc = b.coeffs
    b0 = bc[0]
    b1 = bc[1] if order > 1 else ZERO
    b2 = bc[2] if order > 2 else ZERO
    tail_zero = all(c.is_zero() for c in bc[3:])

    if tail_zero and b2.is_zero() and (b0.is_zero() or b0 == ONE):
        lam = b1
        if b0.is_zero() and lam.is_zero():
            raise UnsupportedShapeError("b = 0 is outside the catalogue")
        affine = b0 == ONE
        if m != lam and m != -lam:
            x2 = g2 / (m - lam)
            if affine:
                x1 = (g1 + x2 + x2) / m
                x0 = (g0 + x1) / (m + lam)
            else:
                x1 = g1 / m
                x0 = g0 / (m + lam)
            return ThirdDerSolution("unique", _quad((x0, x1, x2), order))
        if m == lam:
            # t^2-component unreachable
            if not g2.is_zero():
                return ThirdDerSolution(
                    "no-solution", None, condition="g2 = 0 fails"
                )
            x2 = ZERO
            if affine:
                x1 = (g1 + x2 + x2) / m
                x0 = (g0 + x1) / (m + lam)
            else:
                x1 = g1 / m
                x0 = g0 / (m + lam)
            return ThirdDerSolution(
                "solvable-iff-condition", _quad((x0, x1, x2), order), "g2 = 0"
            )
        # m == -lam
        if affine:
            cond = m * m * g0 + m * g1 + g2
            if not cond.is_zero():
                return ThirdDerSolution(
                    "no-solution", None, condition="m^2 g0 + m g1 + g2 = 0 fails"
                )
            x2 = g2 / (m - lam)
            x1 = (g1 + x2 + x2) / m
            x0 = ZERO
            return ThirdDerSolution(
                "solvable-iff-condition",
                _quad((x0, x1, x2), order),
                "m^2 g0 + m g1 + g2 = 0",
            )
        if not g0.is_zero():
            return ThirdDerSolution("no-solution", None, condition="g0 = 0 fails")
        x0 = ZERO
        x1 = g1 / m
        x2 = g2 / (m - lam)
        return ThirdDerSolution(
            "solvable-iff-condition", _quad((x0, x1, x2), order), "g0 = 0"
        )

    if tail_zero and b0.is_zero() and b1.is_zero() and b2 == ONE:
        # b = t^2: triangular, always unique
        x0 = g0 / m
        x1 = (g1 - x0 - x0) / m
        x2 = (g2 - x1) / m
        return ThirdDerSolution("unique", _quad((x0, x1, x2), order))

    raise UnsupportedShapeError("b outside the three supported shapes")


def third_der_residual(m: Scalar, b: TSeries, x: TSeries, g: TSeries) -> TSeries:
    n = min(b.order, x.order, g.order) - 1
    bd = b.derivative().truncate(n)
    xd = x.derivative().truncate(n)
    bt = b.truncate(n)
    xt = x.truncate(n)
    return xt.scale(m) + bd * xt - bt * xd - g.truncate(n)


# ---------------------------------------------------------------------------
# t tau' + r tau = tau^2 f (1 + c t^r tau)


@dataclass(frozen=True)
class ConvergenceCertificate:
    m0: Fraction
    r0: Fraction
    n0: int


@dataclass(frozen=True)
class RiccatiSolution:
    c: Scalar
    tau: TSeries
    r: int
    free_index_value: Scalar
    certificate: ConvergenceCertificate | None = field(default=None)


def riccati_residual(sol: RiccatiSolution, f: TSeries, c: Scalar | None = None) -> TSeries:
    """t tau' + r tau - tau^2 f (1 + c t^r tau), exact at the input order."""
    cval = sol.c if c is None else c
    tau = sol.tau
    order = tau.order
    lhs = tau.xdx() + tau.scale(integer(sol.r))
    tail = TSeries.one(order) + (tau.shift(sol.r)).scale(cval)
    return lhs - tau * tau * f * tail


def solve_riccati_unique_c(
    f: TSeries, r: int, tau_r: Scalar, with_certificate: bool = False
) -> RiccatiSolution:
    """The unique constant c making the family solvable, plus one solution.

    tau_0 = r/f_0; below index r the coefficients are forced, the index-r
    coefficient is the free parameter, and beyond it the recursion
    (n - r) tau_n = sum_{j+k+p=n; k,p<=n-1} f_j tau_k tau_p
                    + c * sum_{j+k+p+s=n-r} tau_j tau_k tau_p f_s
    determines everything.
    """
    if r < 1:
        raise UnsupportedShapeError("r must be a positive integer")
    f0 = f[0]
    if f0.is_zero():
        raise NotAUnitError("f must be a unit")
    order = f.order
    if r >= order:
        raise UnsupportedShapeError("truncation order must exceed r")
    tau: list[Scalar] = [integer(r) / f0]

    def conv3(n: int) -> Scalar:
        # sum over j+k+p = n with k, p <= n-1 of f_j tau_k tau_p
        acc = ZERO
        for k in range(min(n, len(tau))):
            tk = tau[k]
            if tk.is_zero():
                continue
            for p in range(min(n - k, n - 1) + 1):
                tp = tau[p]
                if not tp.is_zero():
                    acc = acc + f[n - k - p] * tk * tp
        return acc

    def conv4(n: int) -> Scalar:
        # sum over j+k+p+s = n of tau_j tau_k tau_p f_s
        acc = ZERO
        for j in range(n + 1):
            tj = tau[j]
            if tj.is_zero():
                continue
            for k in range(n - j + 1):
                tk = tau[k]
                if tk.is_zero():
                    continue
                for p in range(n - j - k + 1):
                    tp = tau[p]
                    if not tp.is_zero():
                        acc = acc + tj * tk * tp * f[n - j - k - p]
        return acc

    for n in range(1, r):
        tau.append(conv3(n) / integer(n - r))
    c = -(conv3(r)) / (tau[0] ** 3 * f0)
    tau.append(tau_r)
    for n in range(r + 1, order):
        tau.append((conv3(n) + c * conv4(n - r)) / integer(n - r))
    tau_series = TSeries(tuple(tau))
    cert = None
    if with_certificate:
        cert = search_convergence_certificate(f, tau_series, r, c)
    return RiccatiSolution(c, tau_series, r, tau_r, cert)


def search_convergence_certificate(
    f: TSeries, tau: TSeries, r: int, c: Scalar
) -> ConvergenceCertificate | None:
    """Bounded grid search for geometric-bound witnesses (M0, r0, n0).

    Certifies |f_n| <= M0 r0^n/(n+1)^2 on the stored window (and, f being
    a stored polynomial, beyond), |tau_n| <= M0^{n+1} r0^n/(n+1)^2 for
    n < n0, and the single closed inequality that propagates the tau
    bound to all n >= n0.  Absence of a certificate is a warning only.
    """
    C = CONV_CONSTANT
    cnorm = c.norm_sq()

    def scalar_bounded(s: Scalar, bound: Fraction) -> bool:
        return s.norm_sq() <= bound * bound

    for m0_exp in range(0, 8):
        m0 = Fraction(2**m0_exp)
        for r0_exp in range(0, 16):
            r0 = Fraction(2**r0_exp)
            ok_f = all(
                scalar_bounded(f[n], m0 * r0**n / (n + 1) ** 2)
                for n in range(f.order)
            )
            if not ok_f:
                continue
            # longest prefix of tau obeying the geometric bound
            prefix = 0
            while prefix < tau.order and scalar_bounded(
                tau[prefix], m0 ** (prefix + 1) * r0**prefix / (prefix + 1) ** 2
            ):
                prefix += 1
            for n0 in range(r + 1, prefix + 1):
                # closed tail inequality: for all n >= n0,
                #   M0^2 + C|c| M0^{3-r} / r0^r * ((n+3)/(n-r+4))^2
                #     <= (1/C^2)(n-r) ((n+3)/(n+1))^2 .
                # The left side is maximal and the right side minimal at
                # n = n0 once (n-r) >= the left side's plateau, so one
                # exact check at n0 (with the conservative factor 1 for
                # ((n+3)/(n+1))^2) suffices.
                lhs = m0 * m0
                ratio = Fraction(n0 + 3, n0 - r + 4) ** 2
                # |c| <= sqrt of norm; use rational bound ceil
                cabs_sq = cnorm
                # bound C|c| M0^{3-r}/r0^r via squared comparison
                term_sq = C * C * cabs_sq * (m0 ** (2 * (3 - r))) / (r0 ** (2 * r))
                # conservative: lhs + sqrt(term_sq)*ratio <= (n0 - r)/C^2
                rhs = Fraction(n0 - r) / (C * C)
                margin = rhs - lhs
                if margin <= 0:
                    continue
                if term_sq * ratio * ratio <= margin * margin:
                    return ConvergenceCertificate(m0, r0, n0)
    return None


# ---------------------------------------------------------------------------
# convolution inequality


def check_convolution_inequality(l: int, b: int) -> dict:
    """Exact comparison of sum over compositions against C^{l-1} b^{-2}."""
    if not (2 <= l <= b):
        raise UnsupportedShapeError("need 2 <= l <= b")
    inv_sq = [Fraction(0)] + [Fraction(1, a * a) for a in range(1, b + 1)]
    conv = inv_sq[:]  # l = 1
    for _ in range(l - 1):
        nxt = [Fraction(0)] * (b + 1)
        for total in range(2, b + 1):
            acc = Fraction(0)
            for a in range(1, total):
                if conv[total - a]:
                    acc += conv[total - a] * inv_sq[a]
            nxt[total] = acc
        conv = nxt
    lhs = conv[b]
    rhs = CONV_CONSTANT ** (l - 1) / (b * b)
    return {"l": l, "b": b, "lhs": lhs, "rhs": rhs, "holds": lhs <= rhs}


# ---------------------------------------------------------------------------
# Fuchs criterion


@dataclass(frozen=True)
class FuchsProblem:
    """Companion data: nabla(v_{d-1}) = a_0 v_0 + ... + a_{d-1} v_{d-1}."""

    a_coeffs: tuple[Laurent, ...]
    d: int
    cyclic_vector: str = "v0"  # which frame section generated the companion


def fuchs_regular_singular(problem: FuchsProblem) -> bool:
    """Regular singularity iff v(a_i) >= i - d for every i."""
    for i, a in enumerate(problem.a_coeffs):
        v = a.valuation()
        if v is not None and v < i - problem.d:
            return False
    return True
