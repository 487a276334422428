"""Series evaluation, branch-tracked contour quadrature, period matrices and the verification suites."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import solve_ivp
from scipy.special import gamma as gamma_fn

from .chains import PATH, ElementaryChain, TwistedChain, bases, intersection_matrix_h
from .cocycles import RationalOneForm, phi0, phi_frame, psi_frame, residue_pairing
from .connection import PfaffianSystem
from .parameters import (DomainError, IndexClassification, InputError, ParameterVector,
                         PointConfiguration)

GL_NODES, GL_WEIGHTS = leggauss(15)
MAX_PANELS = 4000


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    error_estimate: float
    panels: int

    def __add__(self, other: "QuadratureResult") -> "QuadratureResult":
        return QuadratureResult(self.value + other.value, self.error_estimate + other.error_estimate,
                                self.panels + other.panels)

    def scale(self, c: complex) -> "QuadratureResult":
        return QuadratureResult(c * self.value, abs(c) * self.error_estimate, self.panels)


class QuadratureError(ArithmeticError):
    pass


def _gl(f: Callable, a: float, b: float) -> complex:
    h = 0.5 * (b - a)
    s = a + h * (GL_NODES + 1)
    return h * complex(np.dot(GL_WEIGHTS, f(s)))


def adaptive_quad(f: Callable, a: float, b: float, tol: float = 1e-12,
                  max_panels: int = MAX_PANELS) -> QuadratureResult:
    """Bisection-adaptive 15-point Gauss-Legendre on [a, b] for a vectorized f.

    A panel is accepted when its value and the sum over its two halves agree
    to within the panel's share of `tol` (relative to the running scale).
    """
    whole = _gl(f, a, b)
    stack = [(a, b, whole)]
    total, err, panels = 0j, 0.0, 0
    # cancellation inside the integral must not force an absolute accuracy
    # far below what the integrand's size allows
    mass = _gl(lambda s: np.abs(f(s)), a, b).real
    scale = max(abs(whole), mass, 1e-300)
    while stack:
        lo, hi, val = stack.pop()
        mid = 0.5 * (lo + hi)
        left, right = _gl(f, lo, mid), _gl(f, mid, hi)
        diff = abs(left + right - val)
        share = tol * scale * (hi - lo) / (b - a)
        if diff <= share or abs(hi - lo) < 1e-13 * abs(b - a):
            total += left + right
            err += diff
            panels += 2
            continue
        if panels + len(stack) > max_panels:
            raise QuadratureError(f"quadrature did not converge within {max_panels} panels")
        stack.append((mid, hi, right))
        stack.append((lo, mid, left))
    return QuadratureResult(total, err, panels)


# ---------------------------------------------------------------- series

def fd_series(a, b: Sequence, c, x: Sequence, tol: float = 1e-15, max_degree: int = 5000) -> complex:
    """Lauricella's F_D(a, b, c; x) by summation over total degree.

    Within a degree the multi-indices are visited in lexicographic order, so
    the floating point result is reproducible.
    """
    a, c = complex(a), complex(c)
    b = [complex(v) for v in b]
    x = [complex(v) for v in x]
    m = len(x)
    if len(b) != m:
        raise InputError("b and x must have the same length")
    if any(abs(v) >= 1 for v in x):
        raise DomainError("series needs |x_i| < 1")
    if abs(c.imag) < 1e-15 and c.real <= 0 and abs(c.real - round(c.real)) < 1e-15:
        raise DomainError("c must not be a non-positive integer")
    rho = max((abs(v) for v in x), default=0.0)
    # terms of one degree, keyed by the multi-index
    layer = {(0,) * m: 1 + 0j}
    total = 1 + 0j
    prev_mass = 1.0
    for n in range(1, max_degree + 1):
        nxt = {}
        for idx in sorted(layer):
            t = layer[idx]
            for i in range(m):
                new = idx[:i] + (idx[i] + 1,) + idx[i + 1:]
                if new in nxt:
                    continue
                ni = idx[i]
                nxt[new] = t * (a + n - 1) * (b[i] + ni) * x[i] / ((c + n - 1) * (ni + 1))
        layer = nxt
        mass = 0.0
        block = 0j
        for idx in sorted(layer):
            block += layer[idx]
            mass += abs(layer[idx])
        total += block
        ratio = max(rho, mass / prev_mass if prev_mass else 0.0)
        if n > 3 and ratio < 1 and mass * ratio / (1 - ratio) < tol * max(1.0, abs(total)):
            return total
        prev_mass = mass
        if mass == 0.0:
            return total
    raise QuadratureError("series did not converge")


def euler_integral(a, b: Sequence, c, x: Sequence, tol: float = 1e-13) -> complex:
    """Gamma-normalized integral of u phi_0 over (1, infinity).

    With t = 1/s it becomes the classical integral over (0, 1) of
    s^(a-1) (1-s)^(c-a-1) prod (1 - x_i s)^(-b_i); both endpoint powers are
    removed by s = w^(1/Re a) near 0 and 1 - s = w^(1/Re(c-a)) near 1.
    """
    a, c = complex(a), complex(c)
    b = [complex(v) for v in b]
    x = [complex(v) for v in x]
    if not (0 < a.real < c.real):
        raise DomainError("need 0 < Re a < Re c")
    if any(abs(v) >= 1 for v in x):
        raise DomainError("need |x_i| < 1")
    e = c - a

    def rest(s):
        out = np.ones_like(s, dtype=complex)
        for bi, xi in zip(b, x):
            out = out * (1 - xi * s) ** (-bi)
        return out

    pa, pe = a.real, e.real

    def left(w):
        # s = w^(1/pa), s^(a-1) ds = (1/pa) w^(i Im a / pa) dw
        s = w ** (1 / pa)
        return (1 / pa) * np.exp(1j * a.imag / pa * np.log(w)) * (1 - s) ** (e - 1) * rest(s)

    def right(w):
        q = w ** (1 / pe)
        s = 1 - q
        return (1 / pe) * np.exp(1j * e.imag / pe * np.log(w)) * s ** (a - 1) * rest(s)

    half = 0.5
    tot = _graded(left, half ** pa, tol) + _graded(right, half ** pe, tol)
    norm = gamma_fn(c) / (gamma_fn(a) * gamma_fn(e))
    return complex(norm * tot)


def _graded(f: Callable, top: float, tol: float) -> complex:
    """Integral over (0, top] with panels shrinking geometrically toward 0."""
    edges = [top * 2.0 ** (-k) for k in range(60)] + [0.0]
    total = 0j
    for hi, lo in zip(edges[:-1], edges[1:]):
        total += adaptive_quad(f, lo, hi, tol).value
    return total


def euler_check(a, b: Sequence, c, x: Sequence, tol: float = 1e-13) -> float:
    return abs(euler_integral(a, b, c, x, tol) - fd_series(a, b, c, x))


# ---------------------------------------------------------------- periods

@dataclass
class TwistedContext:
    """Everything needed to integrate u^(+-1) times a form along loaded chains."""

    params: ParameterVector
    x: PointConfiguration
    base: complex = 0j
    eps: float = 0.0
    radius: float = 0.0
    tol: float = 1e-12
    cache: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        pts = self.x.finite_sites
        if np.max(np.abs(pts.imag)) > 1e-12:
            raise DomainError("contour quadrature needs real points (an aligned configuration)")
        re = pts.real
        lo, hi = float(re.min()), float(re.max())
        if not self.base:
            self.base = complex(0.5 * (lo + hi), max(hi - lo, 1.0))
        if self.base.imag <= 0:
            raise DomainError("base point must lie in the upper half plane")
        gaps = np.diff(np.sort(re))
        if not self.eps:
            self.eps = 0.25 * float(gaps.min())
        if not self.radius:
            # as tight as the sites allow: a large exponent at infinity turns
            # a wide circle into heavy cancellation
            far = max(abs(p - self.base.real) for p in pts)
            self.radius = 1.5 * far
        self.alpha = self.params.values
        self.pts = pts
        self.lam = np.exp(2j * np.pi * self.alpha)

    def log_u(self, t: np.ndarray) -> np.ndarray:
        """Principal branch, valid on the closed upper half plane minus the sites."""
        out = np.zeros_like(t, dtype=complex)
        for ai, xi in zip(self.alpha[:-1], self.pts):
            out = out + ai * np.log(t - xi)
        return out


def _weight(logu: np.ndarray, dual: bool) -> np.ndarray:
    return np.exp(-logu if dual else logu)


def _segment(ctx: TwistedContext, g: RationalOneForm, start: complex, end: complex,
             dual: bool) -> QuadratureResult:
    d = end - start

    def f(s):
        t = start + s * d
        return _weight(ctx.log_u(t), dual) * g(t) * d

    return adaptive_quad(f, 0.0, 1.0, ctx.tol)


def _path_to_infinity(ctx: TwistedContext, g: RationalOneForm, dual: bool) -> QuadratureResult:
    b = ctx.base

    def f(s):
        tau = s / (1 - s)
        t = b + 1j * tau
        return _weight(ctx.log_u(t), dual) * g(t) * 1j / (1 - s) ** 2

    return adaptive_quad(f, 0.0, 1.0, ctx.tol)


def _circle_finite(ctx: TwistedContext, g: RationalOneForm, p: int, dual: bool) -> tuple[QuadratureResult, complex]:
    xp = ctx.pts[p]
    eps = ctx.eps
    th0 = cmath.phase(ctx.base - xp)
    a = xp + eps * cmath.exp(1j * th0)
    others = [(ctx.alpha[i], ctx.pts[i]) for i in range(len(ctx.pts)) if i != p]
    consts = [(ai, xp - xi, cmath.log(a - xi) - cmath.log(1 + eps * cmath.exp(1j * th0) / (xp - xi)))
              for ai, xi in others]
    ap = ctx.alpha[p]

    def f(theta):
        z = eps * np.exp(1j * theta)
        lu = ap * (math.log(eps) + 1j * theta)
        for ai, d, k in consts:
            lu = lu + ai * (k + np.log(1 + z / d))
        return _weight(lu, dual) * g(xp + z) * 1j * z

    return adaptive_quad(f, th0, th0 + 2 * math.pi, ctx.tol), a


def _circle_infinity(ctx: TwistedContext, g: RationalOneForm, dual: bool) -> tuple[QuadratureResult, complex]:
    c0 = ctx.base.real
    R = ctx.radius
    shifts = [(ai, c0 - xi) for ai, xi in zip(ctx.alpha[:-1], ctx.pts)]

    def f(theta):
        z = R * np.exp(1j * theta)
        lu = np.zeros_like(z)
        for ai, d in shifts:
            lu = lu + ai * (math.log(R) + 1j * theta + np.log(1 + d / z))
        return _weight(lu, dual) * g(c0 + z) * 1j * z

    res = adaptive_quad(f, math.pi / 2, math.pi / 2 - 2 * math.pi, ctx.tol)
    return res, complex(c0, R)


def elementary_period(ctx: TwistedContext, g: RationalOneForm, e: ElementaryChain,
                      dual: bool) -> QuadratureResult:
    key = (id(g), e, dual)
    if key in ctx.cache:
        return ctx.cache[key][1]
    inf = ctx.params.m + 2
    if e.kind == PATH:
        res = (_path_to_infinity(ctx, g, dual) if e.site == inf
               else _segment(ctx, g, ctx.base, ctx.pts[e.site], dual))
    else:
        lam = ctx.lam[e.site]
        if dual:
            lam = 1 / lam
        if e.site == inf:
            circ, a = _circle_infinity(ctx, g, dual)
        else:
            circ, a = _circle_finite(ctx, g, e.site, dual)
        res = circ
        if abs(1 - lam) > 0:
            res = res + _segment(ctx, g, ctx.base, a, dual).scale(1 - lam)
    ctx.cache[key] = (g, res)
    return res


def _check_endpoints(chain: TwistedChain, cls: IndexClassification) -> None:
    allowed = set(cls.iNeg if chain.dual else cls.iN0)
    for e in chain.terms:
        if e.kind == PATH and e.site not in allowed:
            side = "dual divisor" if chain.dual else "divisor D"
            raise DomainError(f"path ends at site {e.site}, which is not in the {side}")


def period(phi: RationalOneForm, gamma: TwistedChain, cls: IndexClassification,
           x: PointConfiguration, tol: float = 1e-12, ctx: TwistedContext | None = None) -> QuadratureResult:
    """Integral of u phi over gamma, or of phi/u when gamma is a dual chain."""
    _check_endpoints(gamma, cls)
    if ctx is None:
        ctx = TwistedContext(cls.params, x, tol=tol)
    out = QuadratureResult(0j, 0.0, 0)
    for e, coeff in sorted(gamma.terms.items()):
        out = out + elementary_period(ctx, phi, e, gamma.dual).scale(coeff)
    return out


@dataclass(frozen=True)
class PeriodMatrices:
    Phi: np.ndarray
    Psi: np.ndarray
    Phi_err: np.ndarray
    Psi_err: np.ndarray
    phi: tuple
    psi: tuple
    gamma: tuple
    delta: tuple


def check_alignment(cls: IndexClassification, x: PointConfiguration) -> None:
    """The real points must appear in the linear order used for the chain bases."""
    pts = x.finite_sites
    if np.max(np.abs(pts.imag)) > 1e-12:
        raise DomainError("points must be real for the chain bases")
    seq = [i for i in cls.linear_order() if i != cls.m + 2]
    vals = [pts[i].real for i in seq]
    if any(v2 <= v1 for v1, v2 in zip(vals, vals[1:])):
        raise DomainError(f"points are not in the aligned order {seq}")


def period_matrices(cls: IndexClassification, x: PointConfiguration, phis=None, psis=None,
                    gammas=None, deltas=None, tol: float = 1e-12) -> PeriodMatrices:
    """Phi_ij = <phi_i, gamma_j> and Psi_ij = <delta_i, psi_j>; frames and bases by default."""
    if gammas is None or deltas is None:
        check_alignment(cls, x)
        b = bases(cls)
        gammas = b.gamma if gammas is None else gammas
        deltas = b.delta if deltas is None else deltas
    phis = phi_frame(cls, x)[1:] if phis is None else phis
    psis = psi_frame(cls, x)[:-1] if psis is None else psis
    ctx = TwistedContext(cls.params, x, tol=tol)
    P = [[period(f, g, cls, x, ctx=ctx) for g in gammas] for f in phis]
    S = [[period(q, d, cls, x, ctx=ctx) for q in psis] for d in deltas]
    return PeriodMatrices(
        Phi=np.array([[r.value for r in row] for row in P]),
        Psi=np.array([[r.value for r in row] for row in S]),
        Phi_err=np.array([[r.error_estimate for r in row] for row in P]),
        Psi_err=np.array([[r.error_estimate for r in row] for row in S]),
        phi=tuple(phis), psi=tuple(psis), gamma=tuple(gammas), delta=tuple(deltas))


def cohomology_matrix(phis, psis, cls: IndexClassification) -> np.ndarray:
    return np.array([[residue_pairing(f, q, cls) for q in psis] for f in phis])


@dataclass(frozen=True)
class TPRReport:
    residual: float
    H: np.ndarray
    C: np.ndarray
    periods: PeriodMatrices
    # residual over |Psi| |C^-1| |Phi|: what double precision can be held to
    scaled_residual: float = 0.0


def verify_tpr(cls: IndexClassification, x: PointConfiguration | None = None, tol: float = 1e-12,
               H: np.ndarray | None = None, **kw) -> TPRReport:
    """max row sum of |H - Psi C^-1 Phi| with combinatorial H and residue-computed C."""
    from .parameters import aligned_configuration
    if x is None:
        x = aligned_configuration(cls)
    pm = period_matrices(cls, x, tol=tol, **kw)
    C = cohomology_matrix(pm.phi, pm.psi, cls)
    if H is None:
        H = intersection_matrix_h(cls)
    rhs = pm.Psi @ np.linalg.solve(C, pm.Phi)
    res = float(np.linalg.norm(H - rhs, np.inf))
    size = float(np.max(np.abs(pm.Psi) @ np.abs(np.linalg.inv(C)) @ np.abs(pm.Phi)))
    return TPRReport(res, H, C, pm, res / size if size else res)


# ---------------------------------------------------------------- solutions in x

def solution_vector(cls: IndexClassification, x: PointConfiguration, gammas=None,
                    tol: float = 1e-12) -> np.ndarray:
    """Row (<phi_0, gamma_j>)_j of local solutions of the F_D system."""
    if gammas is None:
        gammas = bases(cls).gamma
    ctx = TwistedContext(cls.params, x, tol=tol)
    f = phi0(x)
    return np.array([period(f, g, cls, x, ctx=ctx).value for g in gammas])


def frame_periods(cls: IndexClassification, x: PointConfiguration, gammas=None,
                  tol: float = 1e-12) -> np.ndarray:
    """Y with Y_kj = <phi_(k,m+2), gamma_j>; it satisfies dY = A(x) Y for the R system."""
    if gammas is None:
        gammas = bases(cls).gamma
    return period_matrices(cls, x, gammas=gammas, deltas=(), tol=tol).Phi


def derivative_form(cls: IndexClassification, x: PointConfiguration, i: int) -> RationalOneForm:
    """Representative of nabla_i phi_0: (alpha_i phi_(m+1,m+2) - phi_(i,m+2)) / (x_i - 1)."""
    fr = phi_frame(cls, x)
    a = cls.params.values
    xi = x.finite_sites[i]
    return (a[i] * fr[cls.m + 1] - fr[i]) * (1 / (xi - 1))


def wronskian(cls: IndexClassification, x: PointConfiguration, tol: float = 1e-12) -> complex:
    """det of the solutions <phi_0, gamma_j> and their first derivatives."""
    gammas = bases(cls).gamma
    ctx = TwistedContext(cls.params, x, tol=tol)
    forms = [phi0(x)] + [derivative_form(cls, x, i) for i in range(1, cls.m + 1)]
    W = np.array([[period(f, g, cls, x, ctx=ctx).value for g in gammas] for f in forms])
    return complex(np.linalg.det(W))


def lhgs_residual(cls: IndexClassification, x: PointConfiguration, h: float = 1e-3,
                  tol: float = 1e-13) -> float:
    """Largest value of the annihilating operators applied to x -> <phi_0, gamma_j>.

    Derivatives come from a 5-point stencil with real steps; the residual is
    relative to the largest derivative magnitude that enters.
    """
    m = cls.m
    a_, b_, c_ = cls.params.abc()
    gammas = bases(cls).gamma
    base = np.array(x.x, dtype=complex)
    cache = {}

    def F(shift: tuple) -> np.ndarray:
        if shift not in cache:
            pts = base + np.array(shift) * h
            cache[shift] = solution_vector(cls, PointConfiguration(m, tuple(pts)), gammas, tol)
        return cache[shift]

    def unit(i, k):
        v = [0] * m
        v[i] = k
        return v

    w1 = {-2: 1 / 12, -1: -2 / 3, 1: 2 / 3, 2: -1 / 12}
    w2 = {-2: -1 / 12, -1: 4 / 3, 0: -5 / 2, 1: 4 / 3, 2: -1 / 12}

    def d1(i):
        return sum(w * F(tuple(unit(i, k))) for k, w in w1.items()) / h

    def d2(i):
        return sum(w * F(tuple(unit(i, k))) for k, w in w2.items()) / h ** 2

    def d11(i, j):
        tot = 0
        for ki, wi in w1.items():
            for kj, wj in w1.items():
                v = [0] * m
                v[i], v[j] = ki, kj
                tot = tot + wi * wj * F(tuple(v))
        return tot / h ** 2

    f0 = F(tuple([0] * m))
    D1 = [d1(i) for i in range(m)]
    D11 = {(i, j): d11(i, j) for i in range(m) for j in range(i + 1, m)}

    def mixed(i, j):
        return D11[(min(i, j), max(i, j))]

    worst = 0.0
    scale = max(np.max(np.abs(f0)), max(np.max(np.abs(d)) for d in D1), 1.0)
    for i in range(m):
        xi = base[i]
        val = xi * (1 - xi) * d2(i) + (c_ - (a_ + b_[i] + 1) * xi) * D1[i] - a_ * b_[i] * f0
        for j in range(m):
            if j != i:
                val = val + (1 - xi) * base[j] * mixed(i, j) - b_[i] * base[j] * D1[j]
        worst = max(worst, float(np.max(np.abs(val))) / scale)
    for i in range(m):
        for j in range(i + 1, m):
            val = (base[i] - base[j]) * mixed(i, j) - b_[j] * D1[i] + b_[i] * D1[j]
            worst = max(worst, float(np.max(np.abs(val))) / scale)
    return worst


# ---------------------------------------------------------------- continuation in x

def continue_pfaffian(sys: PfaffianSystem, waypoints: Sequence[PointConfiguration], Y0: np.ndarray,
                      rtol: float = 1e-10, atol: float = 1e-12) -> np.ndarray:
    """Solve dY = (sum_k A_k dx_k) Y along straight legs between waypoints; return Y(end)."""
    m = sys.m
    Y = np.array(Y0, dtype=complex)
    n = Y.shape[0]
    closest = math.inf
    for start, end in zip(waypoints[:-1], waypoints[1:]):
        s0 = np.array(start.x, dtype=complex)
        dx = np.array(end.x, dtype=complex) - s0
        if np.max(np.abs(dx)) == 0:
            continue

        def rhs(s, y, s0=s0, dx=dx):
            x = PointConfiguration(m, tuple(s0 + s * dx))
            A = sys.connection_at(x)
            M = sum((A[k] * dx[k] for k in range(m)), np.zeros((n, n), complex))
            Yc = (y[: n * Y.shape[1]] + 1j * y[n * Y.shape[1]:]).reshape(n, -1)
            dY = (M @ Yc).ravel()
            return np.concatenate([dY.real, dY.imag])

        flat = Y.ravel()
        sol = solve_ivp(rhs, (0.0, 1.0), np.concatenate([flat.real, flat.imag]),
                        method="DOP853", rtol=rtol, atol=atol)
        if not sol.success:
            raise QuadratureError(f"continuation failed: {sol.message}")
        y = sol.y[:, -1]
        k = flat.size
        Y = (y[:k] + 1j * y[k:]).reshape(Y.shape)
        closest = min(closest, end.min_gap())
    return Y


def generator_loop(p: int, q: int, x: PointConfiguration, legs: int = 24) -> list[PointConfiguration]:
    """Waypoints of rho_(p,q): x_p goes to x_q through the upper half plane, circles it, returns.

    For p = 0 the moving point is x_q and it turns around 0.
    """
    m = x.m
    if p == 0:
        p, q = q, 0
    if not 1 <= p <= m:
        raise DomainError(f"({p},{q}) does not move a free point")
    pts = x.finite_sites
    gap = x.min_gap()
    h, rho = 0.5 * gap, 0.25 * gap
    start, target = pts[p], pts[q]

    def at(z):
        v = list(x.x)
        v[p - 1] = z
        return PointConfiguration(m, tuple(v))

    way = [start, start + 1j * h, target + 1j * h, target + 1j * rho]
    circle = [target + 1j * rho * cmath.exp(2j * math.pi * k / legs) for k in range(1, legs + 1)]
    out = way + circle + way[::-1][1:]
    return [at(z) for z in out]


def continuation_matrix(sys: PfaffianSystem, loop: Sequence[PointConfiguration]) -> np.ndarray:
    n = sys.m + 1
    return continue_pfaffian(sys, loop, np.eye(n))
