"""Rational 1-forms on the punctured line, the dual frames and the cohomology pairing.

A form is stored in partial fractions: coefficients of dt/(t-x_i)^k for the
finite sites plus a polynomial part sum c_n t^n dt.  Infinity is handled in
the coordinate s = 1/t where dt = -ds/s^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .parameters import DomainError, IndexClassification, ParameterVector, PointConfiguration

TWO_PI_I = 2j * math.pi
RESONANCE_TOL = 1e-9


def _binom(e: int, n: int) -> float:
    """Generalized binomial coefficient C(e, n) for integer e (possibly negative)."""
    out = 1.0
    for k in range(n):
        out *= (e - k) / (k + 1)
    return out


@dataclass(frozen=True)
class LaurentSeries:
    """sum_k coeffs[k] * s^(offset + k), truncated after len(coeffs) terms."""

    offset: int
    coeffs: np.ndarray

    @property
    def top(self) -> int:
        """First exponent that is no longer known."""
        return self.offset + len(self.coeffs)

    def coeff(self, n: int) -> complex:
        k = n - self.offset
        if k < 0:
            return 0j
        if k >= len(self.coeffs):
            raise IndexError(f"coefficient s^{n} beyond truncation s^{self.top}")
        return complex(self.coeffs[k])

    def __mul__(self, other: "LaurentSeries") -> "LaurentSeries":
        n = min(len(self.coeffs), len(other.coeffs))
        c = np.convolve(self.coeffs[:n], other.coeffs[:n])[:n]
        return LaurentSeries(self.offset + other.offset, c)

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        lo = min(self.offset, other.offset)
        hi = min(self.top, other.top)
        c = np.zeros(max(hi - lo, 0), dtype=complex)
        for ser in (self, other):
            for k, v in enumerate(ser.coeffs):
                e = ser.offset + k
                if lo <= e < hi:
                    c[e - lo] += v
        return LaurentSeries(lo, c)

    def scale(self, a: complex) -> "LaurentSeries":
        return LaurentSeries(self.offset, a * self.coeffs)


def _const(value: complex, offset: int, n: int) -> LaurentSeries:
    c = np.zeros(n, dtype=complex)
    c[0] = value
    return LaurentSeries(offset, c)


def _shifted_power(d: complex, e: int, n: int) -> np.ndarray:
    """Taylor coefficients of (d + s)^e."""
    return np.array([d ** e * _binom(e, k) * d ** (-k) for k in range(n)], dtype=complex)


def _one_minus_power(xj: complex, e: int, n: int) -> np.ndarray:
    """Taylor coefficients of (1 - xj s)^e."""
    return np.array([_binom(e, k) * (-xj) ** k for k in range(n)], dtype=complex)


def _geometric(xj: complex, n: int) -> np.ndarray:
    return np.array([xj ** k for k in range(n)], dtype=complex)


def product_series(points: Sequence[complex], exps: Mapping[int, int], site: int,
                   n: int, const: complex = 1.0) -> LaurentSeries:
    """Laurent series of const * prod_j (t - x_j)^(e_j) at `site` (s = 1/t at infinity)."""
    inf = len(points)
    out = _const(const, 0, n)
    if site == inf:
        off = -sum(exps.values())
        for j, e in exps.items():
            if e:
                out = out * LaurentSeries(0, _one_minus_power(points[j], e, n))
        return LaurentSeries(off, out.coeffs)
    off = exps.get(site, 0)
    for j, e in exps.items():
        if e and j != site:
            out = out * LaurentSeries(0, _shifted_power(points[site] - points[j], e, n))
    return LaurentSeries(off, out.coeffs)


def simple_sum_series(points: Sequence[complex], coeffs: Mapping[int, complex], site: int,
                      n: int) -> LaurentSeries:
    """Laurent series of the function sum_j c_j / (t - x_j)."""
    inf = len(points)
    c = np.zeros(n + 1, dtype=complex)
    if site == inf:
        # c_j s / (1 - x_j s), series starting at s^0
        for j, cj in coeffs.items():
            c[1:] += cj * _geometric(points[j], n)
        return LaurentSeries(0, c[:n])
    c[0] = coeffs.get(site, 0)
    for j, cj in coeffs.items():
        if j != site and cj:
            c[1:] += cj * _shifted_power(points[site] - points[j], -1, n)
    return LaurentSeries(-1, c[:n])


@dataclass(frozen=True)
class RationalOneForm:
    points: tuple
    principal: Mapping = field(default_factory=dict)
    poly: tuple = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple(complex(p) for p in self.points))
        clean = {}
        for (i, k), v in self.principal.items():
            if not (0 <= i < len(self.points)) or k < 1:
                raise ValueError(f"bad principal term ({i}, {k})")
            if v != 0:
                clean[(i, k)] = complex(v)
        object.__setattr__(self, "principal", clean)
        poly = [complex(c) for c in self.poly]
        while poly and poly[-1] == 0:
            poly.pop()
        object.__setattr__(self, "poly", tuple(poly))

    @property
    def inf(self) -> int:
        return len(self.points)

    def _check(self, other: "RationalOneForm") -> None:
        if self.points != other.points:
            raise ValueError("forms live on different point configurations")

    def __add__(self, other: "RationalOneForm") -> "RationalOneForm":
        self._check(other)
        pr = dict(self.principal)
        for k, v in other.principal.items():
            pr[k] = pr.get(k, 0) + v
        n = max(len(self.poly), len(other.poly))
        poly = [(self.poly[i] if i < len(self.poly) else 0) + (other.poly[i] if i < len(other.poly) else 0)
                for i in range(n)]
        return RationalOneForm(self.points, pr, tuple(poly))

    def __mul__(self, c) -> "RationalOneForm":
        return RationalOneForm(self.points, {k: c * v for k, v in self.principal.items()},
                               tuple(c * v for v in self.poly))

    __rmul__ = __mul__

    def __neg__(self) -> "RationalOneForm":
        return self * -1

    def __sub__(self, other: "RationalOneForm") -> "RationalOneForm":
        return self + (-other)

    def pole_order(self, site: int) -> int:
        if site == self.inf:
            return self._inf_order()
        return max((k for (i, k) in self.principal if i == site), default=0)

    def _inf_order(self) -> int:
        if self.poly:
            return len(self.poly) + 1
        if not self.principal:
            return 0
        # leading s-power of sum c/(t-x)^k * (-1/s^2) is s^(k-2), but
        # cancellations among simple poles are found from the series itself
        ser = self.series(self.inf, 4)
        nz = [ser.offset + k for k, v in enumerate(ser.coeffs) if abs(v) > 1e-14]
        return max(0, -(nz[0] if nz else 0))

    def __call__(self, t):
        """Coefficient g(t) of dt, vectorized over t."""
        t = np.asarray(t, dtype=complex)
        out = np.zeros_like(t)
        for (i, k), v in self.principal.items():
            out = out + v / (t - self.points[i]) ** k
        for n, c in enumerate(self.poly):
            out = out + c * t ** n
        return out

    def series(self, site: int, n: int) -> LaurentSeries:
        """Local expansion of the ds-coefficient at `site`."""
        if site == self.inf:
            lo = -(len(self.poly) + 1) if self.poly else -1
            c = np.zeros(n, dtype=complex)
            for (i, k), v in self.principal.items():
                # -s^(k-2) (1 - x_i s)^(-k)
                tail = -v * _one_minus_power(self.points[i], -k, n)
                start = k - 2 - lo
                if start < n:
                    c[start:] += tail[:n - start]
            for p, v in enumerate(self.poly):
                idx = -p - 2 - lo
                if 0 <= idx < n:
                    c[idx] -= v
            return LaurentSeries(lo, c)
        lo = -self.pole_order(site)
        c = np.zeros(n, dtype=complex)
        x = self.points[site]
        reg = n + lo  # number of coefficients from s^0 on
        for (i, k), v in self.principal.items():
            if i == site:
                if -k - lo < n:
                    c[-k - lo] += v
            elif reg > 0:
                c[-lo:] += v * _shifted_power(x - self.points[i], -k, reg)
        if self.poly and reg > 0:
            for p, v in enumerate(self.poly):
                for k in range(min(p, reg - 1) + 1):
                    c[k - lo] += v * math.comb(p, k) * x ** (p - k)
        return LaurentSeries(lo, c)

    def to_json(self) -> dict:
        return {"principal": [{"site": i, "order": k, "coeff": [v.real, v.imag]}
                              for (i, k), v in sorted(self.principal.items())],
                "poly": [[v.real, v.imag] for v in self.poly]}


def _points(x: PointConfiguration) -> tuple:
    return tuple(x.finite_sites)


def simple_pole(x: PointConfiguration, i: int, c: complex = 1.0) -> RationalOneForm:
    """c dt/(t - x_i) for a finite site i."""
    return RationalOneForm(_points(x), {(i, 1): c})


def omega(pv: ParameterVector, x: PointConfiguration) -> RationalOneForm:
    a = pv.values
    return RationalOneForm(_points(x), {(i, 1): a[i] for i in range(pv.m + 2)})


def phi0(x: PointConfiguration) -> RationalOneForm:
    return simple_pole(x, x.m + 1)


def covariant_of_product(pv: ParameterVector, x: PointConfiguration, exps: Mapping[int, int],
                         const: complex = 1.0, dual: bool = False) -> RationalOneForm:
    """nabla_t (const * prod (t-x_j)^e_j), or the dual nabla with -omega.

    The result is f(t) * sum_j (e_j +- alpha_j)/(t - x_j) dt, put into
    partial fractions by local expansion at every pole and at infinity.
    """
    pts = _points(x)
    a = pv.values
    sign = -1 if dual else 1
    lin = {j: exps.get(j, 0) + sign * a[j] for j in range(len(pts))}
    inf = len(pts)
    principal = {}
    for k in range(len(pts)):
        e = exps.get(k, 0)
        order = max(0, 1 - e)
        if order == 0:
            continue
        n = order + 1
        ser = product_series(pts, exps, k, n, const) * simple_sum_series(pts, lin, k, n)
        for p in range(ser.offset, 0):
            v = ser.coeff(p)
            if abs(v) > 0:
                principal[(k, -p)] = v
    # polynomial part from the expansion at infinity (t^n <-> s^-n)
    deg = sum(exps.values()) - 1
    poly = []
    if deg >= 0:
        n = deg + 2
        ser = product_series(pts, exps, inf, n, const) * simple_sum_series(pts, lin, inf, n)
        poly = [ser.coeff(-p) for p in range(deg + 1)]
    return RationalOneForm(pts, principal, tuple(poly))


@dataclass(frozen=True)
class LocalSeries:
    site: int
    offset: int
    coeffs: np.ndarray
    order: int

    def as_laurent(self) -> LaurentSeries:
        return LaurentSeries(self.offset, self.coeffs)


def _omega_series(pv: ParameterVector, points: tuple, site: int, n: int) -> LaurentSeries:
    a = pv.values
    coeffs = {j: a[j] for j in range(len(points))}
    if site == len(points):
        # omega = -sum alpha_j ds/(s (1 - x_j s))
        c = np.zeros(n, dtype=complex)
        for j, aj in coeffs.items():
            c -= aj * _geometric(points[j], n)
        return LaurentSeries(-1, c)
    return simple_sum_series(points, coeffs, site, n)


def _resonant_index(cls: IndexClassification, site: int, dual: bool) -> int | None:
    pv = cls.params
    if not pv.is_integer(site):
        return None
    k = int(pv.alpha[site])
    return k if dual else -k


def local_series_solve(phi: RationalOneForm, site: int, cls: IndexClassification,
                       dual: bool = False, order: int | None = None) -> LocalSeries:
    """Series f with nabla_t f = phi (or the dual equation) around `site`.

    At a resonant step the free coefficient is set to zero, which makes u f
    (or f/u) vanish at the site.  A nonzero right-hand side there means phi
    does not belong to the complex attached to this site.
    """
    pv = cls.params
    p0 = -phi.pole_order(site) if site != phi.inf else -phi._inf_order()
    n0 = p0 + 1
    if order is None:
        order = max(phi.pole_order(site) if site != phi.inf else phi._inf_order(), 1) + 4
    n = order
    ps = phi.series(site, n + (n0 - p0))
    w = _omega_series(pv, phi.points, site, n + 1)
    a_site = w.coeff(-1)
    sgn = -1 if dual else 1
    res = _resonant_index(cls, site, dual)
    f = np.zeros(n, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(ps.coeffs), initial=0.0)))
    for k in range(n):
        idx = n0 + k
        rhs = ps.coeff(idx - 1)
        for j in range(0, k):
            # w_j multiplies f_(idx-1-j); stored index of f_(idx-1-j) is k-1-j
            rhs -= sgn * w.coeff(j) * f[k - 1 - j]
        if res is not None and idx == res:
            if abs(rhs) > RESONANCE_TOL * scale:
                raise DomainError(f"unresolvable resonance at site {site}: "
                                  "the form is not in the allowed complex there")
            f[k] = 0
            continue
        den = idx + sgn * a_site
        if abs(den) < RESONANCE_TOL:
            raise DomainError(f"inexact exponent at site {site} sits on a resonance; "
                              "give integral exponents exactly")
        f[k] = rhs / den
    return LocalSeries(site, n0, f, n)


def residue(a: LaurentSeries, b: LaurentSeries) -> complex:
    """Coefficient of s^-1 in a*b, insisting that both series are long enough."""
    total = 0j
    for k, v in enumerate(a.coeffs):
        e = a.offset + k
        if e > -1 - b.offset:
            break
        total += v * b.coeff(-1 - e)
    if a.top <= -1 - b.offset:
        raise IndexError("insufficient truncation for residue")
    return total


def _site_residue(phi: RationalOneForm, psi: RationalOneForm, cls: IndexClassification,
                  site: int, use_dual: bool, order: int) -> complex:
    """res(f psi) or res(g phi) at one site with enough terms for an exact value."""
    src, other = (psi, phi) if use_dual else (phi, psi)
    ord_other = other.pole_order(site) if site != other.inf else other._inf_order()
    ord_src = src.pole_order(site) if site != src.inf else src._inf_order()
    n0 = 1 - ord_src
    need = max(-1 + ord_other - n0 + 1, 1)
    n = max(order, need + 4)
    sol = local_series_solve(src, site, cls, dual=use_dual, order=n)
    ser_other = other.series(site, n + ord_other + ord_src + 2)
    return residue(sol.as_laurent(), ser_other)


def residue_pairing(phi: RationalOneForm, psi: RationalOneForm, cls: IndexClassification,
                    split: str = "half", order: int | None = None) -> complex:
    """Cohomology intersection number I_c(phi, psi) from local series at all sites.

    `split` chooses how the non-integral sites enter: "half" averages the two
    local solutions, "f" uses the solution of nabla f = phi only, "g" the dual
    one only.  All three agree.
    """
    phi._check(psi)
    m = cls.m
    base = order or (max(phi.pole_order(i) for i in range(m + 2)) + 4)

    def once(n: int) -> complex:
        tot = 0j
        for site in range(m + 3):
            mem = cls.membership(site)
            if mem == "N0":
                tot += _site_residue(phi, psi, cls, site, False, n)
            elif mem == "Neg":
                tot -= _site_residue(phi, psi, cls, site, True, n)
            elif split == "half":
                tot += 0.5 * (_site_residue(phi, psi, cls, site, False, n)
                              - _site_residue(phi, psi, cls, site, True, n))
            elif split == "f":
                tot += _site_residue(phi, psi, cls, site, False, n)
            elif split == "g":
                tot -= _site_residue(phi, psi, cls, site, True, n)
            else:
                raise ValueError(f"unknown split {split!r}")
        return TWO_PI_I * tot

    val, n = once(base), base
    for _ in range(4):
        nxt = once(2 * n)
        if abs(nxt - val) <= 1e-13 * max(1.0, abs(val)):
            return nxt
        val, n = nxt, 2 * n
    raise ArithmeticError("residue pairing did not stabilize under truncation doubling")


def _is_zero(pv: ParameterVector, i: int) -> bool:
    a = pv.alpha[i]
    return isinstance(a, Fraction) and a == 0


def relative_representative(cls: IndexClassification, x: PointConfiguration, i: int) -> RationalOneForm:
    """Rational form cohomologous to phi_(i,m+2) when alpha_i = 0 (0 <= i <= m).

    The sign is fixed by continuity in alpha_i: near alpha_i = 0 a path
    ending at x_i picks up -u(x_i) from alpha_i dt/(t - x_i).
    """
    return -endpoint_form(cls, x, i)


def phi_frame(cls: IndexClassification, x: PointConfiguration) -> list[RationalOneForm]:
    """phi_(0,m+2), ..., phi_(m+1,m+2)."""
    pv = cls.params
    a = pv.values
    out = []
    for i in range(cls.m + 1):
        if _is_zero(pv, i):
            out.append(relative_representative(cls, x, i))
        else:
            out.append(simple_pole(x, i, a[i]))
    out.append(phi0(x))
    return out


def psi_frame(cls: IndexClassification, x: PointConfiguration) -> list[RationalOneForm]:
    """psi_(0,1), ..., psi_(0,m+2)."""
    pv = cls.params
    m = cls.m
    a = pv.values
    out = [simple_pole(x, i) - simple_pole(x, 0) for i in range(1, m + 1)]
    z1, z2 = _is_zero(pv, m + 1), _is_zero(pv, m + 2)
    j = next((k for k in range(m + 1) if k not in cls.iNeg), None)
    if not z1:
        out.append(a[m + 1] * (simple_pole(x, m + 1) - simple_pole(x, 0)))
    elif not z2:
        out.append(-omega(pv, x))
    else:
        pts = _points(x)
        out.append(covariant_of_product(pv, x, {j: -1}, 1 - pts[j], dual=True))
    if not z2:
        out.append(simple_pole(x, 0, -a[m + 2]))
    elif not z1:
        out.append(-omega(pv, x))
    else:
        out.append(covariant_of_product(pv, x, {m + 1: 1, j: -1}, 1.0, dual=True))
    return out


@dataclass(frozen=True)
class Frame:
    phi: list
    psi: list
    phi0_coords: np.ndarray
    psi_top_coords: np.ndarray


def frame(cls: IndexClassification, x: PointConfiguration) -> Frame:
    """Dual frames with the two linear relations expressed in frame coordinates."""
    a = cls.params.values
    m = cls.m
    e0 = np.array([-1] * m + [-a[m + 1]], dtype=complex)
    top = np.array(list(-a[1:m + 1]) + [-1], dtype=complex)
    return Frame(phi_frame(cls, x), psi_frame(cls, x), e0, top)


def frame_pairing_matrix(cls: IndexClassification, x: PointConfiguration) -> np.ndarray:
    """I_c(phi_(i,m+2), psi_(0,j)) for 1 <= i, j <= m+1 by the residue algorithm."""
    fr = frame(cls, x)
    return np.array([[residue_pairing(p, q, cls) for q in fr.psi[:-1]] for p in fr.phi[1:]])


def eigen_cocycles(i: int, j: int, pv: ParameterVector) -> tuple[np.ndarray, np.ndarray]:
    """Row v_(i,j) and column w_(i,j) with R_(i,j) = -w v, in frame coordinates."""
    m = pv.m
    a = pv.values
    n = m + 1
    if i == j or not (0 <= i <= m + 1 and 0 <= j <= m + 1):
        raise DomainError(f"bad index pair ({i},{j})")
    if {i, j} == {0, m + 1}:
        raise DomainError("the pair (0, m+1) carries no residue matrix")
    if i > j:
        v, w = eigen_cocycles(j, i, pv)
        return -v, -w

    def e(k: int) -> np.ndarray:
        out = np.zeros(n, dtype=complex)
        if k == 0:
            out[:m] = -1
            out[m] = -a[m + 1]
        else:
            out[k - 1] = 1
        return out

    if i == 0:
        # (0, j) is minus the pair (j, 0)
        v = a[0] * e(j) - a[j] * e(0)
        w = -e(j)
        return -v, -w
    if j <= m:
        return a[j] * e(i) - a[i] * e(j), e(j) - e(i)
    return e(i) - a[i] * e(m + 1), e(m + 1) - a[m + 1] * e(i)


def _balance_at_infinity(cls: IndexClassification, exps: dict, target: int, avoid: set) -> dict:
    """Move the degree at infinity to `target` through a factor at a site outside `avoid`."""
    deg = sum(exps.values())
    if deg == target:
        return exps
    k = next(j for j in range(cls.m + 2) if j not in avoid)
    out = dict(exps)
    out[k] = out.get(k, 0) + target - deg
    return out


def endpoint_monomial(cls: IndexClassification, x: PointConfiguration, i: int,
                      dual: bool = False, vanish: int = 1) -> tuple[dict, complex]:
    """Exponents and constant of g = const * prod (t - x_j)^e_j for the end point at site i.

    At a finite site, g (t - x_i)^(+-alpha_i) -> 1; at infinity u^(+-1) g -> 1.
    u g (or g/u on the dual side) vanishes at every other site of the
    divisor, so nabla_t g pairs with a chain only through its end point at
    x_i.  Its class spans the line of nabla_t(h_i/u) for a bump h_i at x_i.
    `vanish` is the order of vanishing at the other finite sites of the divisor.
    """
    div = cls.iNeg if dual else cls.iN0
    if i not in div:
        raise DomainError(f"site {i} is not in the {'dual divisor' if dual else 'divisor'}")
    m = cls.m
    a = cls.params.alpha
    avoid = set(div)
    # the factor (t - x_j)^(vanish -+ alpha_j) makes u^(+-1) g vanish there
    exps = {j: vanish + (int(a[j]) if dual else -int(a[j])) for j in div if j != i and j != m + 2}
    a_inf = int(a[m + 2]) if m + 2 in div else None
    if i == m + 2:
        # u^(+-1) ~ t^(-+alpha_inf); g must grow like t^(+-alpha_inf)
        target = -a_inf if dual else a_inf
        return _balance_at_infinity(cls, exps, target, avoid), 1.0 + 0j
    exps[i] = int(a[i]) if dual else -int(a[i])
    if a_inf is not None:
        target = (-a_inf if dual else a_inf) - 1
        if sum(exps.values()) > target:
            exps = _balance_at_infinity(cls, exps, target, avoid)
    pts = _points(x)
    const = 1.0 + 0j
    for j, e in exps.items():
        if j != i:
            const *= (pts[i] - pts[j]) ** (-e)
    return exps, const


def endpoint_form(cls: IndexClassification, x: PointConfiguration, i: int) -> RationalOneForm:
    exps, const = endpoint_monomial(cls, x, i)
    return covariant_of_product(cls.params, x, exps, const)


def dual_endpoint_form(cls: IndexClassification, x: PointConfiguration, k: int) -> RationalOneForm:
    exps, const = endpoint_monomial(cls, x, k, dual=True)
    return covariant_of_product(cls.params, x, exps, const, dual=True)


def frame_coordinates(form: RationalOneForm, cls: IndexClassification, x: PointConfiguration) -> np.ndarray:
    """Coordinates of a class in the phi frame, read off from pairings with the psi frame."""
    psi = psi_frame(cls, x)[:-1]
    return np.array([residue_pairing(form, q, cls) for q in psi]) / TWO_PI_I


def dual_frame_coordinates(form: RationalOneForm, cls: IndexClassification,
                           x: PointConfiguration) -> np.ndarray:
    phi = phi_frame(cls, x)[1:]
    return np.array([residue_pairing(p, form, cls) for p in phi]) / TWO_PI_I
