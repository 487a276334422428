"""Exponent vectors, index classification and aligned point configurations.

The multivalued weight is u(t) = t^a0 (t-x1)^a1 ... (t-xm)^am (t-1)^a(m+1),
with a(m+2) the exponent at infinity, so the exponents always sum to zero.
Sites are numbered 0..m+2 with x0 = 0, x(m+1) = 1 and x(m+2) = infinity.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Number
from typing import Sequence, Union

import numpy as np

Scalar = Union[Fraction, int, float, complex]

NEAR_INTEGER_WARN = 1e-9
FLOAT_SUM_TOL = 1e-12


class InputError(ValueError):
    """Malformed input (wrong shape, unparsable number)."""


class DomainError(ValueError):
    """Input is well formed but outside the mathematical domain of an operation."""


def parse_scalar(value) -> Scalar:
    """Turn a JSON-ish value into an exact Fraction or an inexact complex.

    Strings "p/q" and Python ints are exact; floats and [re, im] pairs are not.
    """
    if isinstance(value, bool):
        raise InputError(f"not a number: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"cannot parse rational {value!r}") from exc
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InputError(f"non-finite number {value!r}")
        return complex(value)
    if isinstance(value, complex):
        return value
    if isinstance(value, (list, tuple)) and len(value) == 2:
        re, im = value
        if isinstance(re, (int, float)) and isinstance(im, (int, float)):
            return complex(float(re), float(im))
    if isinstance(value, Number):
        return complex(value)
    raise InputError(f"cannot parse scalar {value!r}")


def _is_exact(v: Scalar) -> bool:
    return isinstance(v, Fraction)


def _to_complex(v: Scalar) -> complex:
    return complex(float(v)) if isinstance(v, Fraction) else complex(v)


@dataclass(frozen=True)
class ParameterVector:
    m: int
    alpha: tuple
    exact: tuple

    def __post_init__(self) -> None:
        if self.m < 1:
            raise InputError("m must be a positive integer")
        if len(self.alpha) != self.m + 3 or len(self.exact) != self.m + 3:
            raise InputError(f"expected {self.m + 3} exponents, got {len(self.alpha)}")
        if all(self.exact):
            if sum(self.alpha) != 0:
                raise DomainError(f"exponents must sum to zero, got {sum(self.alpha)}")
        else:
            total = sum(_to_complex(a) for a in self.alpha)
            if abs(total) > FLOAT_SUM_TOL * max(1.0, max(abs(_to_complex(a)) for a in self.alpha)):
                raise DomainError(f"exponents must sum to zero, got {total}")

    @property
    def values(self) -> np.ndarray:
        """Exponents as a complex array."""
        return np.array([_to_complex(a) for a in self.alpha], dtype=complex)

    def is_integer(self, i: int) -> bool:
        """Integrality is only ever asserted for exact entries."""
        a = self.alpha[i]
        return isinstance(a, Fraction) and a.denominator == 1

    def abc(self) -> tuple[complex, list[complex], complex]:
        """Recover (a, b, c) from the exponents."""
        v = self.values
        m = self.m
        a = v[m + 2]
        c = v[m + 1] + a
        b = [-v[i] for i in range(1, m + 1)]
        return a, b, c


def from_alpha(alpha: Sequence) -> ParameterVector:
    vals = tuple(parse_scalar(a) for a in alpha)
    if len(vals) < 4:
        raise InputError("need at least four exponents (m >= 1)")
    return ParameterVector(m=len(vals) - 3, alpha=vals, exact=tuple(_is_exact(a) for a in vals))


def from_abc(a, b: Sequence, c) -> ParameterVector:
    """alpha = (sum(b) - c, -b1, ..., -bm, c - a, a)."""
    a_, c_ = parse_scalar(a), parse_scalar(c)
    bs = [parse_scalar(x) for x in b]
    if not bs:
        raise InputError("b must have at least one entry")
    alpha = [sum(bs, Fraction(0)) - c_] + [-x for x in bs] + [c_ - a_, a_]
    # exactness of a derived entry follows its inputs
    ex0 = all(_is_exact(x) for x in bs) and _is_exact(c_)
    exact = [ex0] + [_is_exact(x) for x in bs] + [_is_exact(c_) and _is_exact(a_), _is_exact(a_)]
    alpha = [x if e else complex(_to_complex(x)) for x, e in zip(alpha, exact)]
    return ParameterVector(m=len(bs), alpha=tuple(alpha), exact=tuple(exact))


def _exp_2pi_i(a: Scalar) -> complex:
    if isinstance(a, Fraction):
        f = a - math.floor(a)
        table = {Fraction(0): 1 + 0j, Fraction(1, 2): -1 + 0j,
                 Fraction(1, 4): 1j, Fraction(3, 4): -1j}
        if f in table:
            return table[f]
        return cmath.exp(2j * math.pi * float(f))
    return cmath.exp(2j * math.pi * complex(a))


def lambdas(pv: ParameterVector) -> np.ndarray:
    """lambda_i = exp(2 pi i alpha_i); exact for integral and quarter-integral entries."""
    return np.array([_exp_2pi_i(a) for a in pv.alpha], dtype=complex)


@dataclass(frozen=True)
class IndexClassification:
    params: ParameterVector
    iZc: tuple
    iN0: tuple
    iNeg: tuple
    ordered: tuple
    case: str
    warnings: tuple = field(default=())

    @property
    def m(self) -> int:
        return self.params.m

    @property
    def r(self) -> int:
        return len(self.iN0)

    @property
    def s(self) -> int:
        return len(self.iNeg)

    @property
    def integral(self) -> bool:
        return not self.iZc

    @property
    def lam(self) -> np.ndarray:
        return lambdas(self.params)

    def membership(self, i: int) -> str:
        if i in self.iN0:
            return "N0"
        if i in self.iNeg:
            return "Neg"
        return "Zc"

    def linear_order(self) -> list[int]:
        """Sites from left to right on the real line, infinity last.

        The aligned cyclic order (i0, ..., i(m+2)) is rotated so that the
        point at infinity closes the sequence.
        """
        seq = list(self.ordered)
        if self.case == "B":
            # cyclic order is i1 = inf, i2, ..., i(m+2), i0
            seq = seq[1:] + seq[:1]
        elif self.case == "C":
            if self.iZc:
                rs = self.r + self.s
                seq = seq[rs + 1:] + seq[:rs + 1]
            else:
                seq = seq[1:] + seq[:1]
        k = seq.index(self.m + 2)
        return seq[k + 1:] + seq[:k + 1]


def classify(pv: ParameterVector) -> IndexClassification:
    m = pv.m
    vals = pv.values
    iZc, iN0, iNeg, warns = [], [], [], []
    for i, a in enumerate(pv.alpha):
        if not pv.is_integer(i):
            if not pv.exact[i]:
                z = vals[i]
                if abs(z - round(z.real)) < NEAR_INTEGER_WARN:
                    warns.append(f"alpha_{i} = {z} is within {NEAR_INTEGER_WARN:g} of an integer "
                                 "but inexact; treated as non-integral")
            iZc.append(i)
            continue
        n = int(a)
        order = n if i <= m else n - 1
        (iN0 if order >= 0 else iNeg).append(i)

    if iZc:
        if m + 2 in iZc:
            case = "A"
        elif m + 2 in iN0:
            case = "B"
        else:
            case = "C"
        n0 = list(iN0)
        if case == "B":
            n0 = [m + 2] + [i for i in n0 if i != m + 2]
        ordered = [iZc[0]] + n0 + list(iNeg) + list(iZc[1:])
    else:
        if not iN0 or not iNeg:
            raise DomainError("integral exponents must give both D and its dual a point")
        if m + 2 in iN0:
            case = "B"
            n0 = [m + 2] + [i for i in iN0 if i != m + 2]
        else:
            case = "C"
            n0 = list(iN0)
        # the last dual site plays the role of i0
        ordered = [iNeg[-1]] + n0 + list(iNeg[:-1])
    return IndexClassification(params=pv, iZc=tuple(iZc), iN0=tuple(iN0), iNeg=tuple(iNeg),
                               ordered=tuple(ordered), case=case, warnings=tuple(warns))


@dataclass(frozen=True)
class PointConfiguration:
    m: int
    x: tuple
    aligned: bool = False

    def __post_init__(self) -> None:
        if len(self.x) != self.m:
            raise InputError(f"expected {self.m} points, got {len(self.x)}")
        pts = [0j, *map(complex, self.x), 1 + 0j]
        for i in range(len(pts)):
            for j in range(i):
                if abs(pts[i] - pts[j]) < 1e-14:
                    raise DomainError(f"points x_{j} and x_{i} coincide")

    @property
    def finite_sites(self) -> np.ndarray:
        """(x0, x1, ..., xm, x(m+1)) = (0, x1, ..., xm, 1)."""
        return np.array([0j, *map(complex, self.x), 1 + 0j])

    def min_gap(self) -> float:
        p = self.finite_sites
        return min(abs(p[i] - p[j]) for i in range(len(p)) for j in range(i))


def configuration(x: Sequence) -> PointConfiguration:
    vals = [complex(parse_scalar(v)) for v in x]
    return PointConfiguration(m=len(vals), x=tuple(vals))


def widest_spacing(cls: IndexClassification) -> float:
    """Largest spacing that still fits the points between 0 and 1: maximizes the smallest gap."""
    line = [i for i in cls.linear_order() if i != cls.m + 2]
    return 1.0 / max(1, line.index(cls.m + 1) - line.index(0))


def aligned_configuration(cls: IndexClassification, spacing: float | None = None) -> PointConfiguration:
    """Real points x1..xm realizing the aligned order of the classification."""
    m = cls.m
    h = 1.0 / (m + 2) if spacing is None else float(spacing)
    if h <= 0:
        raise InputError("spacing must be positive")
    line = [i for i in cls.linear_order() if i != m + 2]
    a, b = line.index(0), line.index(m + 1)
    if a > b:
        raise DomainError(f"aligned order {cls.ordered} puts x=1 left of x=0; "
                          "no real configuration realizes it")
    inner = line[a + 1:b]
    hin = h if (len(inner) + 1) * h <= 1 else 1.0 / (len(inner) + 1)
    pos = {}
    for k, i in enumerate(reversed(line[:a]), start=1):
        pos[i] = -k * h
    for k, i in enumerate(inner, start=1):
        pos[i] = k * hin
    for k, i in enumerate(line[b + 1:], start=1):
        pos[i] = 1 + k * h
    return PointConfiguration(m=m, x=tuple(complex(pos[i]) for i in range(1, m + 1)), aligned=True)
