"""Twisted chains built from paths and loops, their bases and the homology pairing.

Every elementary chain starts at a base point in the upper half plane.  A path
ends at its site, a loop turns once positively around it and comes back.  The
branch of u is the one with 0 < arg(t - x_i) < pi on the upper half plane.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .parameters import DomainError, IndexClassification

PATH = "path"
LOOP = "loop"


@dataclass(frozen=True, order=True)
class ElementaryChain:
    kind: str
    site: int

    def __post_init__(self) -> None:
        if self.kind not in (PATH, LOOP):
            raise ValueError(f"unknown chain kind {self.kind!r}")

    def __str__(self) -> str:
        return f"{'l' if self.kind == PATH else 'o'}{self.site}"


@dataclass(frozen=True)
class TwistedChain:
    terms: Mapping = field(default_factory=dict)
    dual: bool = False

    def __post_init__(self) -> None:
        clean = {k: complex(v) for k, v in self.terms.items() if v != 0}
        object.__setattr__(self, "terms", clean)

    def _check(self, other: "TwistedChain") -> None:
        if self.dual != other.dual:
            raise ValueError("cannot combine chains loaded with u and with 1/u")

    def __add__(self, other: "TwistedChain") -> "TwistedChain":
        self._check(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return TwistedChain(out, self.dual)

    def __neg__(self) -> "TwistedChain":
        return TwistedChain({k: -v for k, v in self.terms.items()}, self.dual)

    def __sub__(self, other: "TwistedChain") -> "TwistedChain":
        return self + (-other)

    def __mul__(self, c) -> "TwistedChain":
        return TwistedChain({k: c * v for k, v in self.terms.items()}, self.dual)

    __rmul__ = __mul__

    def __truediv__(self, c) -> "TwistedChain":
        return self * (1 / c)

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(v) <= tol for v in self.terms.values())

    def sites(self) -> set[int]:
        return {k.site for k in self.terms}

    def to_json(self) -> list[dict]:
        return [{"kind": k.kind, "site": k.site, "coeff": [v.real, v.imag]}
                for k, v in sorted(self.terms.items())]

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"({v:.6g}){k}" for k, v in sorted(self.terms.items()))


def path(i: int, dual: bool = False) -> TwistedChain:
    return TwistedChain({ElementaryChain(PATH, i): 1}, dual)


def loop(i: int, dual: bool = False) -> TwistedChain:
    return TwistedChain({ElementaryChain(LOOP, i): 1}, dual)


ZERO = TwistedChain()
ZERO_DUAL = TwistedChain(dual=True)


@dataclass(frozen=True)
class ChainBasisPair:
    gamma: tuple
    delta: tuple
    classification: IndexClassification


def bases(cls: IndexClassification) -> ChainBasisPair:
    """The homology basis gamma_1..gamma_(m+1) and the dual basis delta_1..delta_(m+1)."""
    m, r, s = cls.m, cls.r, cls.s
    i = cls.ordered
    lam = cls.lam
    gam, dlt = [], []
    if not cls.integral:
        i0, itop = i[0], i[m + 2]
        for j in range(1, m + 2):
            k = i[j]
            if j <= r:
                gam.append(path(k) - loop(i0) / (1 - lam[i0]))
                dlt.append(-loop(k, True))
            elif j <= r + s:
                gam.append(loop(k))
                dlt.append(path(k, True) - loop(itop, True) / (1 - 1 / lam[itop]))
            else:
                gam.append(loop(k) - ((1 - lam[k]) / (1 - lam[i0])) * loop(i0))
                dlt.append(loop(k, True)
                           - ((1 - 1 / lam[k]) / (1 - 1 / lam[itop])) * loop(itop, True))
    else:
        for j in range(1, m + 2):
            k = i[j + 1]
            if j <= r - 1:
                gam.append(path(k) - path(i[1]))
                dlt.append(-loop(k, True))
            else:
                gam.append(loop(k))
                dlt.append(path(k, True) - path(i[0], True))
    return ChainBasisPair(tuple(gam), tuple(dlt), cls)


def elementary_pairing(nu: ElementaryChain, mu: ElementaryChain, pos: Mapping[int, int],
                       lam: np.ndarray) -> complex:
    """Pairing of one dual elementary chain nu with one elementary chain mu.

    Derived once from a fixed picture: sites on the real line in the order
    `pos` (infinity sent to the right end by a real Moebius map), straight
    rays from the base point, the dual base point a little to the right,
    dual circles slightly larger.  Crossings away from the sites happen only
    when nu's site lies left of mu's site.
    """
    p, q = mu.site, nu.site
    if p != q:
        if pos[q] > pos[p]:
            return 0j
        a = 1 if nu.kind == PATH else 1 - 1 / lam[q]
        b = 1 if mu.kind == PATH else 1 - lam[p]
        return -complex(a * b)
    if nu.kind == PATH and mu.kind == PATH:
        raise DomainError(f"path and dual path share the end point x_{p}")
    if nu.kind == PATH:
        return complex(lam[p])
    if mu.kind == PATH:
        return -1 + 0j
    return complex(lam[p] - 1)


def _positions(cls: IndexClassification, order: Iterable[int] | None) -> dict[int, int]:
    seq = list(cls.linear_order() if order is None else order)
    if sorted(seq) != list(range(cls.m + 3)):
        raise DomainError(f"site order {seq} is not a permutation of 0..{cls.m + 2}")
    return {site: k for k, site in enumerate(seq)}


def intersection_h(d: TwistedChain, g: TwistedChain, cls: IndexClassification,
                   order: Iterable[int] | None = None) -> complex:
    """I_h(d, g) for a dual chain d and a chain g, by bilinear extension."""
    if not d.dual or g.dual:
        raise ValueError("intersection_h expects (dual chain, chain)")
    pos = _positions(cls, order)
    for site in d.sites() | g.sites():
        if site not in pos:
            raise DomainError(f"site {site} outside 0..{cls.m + 2}")
    lam = cls.lam
    return sum((cd * cg * elementary_pairing(nu, mu, pos, lam)
                for nu, cd in d.terms.items() for mu, cg in g.terms.items()), 0j)


def pairing_matrix(deltas, gammas, cls: IndexClassification, order=None) -> np.ndarray:
    return np.array([[intersection_h(d, g, cls, order) for g in gammas] for d in deltas])


def intersection_matrix_h(cls: IndexClassification) -> np.ndarray:
    """Closed-form intersection matrix of the bases returned by `bases`."""
    m, r, s = cls.m, cls.r, cls.s
    n = m + 1
    if cls.integral:
        return np.eye(n, dtype=complex)
    lam = cls.lam
    i = cls.ordered
    H = np.eye(n, dtype=complex)
    for k in range(r + s + 1, m + 2):
        lk = lam[i[k]] - 1
        for j in range(r + 1, r + s + 1):
            H[j - 1, k - 1] = lk
        H[k - 1, k - 1] = lk
        for j in range(r + s + 1, k):
            H[j - 1, k - 1] = lk * (1 - 1 / lam[i[j]])
    return H


def bilinear_matrix_h(cls: IndexClassification, basis: ChainBasisPair | None = None) -> np.ndarray:
    b = bases(cls) if basis is None else basis
    return pairing_matrix(b.delta, b.gamma, cls)


def vanishing_pair(p: int, q: int, cls: IndexClassification) -> tuple[TwistedChain, TwistedChain]:
    """The cycle and dual cycle whose reflection gives the circuit along rho_(p,q)."""
    lam = cls.lam
    mp, mq = cls.membership(p), cls.membership(q)
    lp, lq = lam[p], lam[q]
    if mp == "N0":
        if mq == "N0":
            return path(q) - path(p), ZERO_DUAL
        if mq == "Neg":
            return loop(q), loop(p, True)
        return loop(q) / (1 - lq) - path(p), (1 - lq) * loop(p, True)
    if mp == "Neg":
        if mq == "N0":
            return -loop(p), -loop(q, True)
        if mq == "Neg":
            return ZERO, path(q, True) - path(p, True)
        return -loop(p), -lq * loop(q, True) - (1 - lq) * path(p, True)
    if mq == "N0":
        return path(q) - loop(p) / (1 - lp), -(1 - lp) * loop(q, True)
    if mq == "Neg":
        return loop(q), (1 - lp) * path(q, True) + lp * loop(p, True)
    return (loop(q) / (1 - lq) - loop(p) / (1 - lp),
            -lq * (1 - lp) * loop(q, True) + lp * (1 - lq) * loop(p, True))


def generator_pairs(m: int) -> list[tuple[int, int]]:
    return [(p, q) for p in range(0, m + 2) for q in range(p + 1, m + 2) if (p, q) != (0, m + 1)]


def _expand(chain: TwistedChain, basis: tuple, tol: float = 1e-12) -> np.ndarray | None:
    """Coordinates of `chain` in `basis` as formal combinations, or None."""
    keys = sorted(set(chain.terms).union(*(b.terms for b in basis)))
    A = np.array([[b.terms.get(k, 0) for b in basis] for k in keys], dtype=complex)
    rhs = np.array([chain.terms.get(k, 0) for k in keys], dtype=complex)
    if not keys:
        return np.zeros(len(basis), dtype=complex)
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    if np.max(np.abs(A @ sol - rhs), initial=0.0) > tol * max(1.0, np.max(np.abs(rhs), initial=0.0)):
        return None
    return sol


@dataclass(frozen=True)
class VanishingPair:
    p: int
    q: int
    gamma: TwistedChain
    delta: TwistedChain
    y: np.ndarray
    z: np.ndarray
    degenerate: bool


def vanishing_pair_coords(p: int, q: int, cls: IndexClassification,
                          H: np.ndarray | None = None) -> VanishingPair:
    """Table cycles for rho_(p,q) together with y (column) and z (row)."""
    m = cls.m
    if not (0 <= p < q <= m + 1) or (p, q) == (0, m + 1):
        raise DomainError(f"({p},{q}) is not a generator pair")
    b = bases(cls)
    if H is None:
        H = intersection_matrix_h(cls)
    g, d = vanishing_pair(p, q, cls)
    Hinv = np.linalg.inv(H)
    y = _expand(g, b.gamma)
    if y is None:
        # not a formal combination; solve through the pairing instead
        y = Hinv @ np.array([intersection_h(di, g, cls) for di in b.delta])
    z = np.array([intersection_h(d, gj, cls) for gj in b.gamma]) @ Hinv
    return VanishingPair(p, q, g, d, y, z, g.is_zero() or d.is_zero())
