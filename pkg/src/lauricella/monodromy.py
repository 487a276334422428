"""Circuit matrices of the generators rho_(p,q) and the reducibility of the representation.

Matrices act on coordinates in the chain basis (gamma_1, ..., gamma_(m+1)):
rho(gamma_j) = sum_k gamma_k M_kj, so a row of periods transforms as F -> F M.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chains import (bases, generator_pairs, intersection_h, intersection_matrix_h, loop,
                     vanishing_pair_coords)
from .parameters import DomainError, IndexClassification


@dataclass(frozen=True)
class CircuitMatrix:
    p: int
    q: int
    M: np.ndarray
    y: np.ndarray
    z: np.ndarray
    degenerate: bool

    @property
    def det(self) -> complex:
        return complex(np.linalg.det(self.M))


def circuit_matrix(p: int, q: int, cls: IndexClassification, H: np.ndarray | None = None) -> CircuitMatrix:
    """M = E - y z H for the loop rho_(p,q)."""
    if H is None:
        H = intersection_matrix_h(cls)
    vp = vanishing_pair_coords(p, q, cls, H)
    n = cls.m + 1
    M = np.eye(n, dtype=complex) - np.outer(vp.y, vp.z) @ H
    return CircuitMatrix(p, q, M, vp.y, vp.z, vp.degenerate)


def all_circuit_matrices(cls: IndexClassification, H: np.ndarray | None = None) -> list[CircuitMatrix]:
    if H is None:
        H = intersection_matrix_h(cls)
    return [circuit_matrix(p, q, cls, H) for p, q in generator_pairs(cls.m)]


def parse_pairs(text: str, m: int) -> list[tuple[int, int]]:
    """'all' or 'p,q[;p,q...]'."""
    if text.strip().lower() == "all":
        return generator_pairs(m)
    out = []
    for chunk in text.split(";"):
        p, q = (int(v) for v in chunk.split(","))
        out.append((p, q))
    return out


def _invariance_defect(V: np.ndarray, mats: list[np.ndarray]) -> float:
    """How far the column span of V is from being mapped into itself."""
    Q, _ = np.linalg.qr(V)
    worst = 0.0
    for M in mats:
        W = M @ Q
        worst = max(worst, float(np.max(np.abs(W - Q @ (Q.conj().T @ W)))))
    return worst


@dataclass(frozen=True)
class Witness:
    kind: str
    site: int | None
    basis: np.ndarray
    defect: float


@dataclass(frozen=True)
class RepresentationReport:
    reducible: bool
    trivial: bool
    witnesses: tuple
    max_identity_defect: float


def absolute_cycle_coords(cls: IndexClassification) -> np.ndarray:
    """Columns spanning H_1(T; L) inside the gamma coordinates."""
    n = cls.m + 1
    first = cls.r if not cls.integral else cls.r - 1
    return np.eye(n, dtype=complex)[:, first:]


def loop_coords(site: int, cls: IndexClassification, H: np.ndarray) -> np.ndarray:
    """Coordinates of the loop at `site` in the gamma basis, through the pairing."""
    b = bases(cls)
    row = np.array([intersection_h(d, loop(site), cls) for d in b.delta])
    return np.linalg.solve(H, row)


def classify_representation(cls: IndexClassification, tol: float = 1e-12) -> RepresentationReport:
    m = cls.m
    n = m + 1
    H = intersection_matrix_h(cls)
    mats = [c.M for c in all_circuit_matrices(cls, H)]
    integral_sites = [i for i in range(m + 3) if cls.params.is_integer(i)]
    witnesses = []
    if integral_sites:
        V = absolute_cycle_coords(cls)
        if 0 < V.shape[1] < n:
            witnesses.append(Witness("absolute-cycles", None, V, _invariance_defect(V, mats)))
        for i in cls.iNeg:
            v = loop_coords(i, cls, H).reshape(n, 1)
            if np.linalg.norm(v) > tol:
                witnesses.append(Witness("loop", i, v, _invariance_defect(v, mats)))
        if not witnesses:
            # H_1(T; L) vanishes when only two sites are non-integral and none is in -N;
            # the action is then diagonal on the gamma basis.
            for j in range(n):
                e = np.eye(n, dtype=complex)[:, j:j + 1]
                d = _invariance_defect(e, mats)
                if d <= tol:
                    witnesses.append(Witness("coordinate-line", j + 1, e, d))
    trivial = cls.integral and cls.r in (1, m + 2)
    defect = max(float(np.max(np.abs(M - np.eye(n)))) for M in mats)
    return RepresentationReport(bool(integral_sites), trivial, tuple(witnesses), defect)


def fixed_space_defect(c: CircuitMatrix, H: np.ndarray, rng: np.random.Generator, samples: int = 20) -> float:
    """max |M v - v| over random v with z H v = 0."""
    n = len(c.y)
    row = c.z @ H
    worst = 0.0
    for _ in range(samples):
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        if np.linalg.norm(row) > 0:
            v = v - row.conj() * (row @ v) / (row @ row.conj())
        worst = max(worst, float(np.max(np.abs(c.M @ v - v))))
    return worst


def reflection_defect(c: CircuitMatrix, cls: IndexClassification) -> float:
    """|(M - E)(M - lambda_p lambda_q E)|; only meaningful when lambda_p lambda_q != 1."""
    lam = cls.lam
    mu = lam[c.p] * lam[c.q]
    E = np.eye(len(c.y))
    return float(np.max(np.abs((c.M - E) @ (c.M - mu * E))))


def check_generator(p: int, q: int, cls: IndexClassification) -> None:
    if (p, q) not in generator_pairs(cls.m):
        raise DomainError(f"({p},{q}) is not a generator pair")


@dataclass(frozen=True)
class ContinuationCheck:
    p: int
    q: int
    residual: float


def continuation_residuals(cls: IndexClassification, x=None, pairs=None, rtol: float = 1e-13,
                           tol: float = 1e-12) -> list[ContinuationCheck]:
    """Carry the frame periods around each generator loop and compare with F M.

    The residual is relative to the largest period at the base point.
    """
    from .connection import pfaffian_system
    from .numerics import continue_pfaffian, frame_periods, generator_loop
    from .parameters import aligned_configuration, widest_spacing

    if x is None:
        x = aligned_configuration(cls, widest_spacing(cls))
    if pairs is None:
        pairs = generator_pairs(cls.m)
    H = intersection_matrix_h(cls)
    system = pfaffian_system(cls.params, "r")
    F = frame_periods(cls, x, tol=tol)
    scale = float(np.max(np.abs(F)))
    out = []
    for p, q in pairs:
        check_generator(p, q, cls)
        M = circuit_matrix(p, q, cls, H).M
        end = continue_pfaffian(system, generator_loop(p, q, x), F, rtol=rtol, atol=rtol * scale * 1e-2)
        out.append(ContinuationCheck(p, q, float(np.max(np.abs(end - F @ M))) / scale))
    return out
