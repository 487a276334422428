"""Residue matrices of the Gauss-Manin connection and the derived Pfaffian systems.

Matrices act on the column of frame forms (phi_(1,m+2), ..., phi_(m+1,m+2))
from the left: d phi = A(x) phi, with A = sum_k A_k dx_k.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .cocycles import (RationalOneForm, covariant_of_product, dual_frame_coordinates, eigen_cocycles,
                       endpoint_monomial, frame_coordinates)
from .parameters import DomainError, IndexClassification, ParameterVector, PointConfiguration

KINDS = ("r", "xi", "theta")


@dataclass(frozen=True)
class ResidueMatrixSet:
    params: ParameterVector
    R: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.params.m

    def __getitem__(self, key: tuple[int, int]) -> np.ndarray:
        i, j = key
        return self.R[(min(i, j), max(i, j))]

    def pairs(self) -> list[tuple[int, int]]:
        return sorted(self.R)

    def non_diagonalizable(self, tol: float = 1e-12) -> list[tuple[int, int]]:
        """Pairs with alpha_i + alpha_j = 0 but a nonzero (hence nilpotent) R_(i,j)."""
        a = self.params.values
        return [(i, j) for (i, j), M in self.R.items()
                if abs(a[i] + a[j]) <= tol and np.max(np.abs(M)) > tol]


def residue_matrices(pv: ParameterVector) -> ResidueMatrixSet:
    m = pv.m
    R = {}
    for i in range(m + 2):
        for j in range(i + 1, m + 2):
            if (i, j) == (0, m + 1):
                continue
            v, w = eigen_cocycles(i, j, pv)
            R[(i, j)] = -np.outer(w, v)
    return ResidueMatrixSet(pv, R)


def _sites(x: PointConfiguration) -> np.ndarray:
    return x.finite_sites


def _check_regular(x: PointConfiguration) -> None:
    if x.min_gap() < 1e-12:
        raise DomainError("configuration lies on the singular locus")


def pfaffian_matrix_p(pv: ParameterVector) -> np.ndarray:
    """P with F = P (phi_(1,m+2), ..., phi_(m+1,m+2))^t."""
    m = pv.m
    P = np.zeros((m + 1, m + 1), dtype=complex)
    P[0, m] = 1
    P[1:, :m] = -np.eye(m)
    P[1:, m] = pv.values[1:m + 1]
    return P


def gauge_q(x: PointConfiguration) -> np.ndarray:
    pts = _sites(x)
    return np.diag([1.0 + 0j] + [1 / (pts[i] - 1) for i in range(1, x.m + 1)])


@dataclass(frozen=True)
class PfaffianSystem:
    kind: str
    residues: ResidueMatrixSet

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")

    @property
    def m(self) -> int:
        return self.residues.m

    @property
    def P(self) -> np.ndarray:
        return pfaffian_matrix_p(self.residues.params)

    def _r_components(self, x: PointConfiguration) -> list[np.ndarray]:
        pts = _sites(x)
        m = self.m
        out = []
        for k in range(1, m + 1):
            A = np.zeros((m + 1, m + 1), dtype=complex)
            for j in range(m + 2):
                if j != k:
                    A += self.residues[k, j] / (pts[k] - pts[j])
            out.append(A)
        return out

    def _r_derivatives(self, x: PointConfiguration) -> dict[tuple[int, int], np.ndarray]:
        """d/dx_l of the dx_k component, keyed (k, l), both 1-based."""
        pts = _sites(x)
        m = self.m
        out = {}
        for k in range(1, m + 1):
            for l in range(1, m + 1):
                if l == k:
                    D = sum((-self.residues[k, j] / (pts[k] - pts[j]) ** 2
                             for j in range(m + 2) if j != k), np.zeros((m + 1, m + 1), complex))
                else:
                    D = self.residues[k, l] / (pts[k] - pts[l]) ** 2
                out[(k, l)] = D
        return out

    def connection_at(self, x: PointConfiguration) -> list[np.ndarray]:
        """Coefficient matrices of dx_1, ..., dx_m."""
        if x.m != self.m:
            raise DomainError("configuration size does not match the parameters")
        _check_regular(x)
        comps = self._r_components(x)
        if self.kind == "r":
            return comps
        P = self.P
        Pinv = np.linalg.inv(P)
        xi = [P @ A @ Pinv for A in comps]
        if self.kind == "xi":
            return xi
        Q = gauge_q(x)
        Qinv = np.linalg.inv(Q)
        return [Q @ A @ Qinv + self._gauge_term(x, k) for k, A in enumerate(xi, start=1)]

    def _gauge_term(self, x: PointConfiguration, k: int) -> np.ndarray:
        """(d_k Q) Q^-1, nonzero only in the diagonal slot k."""
        pts = _sites(x)
        D = np.zeros((self.m + 1, self.m + 1), dtype=complex)
        D[k, k] = -1 / (pts[k] - 1)
        return D

    def derivatives_at(self, x: PointConfiguration) -> dict[tuple[int, int], np.ndarray]:
        """Exact partial derivatives d_l A_k of the connection components."""
        dR = self._r_derivatives(x)
        if self.kind == "r":
            return dR
        P = self.P
        Pinv = np.linalg.inv(P)
        dXi = {kl: P @ M @ Pinv for kl, M in dR.items()}
        if self.kind == "xi":
            return dXi
        Q = gauge_q(x)
        Qinv = np.linalg.inv(Q)
        xi = self.__class__("xi", self.residues).connection_at(x)
        pts = _sites(x)
        out = {}
        for (k, l), M in dXi.items():
            conj = Q @ xi[k - 1] @ Qinv
            G = self._gauge_term(x, l)
            D = G @ conj - conj @ G + Q @ M @ Qinv
            if k == l:
                D[k, k] += 1 / (pts[k] - 1) ** 2
            out[(k, l)] = D
        return out


def pfaffian_system(pv: ParameterVector, kind: str = "xi") -> PfaffianSystem:
    return PfaffianSystem(kind.lower(), residue_matrices(pv))


def random_configuration(m: int, rng: np.random.Generator, min_gap: float = 0.05) -> PointConfiguration:
    """Random complex x_1..x_m kept away from each other and from 0 and 1."""
    while True:
        z = rng.uniform(-1.5, 2.5, m) + 1j * rng.uniform(-1.5, 1.5, m)
        x = PointConfiguration(m, tuple(complex(v) for v in z))
        if x.min_gap() > min_gap:
            return x


def commutator_residual(res: ResidueMatrixSet) -> float:
    """Largest violation of the residue commutator identities.

    [R_ij, R_ik + R_jk] = 0 for distinct i, j, k and [R_ij, R_kl] = 0 for
    disjoint pairs, over the pairs that carry a residue matrix.
    """
    m = res.m
    have = set(res.pairs())

    def get(i, j):
        return res[i, j] if (min(i, j), max(i, j)) in have else None

    worst = 0.0
    sites = range(m + 2)
    for i, j, k in itertools.permutations(sites, 3):
        Rij, Rik, Rjk = get(i, j), get(i, k), get(j, k)
        if Rij is None or Rik is None or Rjk is None:
            continue
        S = Rik + Rjk
        worst = max(worst, float(np.max(np.abs(Rij @ S - S @ Rij))))
    for (i, j), (k, l) in itertools.combinations(sorted(have), 2):
        if {i, j} & {k, l}:
            continue
        A, B = res[i, j], res[k, l]
        worst = max(worst, float(np.max(np.abs(A @ B - B @ A))))
    return worst


def check_integrability(sys: PfaffianSystem, trials: int = 20, seed: int = 0) -> float:
    """max |d_k A_l - d_l A_k - [A_k, A_l]| over random points, and the commutator identities."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    m = sys.m
    for _ in range(trials if m > 1 else 0):
        x = random_configuration(m, rng)
        A = sys.connection_at(x)
        dA = sys.derivatives_at(x)
        for k in range(1, m + 1):
            for l in range(k + 1, m + 1):
                # d_k A_l is keyed (l, k)
                lhs = dA[(l, k)] - dA[(k, l)]
                rhs = A[k - 1] @ A[l - 1] - A[l - 1] @ A[k - 1]
                worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    if m > 1:
        worst = max(worst, commutator_residual(sys.residues))
    return worst


def eigenvalue_residual(res: ResidueMatrixSet) -> float:
    """How far the spectra of the R_ij are from {0, alpha_i + alpha_j} (with rank <= 1).

    Rank <= 1 plus the trace pins the characteristic polynomial to
    lambda^(n-1) (lambda - tr), and R^2 = (alpha_i + alpha_j) R is checked
    directly. Computed eigenvalues are compared only when the target is
    non-zero: a nilpotent R is a Jordan block, where they carry sqrt(eps) noise.
    """
    a = res.params.values
    worst = 0.0
    for (i, j), M in res.R.items():
        target = a[i] + a[j]
        s = np.linalg.svd(M, compute_uv=False)
        worst = max(worst, float(np.max(s[1:], initial=0.0)), float(abs(np.trace(M) - target)))
        worst = max(worst, float(np.max(np.abs(M @ M - target * M))) / max(1.0, s[0]))
        if abs(target) > 1e-8:
            ev = np.linalg.eigvals(M)
            worst = max(worst, float(np.max(np.minimum(np.abs(ev), np.abs(ev - target)))))
    return worst


def dual_residue_matrices(res: ResidueMatrixSet) -> dict:
    """Matrices of the dual connection on the dual frame (acting from the right)."""
    return {k: -M for k, M in res.R.items()}


@dataclass(frozen=True)
class SubspaceCheck:
    label: str
    site: int
    dimension: int
    residual: float


@dataclass(frozen=True)
class InvariantSubspaceReport:
    exact_dimension: int
    expected_exact_dimension: int
    lines: tuple
    hyperplanes: tuple

    @property
    def residual(self) -> float:
        return max((c.residual for c in self.lines + self.hyperplanes), default=0.0)


def _moved_form(cls: IndexClassification, x: PointConfiguration, site: int, k: int,
                dual: bool) -> RationalOneForm:
    """nabla_t of nabla_k g (dual: of nabla_k^v g) for the end-point monomial g at `site`.

    With g = const * prod (t - x_j)^e_j one has
    nabla_k g = g * (d_k log const - (e_k +- alpha_k)/(t - x_k)).
    Here u g vanishes to second order at the other moving sites of the
    divisor, so differentiating under the moving end points adds nothing
    off the line.
    """
    exps, const = endpoint_monomial(cls, x, site, dual=dual, vanish=2)
    pts = x.finite_sites
    a = cls.params.values
    kappa = 0j
    if site != cls.m + 2:
        for j, e in exps.items():
            if j == site:
                continue
            if k == site:
                kappa += -e / (pts[site] - pts[j])
            elif k == j:
                kappa += e / (pts[site] - pts[k])
    lin = exps.get(k, 0) + (-a[k] if dual else a[k])
    shifted = dict(exps)
    shifted[k] = shifted.get(k, 0) - 1
    pv = cls.params
    out = covariant_of_product(pv, x, exps, kappa * const, dual=dual)
    return out - covariant_of_product(pv, x, shifted, lin * const, dual=dual)


def _end_form(cls: IndexClassification, x: PointConfiguration, site: int, dual: bool) -> RationalOneForm:
    exps, const = endpoint_monomial(cls, x, site, dual=dual, vanish=2)
    return covariant_of_product(cls.params, x, exps, const, dual=dual)


def _off_line(vec: np.ndarray, other: np.ndarray) -> float:
    """Norm of the part of `other` orthogonal to the line through `vec`."""
    return float(np.linalg.norm(other - vec * (np.vdot(vec, other) / np.vdot(vec, vec))))


def invariant_subspaces(cls: IndexClassification, x: PointConfiguration | None = None,
                        tol: float = 1e-10) -> InvariantSubspaceReport:
    """Check the connection-stable subspaces predicted by the integer exponents.

    Each site i of D gives the line of nabla_t(h_i/u); moving along x_k keeps
    it on itself.  Each site k of the dual divisor gives the hyperplane of
    classes orthogonal to u dh_k.  Both checks use the exact derivative form
    of the end-point monomial, so no numerical differentiation is involved.
    """
    m = cls.m
    if x is None:
        x = random_configuration(m, np.random.default_rng(0), 0.2)
    lines, planes = [], []
    coords = []
    for i in cls.iN0:
        c = frame_coordinates(_end_form(cls, x, i, False), cls, x)
        coords.append(c)
        worst = 0.0
        if np.linalg.norm(c) > tol:
            for k in range(1, m + 1):
                d = frame_coordinates(_moved_form(cls, x, i, k, False), cls, x)
                worst = max(worst, _off_line(c, d) / max(1.0, float(np.linalg.norm(c))))
        lines.append(SubspaceCheck("line", i, int(np.linalg.norm(c) > tol), worst))
    for k_site in cls.iNeg:
        v = dual_frame_coordinates(_end_form(cls, x, k_site, True), cls, x)
        worst = 0.0
        nonzero = np.linalg.norm(v) > tol
        if nonzero:
            for k in range(1, m + 1):
                d = dual_frame_coordinates(_moved_form(cls, x, k_site, k, True), cls, x)
                worst = max(worst, _off_line(v, d) / max(1.0, float(np.linalg.norm(v))))
        planes.append(SubspaceCheck("hyperplane", k_site, m + 1 - int(nonzero), worst))
    dim = int(np.linalg.matrix_rank(np.array(coords), tol)) if coords else 0
    expected = cls.r - 1 if cls.integral else cls.r
    return InvariantSubspaceReport(dim, expected, tuple(lines), tuple(planes))
