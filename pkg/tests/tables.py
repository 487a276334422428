"""Circuit data for two m = 3 strata, as functions of the local monodromies."""

from __future__ import annotations

import numpy as np


def _E():
    return np.eye(4, dtype=complex)


def _rows(M, **rows):
    M = M.copy()
    for k, v in rows.items():
        M[int(k[1:]) - 1] = v
    return M


def reducible_two_two(L0):
    """alpha_0, alpha_5 non-integral; alpha_1, alpha_2 in N0; alpha_3, alpha_4 in -N; H = E_4."""
    E = _E()
    return {
        (0, 1): ([1, 0, 0, 0], [1 - L0, 0, 0, 0], np.diag([L0, 1, 1, 1])),
        (0, 2): ([0, 1, 0, 0], [0, 1 - L0, 0, 0], np.diag([1, L0, 1, 1])),
        (0, 3): ([0, 0, 1, 0], [1, 1, 1 - L0, 0], _rows(E, r3=[-1, -1, L0, 0])),
        (1, 2): ([-1, 1, 0, 0], [0, 0, 0, 0], E),
        (1, 3): ([0, 0, 1, 0], [-1, 0, 0, 0], _rows(E, r3=[1, 0, 1, 0])),
        (1, 4): ([0, 0, 0, 1], [-1, 0, 0, 0], _rows(E, r4=[1, 0, 0, 1])),
        (2, 3): ([0, 0, 1, 0], [0, -1, 0, 0], _rows(E, r3=[0, 1, 1, 0])),
        (2, 4): ([0, 0, 0, 1], [0, -1, 0, 0], _rows(E, r4=[0, 1, 0, 1])),
        (3, 4): ([0, 0, 0, 0], [0, 0, -1, 1], E),
    }


def reducible_four_one_one(L0, L3, L4):
    """alpha_0, alpha_3, alpha_4, alpha_5 non-integral; alpha_1 in N0; alpha_2 in -N."""
    E = _E()
    return {
        (0, 1): ([1, 0, 0, 0], [1 - L0, 0, 0, 0], np.diag([L0, 1, 1, 1])),
        (0, 2): ([0, 1, 0, 0], [1, 1 - L0, -1, -1 / L3],
                 _rows(E, r2=[-1, L0, L0 * (L3 - 1), L0 * (L4 - 1)])),
        (0, 3): ([0, 0, 1 / (1 - L3), 0], [1 - L3, 0, L0 * L3 - 1, 1 - 1 / L3],
                 _rows(E, r3=[-1, 0, L0 * L3, L0 * (L4 - 1)])),
        (1, 2): ([0, 1, 0, 0], [-1, 0, 0, 0], _rows(E, r2=[1, 1, 0, 0])),
        (1, 3): ([-1, 0, 1 / (1 - L3), 0], [-(1 - L3), 0, 0, 0],
                 _rows(E, r1=[L3, 0, 0, 0], r3=[1, 0, 1, 0])),
        (1, 4): ([-1, 0, 0, 1 / (1 - L4)], [-(1 - L4), 0, 0, 0],
                 _rows(E, r1=[L4, 0, 0, 0], r4=[1, 0, 0, 1])),
        (2, 3): ([0, -1, 0, 0], [0, -(1 - L3), -L3, 0], _rows(E, r2=[0, L3, 1 - L3, 0])),
        (2, 4): ([0, -1, 0, 0], [0, -(1 - L4), 0, -L4],
                 _rows(E, r2=[0, L4, (1 - L3) * (1 - L4), 1 - L4])),
        (3, 4): ([0, 0, -1 / (1 - L3), 1 / (1 - L4)], [0, 0, L3 * (1 - L4), -L4 * (1 - L3)],
                 _rows(E, r3=[0, 0, L3 * L4 - L3 + 1, 1 - L4], r4=[0, 0, (1 - L3) * L3, L3])),
    }


def four_one_one_h(L3, L4):
    return np.array([[1, 0, 0, 0],
                     [0, 1, L3 - 1, L4 - 1],
                     [0, 0, L3 - 1, (1 - 1 / L3) * (L4 - 1)],
                     [0, 0, 0, L4 - 1]], dtype=complex)


def table_deviation(cls, table, H=None) -> float:
    """Largest entry deviation of (y, z, M) from a table."""
    from lauricella.chains import intersection_matrix_h, vanishing_pair_coords
    from lauricella.monodromy import circuit_matrix

    if H is None:
        H = intersection_matrix_h(cls)
    worst = 0.0
    for (p, q), (y, z, M) in table.items():
        vp = vanishing_pair_coords(p, q, cls, H)
        c = circuit_matrix(p, q, cls, H)
        worst = max(worst, float(np.max(np.abs(vp.y - np.asarray(y)))),
                    float(np.max(np.abs(vp.z - np.asarray(z)))),
                    float(np.max(np.abs(c.M - M))))
    return worst
