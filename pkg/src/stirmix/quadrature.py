"""Quadrature rules on the reference triangle and segment.

Reference triangle: vertices (0, 0), (1, 0), (0, 1), area 1/2.
Reference segment: [0, 1], length 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray  # (n, 2) for triangles, (n,) for segments
    weights: np.ndarray
    exact_degree: int
    domain: str

    @property
    def n_points(self) -> int:
        return len(self.weights)


def _orbit3(a, w):
    b = 1.0 - 2.0 * a
    return [(a, a, b), (a, b, a), (b, a, a)], [w] * 3


def _orbit6(a, b, w):
    c = 1.0 - a - b
    pts = [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)]
    return pts, [w] * 6


def _from_barycentric(groups):
    bary, w = [], []
    for p, q in groups:
        bary += p
        w += q
    bary = np.asarray(bary, dtype=float)
    # weights tabulated for unit-area normalisation; reference area is 1/2
    return bary[:, 1:3].copy(), 0.5 * np.asarray(w, dtype=float)


def _triangle_tables():
    s15 = np.sqrt(15.0)
    tables = {}
    tables[1] = _from_barycentric([([(1 / 3, 1 / 3, 1 / 3)], [1.0])])
    tables[2] = _from_barycentric([_orbit3(1 / 6, 1 / 3)])
    tables[4] = _from_barycentric([
        _orbit3(0.445948490915965, 0.223381589678011),
        _orbit3(0.091576213509771, 0.109951743655322),
    ])
    # Radon's 7-point formula, closed form
    tables[5] = _from_barycentric([
        ([(1 / 3, 1 / 3, 1 / 3)], [9 / 40]),
        _orbit3((6 - s15) / 21, (155 - s15) / 1200),
        _orbit3((6 + s15) / 21, (155 + s15) / 1200),
    ])
    # Dunavant degree-8, 16 points
    tables[8] = _from_barycentric([
        ([(1 / 3, 1 / 3, 1 / 3)], [0.144315607677787]),
        _orbit3(0.459292588292723, 0.095091634267285),
        _orbit3(0.170569307751760, 0.103217370534718),
        _orbit3(0.050547228317031, 0.032458497623198),
        _orbit6(0.008394777409958, 0.263112829634638, 0.027230314174435),
    ])
    return tables


_TRI = _triangle_tables()
# segment rules: n-point Gauss-Legendre is exact to degree 2n - 1
_SEG_POINTS = (1, 2, 3, 4, 5, 6, 8, 10, 12, 16)

MAX_TRIANGLE_DEGREE = max(_TRI)
MAX_SEGMENT_DEGREE = 2 * max(_SEG_POINTS) - 1


@lru_cache(maxsize=None)
def _segment(n: int) -> QuadratureRule:
    x, w = np.polynomial.legendre.leggauss(n)
    return QuadratureRule(0.5 * (x + 1.0), 0.5 * w, 2 * n - 1, "segment")


@lru_cache(maxsize=None)
def quadrature(domain: str, required_degree: int) -> QuadratureRule:
    """Smallest tabulated rule on ``domain`` exact for ``required_degree``.

    ``domain`` is ``"triangle"`` or ``"segment"``. Raises ``ValueError`` when
    no tabulated rule reaches the requested degree.
    """
    if required_degree < 0:
        raise ValueError("required_degree must be non-negative")
    if domain == "triangle":
        for deg in sorted(_TRI):
            if deg >= required_degree:
                pts, w = _TRI[deg]
                return QuadratureRule(pts, w, deg, "triangle")
        raise ValueError(
            f"no triangle rule exact to degree {required_degree} "
            f"(max {MAX_TRIANGLE_DEGREE})")
    if domain == "segment":
        for n in _SEG_POINTS:
            if 2 * n - 1 >= required_degree:
                return _segment(n)
        raise ValueError(
            f"no segment rule exact to degree {required_degree} "
            f"(max {MAX_SEGMENT_DEGREE})")
    raise ValueError(f"unknown domain {domain!r}")


def triangle_rule_for_dg(M: int) -> QuadratureRule:
    """Volume rule used by the DG solver for polynomial degree ``M``."""
    return quadrature("triangle", 5 if M <= 2 else 8)


def segment_rule_for_dg(M: int) -> QuadratureRule:
    """Edge rule used by the DG solver for polynomial degree ``M``."""
    return quadrature("segment", 5 if M <= 2 else 31)
