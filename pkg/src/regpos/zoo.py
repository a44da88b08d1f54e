"""Standard body zoo used by the experiment drivers and property suites."""

from __future__ import annotations

import numpy as np

from . import bodies as bd

__all__ = ["default_zoo", "random_h_polytope", "preset"]


def _ramp(n):
    if n == 1:
        return np.ones(1)
    return 1.0 + np.arange(n) / (n - 1.0)


def default_zoo(n: int):
    """(name, body) pairs: B_1, B_2, B_inf, weighted l_p for p in {1, 1.5, 3},
    and diagonal ellipsoids with condition numbers 4 and 100."""
    r = _ramp(n)
    return [
        ("b1", bd.cross_polytope(n)),
        ("b2", bd.ball(n)),
        ("binf", bd.cube(n)),
        ("wlp1", bd.WeightedLp.from_weights(1.0, r)),
        ("wlp1.5", bd.WeightedLp.from_weights(1.5, r)),
        ("wlp3", bd.WeightedLp.from_weights(3.0, r)),
        ("ell_cond4", bd.Ellipsoid(np.diag(np.geomspace(1.0, 4.0, n)))),
        ("ell_cond100", bd.Ellipsoid(np.diag(np.geomspace(1.0, 100.0, n)))),
    ]


def random_h_polytope(rng, n: int, facets: int | None = None) -> bd.PolytopeH:
    """Random symmetric H-polytope with `facets` (default 2n) facet-normal pairs."""
    facets = 2 * n if facets is None else facets
    rows = rng.standard_normal((facets, n))
    rows /= np.linalg.norm(rows, axis=1, keepdims=True)
    rows *= rng.uniform(0.5, 1.5, size=(facets, 1))
    return bd.PolytopeH(rows)


def preset(name: str, n: int) -> bd.ConvexBody:
    table = dict(default_zoo(n))
    if name not in table:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(table)}")
    return table[name]
