"""Python access to the Calabi flow lab.

Fields are numpy arrays: shape (N,) in one dimension and (N, N) in two, with
node (i, j) at (-1 + 2i/N, -1 + 2j/N).
"""

from ._core import (
    __version__,
    abreu_scalar_curvature,
    approx_potential,
    constants,
    energies,
    inverse_legendre_transform,
    legendre_transform,
    mabuchi_distance,
    mollify,
    prop31_search,
    quartic_example,
    riemann_norm,
    run_experiment,
    run_flow,
)

__all__ = [
    "__version__",
    "abreu_scalar_curvature",
    "approx_potential",
    "constants",
    "energies",
    "inverse_legendre_transform",
    "legendre_transform",
    "mabuchi_distance",
    "mollify",
    "prop31_search",
    "quartic_example",
    "riemann_norm",
    "run_experiment",
    "run_flow",
]
