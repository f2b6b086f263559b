"""Python bindings for the palmtess C++ core."""

from ._palmtess import (
    PalmtessError,
    __version__,
    box_open,
    delaunay,
    estimate_phi,
    geometry_selftest,
    palm_moment,
    rho_gamma,
    run_experiment,
    sample,
    sep_check,
    void_probability,
)

__all__ = [
    "PalmtessError",
    "__version__",
    "box_open",
    "delaunay",
    "estimate_phi",
    "geometry_selftest",
    "palm_moment",
    "rho_gamma",
    "run_experiment",
    "sample",
    "sep_check",
    "void_probability",
]
