"""Feynman chessboard propagator: exact lattice kernel and its single-path Monte Carlo."""

from .kernel import (
    Convention,
    GuardError,
    KernelCell,
    KernelParams,
    KernelTable,
    complex_kernel,
    count_paths,
    enumerate_kernel,
    kernel_table,
    phi_components,
    signed_kernel,
)
from .paths import Leg, Path, Site, corner_count, from_legs, positions, to_legs
from .twins import (
    Channel,
    EntwinedLoop,
    Move,
    entwine,
    extend_even,
    feynman_color,
    meeting_points,
    orthogonal_twin,
)

__version__ = "0.1.0"
