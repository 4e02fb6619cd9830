"""Intrinsic Delaunay triangulations and the discrete Laplace-Beltrami operator of piecewise flat surfaces."""

from .curvature import (
    curvature_field,
    is_minimal,
    mcf_step,
    mean_curvature_density,
    mean_curvature_vector,
    minimal_solve,
    voronoi_area,
)
from .errors import IDTError
from .idt import (
    FlipRecord,
    TessellationCells,
    extract_tessellation,
    flip_edge,
    flip_to_delaunay,
    harmonic_index,
    is_flippable,
    is_locally_delaunay,
)
from .laplace import (
    WeightedGraph,
    apply_laplace,
    assemble,
    check_harmonic_hull,
    dirichlet_energy,
    edge_weight,
    solve_dirichlet,
    solve_neumann,
)
from .surface import Corner, EmbeddedMesh, PiecewiseFlatSurface, from_embedding, validate

__version__ = "0.1.0"
