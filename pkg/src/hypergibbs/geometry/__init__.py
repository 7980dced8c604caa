"""Point and window primitives and planar tessellation kernels."""
from .knn import knn_order, knn_table, kth_distance
from .lattice import (RHO0_2D, TRIANGULAR_OFFSETS, ClusterTemplate, Explicit, LatticeSpec,
                      SingletonBall, fill_outside, pseudo_periodic, unit_ball_volume)
from .pointio import format_points, parse_points, read_points, write_points
from .primitives import Configuration, Window, circumball
from .tessellation import (Tessellation, VoronoiCell, delaunay, gabriel_edges,
                           hull_boundary_mask, voronoi_cell)

__all__ = [
    "Configuration", "Window", "circumball", "Tessellation", "VoronoiCell", "delaunay",
    "gabriel_edges", "hull_boundary_mask", "voronoi_cell", "knn_order", "knn_table",
    "kth_distance", "LatticeSpec", "SingletonBall", "ClusterTemplate", "Explicit",
    "pseudo_periodic", "fill_outside", "unit_ball_volume", "RHO0_2D", "TRIANGULAR_OFFSETS",
    "format_points", "parse_points", "read_points", "write_points",
]
