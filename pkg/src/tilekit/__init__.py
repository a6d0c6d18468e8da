"""Multipartite tiling laboratory: exact fractional tilings, integral tiling
search and regularity-method primitives at desk scale."""

from .cliques import CapacityError, Clique, enumerate_transversal_cliques
from .errors import InvariantError, ParameterError
from .graphcore import (
    GraphError,
    KPartiteGraph,
    VertexRef,
    blow_up,
    catlin_graph,
    min_bipartite_degree,
    random_min_degree_graph,
)
from .fraclp import fractional_tiling_number

__version__ = "0.1.0"
