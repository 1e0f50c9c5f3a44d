"""Absorbing random walks, Hodge Laplacians and edge label propagation on simplicial complexes."""
from .algebra import (betti, boundary_matrix, coboundary_matrix, hodge_decomposition, hodge_project,
                      laplacian, projection_matrix, smallest_nontrivial_eigenvalue, spectral_summary,
                      weighted_laplacian)
from .complex import (AdjacencyKind, OrientedSimplex, SimplicialComplex, build_complex,
                      induced_orientation_sign, lower_adjacency)
from .io import parse_complex, parse_labels, serialize_complex
from .montecarlo import SimulationConfig, exact_marginals, simulate
from .propagation import (EdgeLabelPropagation, HodgeProjector, LabelProblem, PreconditionError,
                          closed_form_limit, kernel_support_check, propagate)
from .render import render_svg
from .walks import (TransitionMatrix, XkMatrix, dirichlet_evolution, dirichlet_propagation_matrix,
                    dirichlet_transition_matrix, generic_framework, homology_rank_from_walks,
                    marginal_difference_limit, neumann_transition_matrix, transform_T)

__version__ = "0.1.0"
