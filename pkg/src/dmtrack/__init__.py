"""Discrete Morse theory on time-varying data: gradient fields, spacetime extension, tracking."""
from .complex import (CellComplex, CellKind, betti_mod2, circle_complex, euler_characteristic,
                      freudenthal_grid, path_complex, read_off, simplicial_complex, torus_grid,
                      write_off)
from .errors import (CancellationError, ComplexError, DMTError, InputError,
                     InvalidMorseFunction, NotACurveError, NotGradientError, PathCapExceeded,
                     SliceMismatchError)
from .gradient_build import (VertexField, cancel_pair, gradient_paths_between,
                             lower_star_field, persistence_simplify)
from .morse import (DiscreteVectorField, VPath, critical_cells, critical_counts,
                    descend_vertex, field_from_function, is_gradient, validate_morse_function,
                    vpaths_from)
from .pipeline import DiagramDocument, PipelineConfig, analyze, run_pipeline
from .spacetime import (ExtensionReport, SliceSequence, SpacetimeComplex, build_prism_complex_1d,
                        build_product_complex, extend_general, extend_same_triangulation)
from .tracking import (BifurcationDiagram, DiagramEdge, DiagramNode, build_diagram,
                       strong_connections, trace_cell, trace_vertex)

__version__ = "0.1.0"
