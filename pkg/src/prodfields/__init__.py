"""Horizontal and vertical vector fields on product manifolds."""

from .exprcore import Expr, differentiate, evaluate, parse_expr, substitute, to_text
from .fields import (
    OneForm,
    VectorField,
    VectorFieldFamily,
    apply_derivation,
    decompose,
    horizontal_projection,
    iota_family,
    is_horizontal,
    is_vertical,
    multi_decompose,
    pair_oneform,
    project_to_family,
    pullback_oneform,
    vertical_projection,
)
from .manifolds import (
    FunctionFamily,
    Manifold,
    ProductManifold,
    SmoothFunction,
    family_to_function,
    function_to_family,
    make_manifold,
    make_product,
    pullback_embedding,
    pullback_projection,
)
from .sampling import SampleConfig, sample_points
from .verify import CheckReport, check_functions_equal, run_suite

__version__ = "0.1.0"
