"""Product formulas for exponentials of commutators and other Lie polynomials.

The package is organised around six pieces:

- :mod:`commexp.liealg` — truncated word-series engine, nested-commutator
  basis and the Lie projection;
- :mod:`commexp.conditions` — order conditions, effective error, the
  counter-palindromic machinery, Newton refinement and the 1-D optimizer;
- :mod:`commexp.schemes` — the scheme catalog, parametric families,
  composition/substitution constructors, symmetry transforms and file I/O;
- :mod:`commexp.matform` — dense-matrix harness (expm, spectral norm,
  operator pairs, scheme evaluation);
- :mod:`commexp.bench` — error-vs-cost protocols and CSV exporters;
- :mod:`commexp.cli` — the ``commexp`` command-line entry point.
"""

from .conditions import (
    TargetPolynomial,
    commutator_target,
    cp_expand,
    effective_error,
    empirical_order,
    optimize_free_parameter,
    order_residuals,
    refine,
    sum_plus_commutator_target,
    sum_target,
    target_from_name,
)
from .liealg import (
    Generator,
    LieBasis,
    LieCoefficients,
    LieMembershipError,
    TruncatedSeries,
    Word,
    basis_build,
    exp_slot,
    lie_project,
    scheme_log,
    series_exp,
    series_log,
    series_mul,
)
from .matform import OperatorPair, evaluate_scheme, expm, make_pair, target_matrix, two_norm
from .schemes import (
    ExponentSlot,
    Scheme,
    catalog_get,
    catalog_names,
    load_scheme,
    save_scheme,
    substitute,
    transform,
)
from .bench import error_curve, export_figure, gates_for_tolerance, slope_fit

__version__ = "0.1.0"

__all__ = [
    "ExponentSlot",
    "Generator",
    "LieBasis",
    "LieCoefficients",
    "LieMembershipError",
    "OperatorPair",
    "Scheme",
    "TargetPolynomial",
    "TruncatedSeries",
    "Word",
    "basis_build",
    "catalog_get",
    "catalog_names",
    "commutator_target",
    "cp_expand",
    "effective_error",
    "empirical_order",
    "error_curve",
    "evaluate_scheme",
    "exp_slot",
    "expm",
    "export_figure",
    "gates_for_tolerance",
    "lie_project",
    "load_scheme",
    "make_pair",
    "optimize_free_parameter",
    "order_residuals",
    "refine",
    "save_scheme",
    "scheme_log",
    "series_exp",
    "series_log",
    "series_mul",
    "slope_fit",
    "substitute",
    "sum_plus_commutator_target",
    "sum_target",
    "target_from_name",
    "target_matrix",
    "transform",
    "two_norm",
    "__version__",
]
