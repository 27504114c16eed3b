"""S-spectrum and S-resolvent computations for operators on Clifford modules."""

from .boundary import (
    BoundarySpec,
    ConstrainedResolvent,
    SpectrumPointError,
    Subspace,
    assemble,
    commutator,
    commutator_kernel,
    image_characterization,
    q_inv,
)
from .clifford import (
    AlgebraMismatchError,
    Multivector,
    Paravector,
    clifford_mul,
    conjugate,
    ds_metric,
    modulus_sq,
    slice_decompose,
)
from .module import CliffordOperator, CliffordVector, apply, build_Q, compose, real_rep
from .resolvents import (
    DegeneratePairError,
    cr_equivalence_check,
    cr_residuals,
    neumann_series,
    residual_left_eq,
    residual_resolvent_eq,
    residual_right_eq,
    slice_functions,
)
from .scan import ScanGrid, SpectrumMap, emit_csv, scan

__version__ = "0.1.0"

__all__ = [
    "AlgebraMismatchError",
    "BoundarySpec",
    "CliffordOperator",
    "CliffordVector",
    "ConstrainedResolvent",
    "DegeneratePairError",
    "Multivector",
    "Paravector",
    "ScanGrid",
    "SpectrumMap",
    "SpectrumPointError",
    "Subspace",
    "apply",
    "assemble",
    "build_Q",
    "clifford_mul",
    "commutator",
    "commutator_kernel",
    "compose",
    "conjugate",
    "cr_equivalence_check",
    "cr_residuals",
    "ds_metric",
    "emit_csv",
    "image_characterization",
    "modulus_sq",
    "neumann_series",
    "q_inv",
    "real_rep",
    "residual_left_eq",
    "residual_resolvent_eq",
    "residual_right_eq",
    "scan",
    "slice_decompose",
    "slice_functions",
]
