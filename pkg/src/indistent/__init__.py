"""Entanglement of indistinguishable particles relative to a measurement setup.

A setup is a partition of the particle labels into blocks together with
mutually orthogonal one-particle subspaces, one per block. States of the
(anti)symmetric sector are mapped isometrically onto the tensor-product
measurement space, where ordinary distinguishable-particle tools
(Schmidt decomposition, concurrence, PPT) apply.
"""

from .errors import (
    DimensionError,
    FilteredOutError,
    SetupError,
    StatisticsError,
    ValidationError,
)
from .permutation import (
    Permutation,
    ProvisionalState,
    Statistics,
    apply_permutation,
    basis_state,
    enumerate_permutations,
    signature,
    symmetrize,
)
from .setup import (
    MeasurementSetup,
    OrthogonalStructure,
    Partition,
    make_setup,
    validate_orthogonal_structure,
    validate_partition,
    validate_setup,
)
from .subspace_map import (
    BlockBasis,
    DecompositionResult,
    MesState,
    block_basis,
    decompose,
    expectation,
    f_forward,
    f_inverse,
    lift_observable,
    mes_dimension,
    product_mes_state,
    rho_mes,
)
from .entanglement import (
    EntanglementReport,
    MixedReport,
    factorization_check,
    is_iid,
    is_product_pure,
    mixed_report,
    ppt_check,
    schmidt_coefficients,
    separability_verdict,
    squared_concurrence,
)

__version__ = "0.1.0"
