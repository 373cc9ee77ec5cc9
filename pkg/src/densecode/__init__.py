"""Superdense coding of entangled states: simulation and bounds."""
__version__ = "0.1.0"

from ._backend import COMPILED
from .linalg import HilbertSpace, partial_trace, permute_subsystems, tensor_product
from .sampling import Seed, haar_isometry, haar_state, haar_unitary
from .states import (
    DensityOperator,
    PureState,
    SchmidtDecomposition,
    fidelity,
    schmidt_decompose,
    von_neumann_entropy,
)
from .protocol import ProtocolPlan, plan_resources, run_protocol, search_coupling_unitary

__all__ = [
    "COMPILED", "HilbertSpace", "partial_trace", "permute_subsystems", "tensor_product",
    "Seed", "haar_isometry", "haar_state", "haar_unitary", "DensityOperator", "PureState",
    "SchmidtDecomposition", "fidelity", "schmidt_decompose", "von_neumann_entropy",
    "ProtocolPlan", "plan_resources", "run_protocol", "search_coupling_unitary",
    "__version__",
]
