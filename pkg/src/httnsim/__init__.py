"""httnsim: density-matrix simulation of hybrid tree tensor networks.

Subpackages follow the pipeline: ``linalg`` (Pauli algebra, spectral
tools), ``channels`` (CPTP noise), ``tensors`` (preparation kinds and
expansion operators), ``contraction`` (per-tensor Hermitian blocks),
``tree`` (multi-layer contraction, noisy effective states, physicality),
``deepvqe`` and ``forging`` (cluster algorithms as tree instances),
``decay`` (noise-accumulation experiment and rescaling), ``cli``
(config-driven experiment runner).
"""

from .channels import (
    ChainedChannel,
    DepolarizingChannel,
    GateNoisePair,
    KrausChannel,
    NO_NOISE,
    NoiseSpec,
    choi_matrix,
    compose_channels,
    is_cptp,
    make_depolarizing,
    state_preparation_channel,
    tensor_channels,
    unitary_channel,
)
from .contraction import (
    HermitianBlock,
    contract_classical,
    contract_tensor,
    contract_type1,
    contract_type2,
    contract_type3,
    contract_type4,
)
from .linalg import (
    hermitian_eigendecompose,
    pauli_decompose,
    pauli_matrix,
    pauli_recompose,
    tensor_product,
)
from .tensors import (
    ClassicalTable,
    ExpansionOperator,
    GateFamilyPrep,
    InitialStatePrep,
    PauliFamilyPrep,
    ProjectedStatePrep,
    QuantumTensor,
    build_expansion_operator,
    noisy_expansion_map,
)
from .tree import (
    HttnTree,
    PhysicalityReport,
    TreeRoot,
    apply_expansion_layer,
    effective_noisy_state,
    effective_noisy_state_type4,
    expectation,
    noisy_expectation,
    physicality_check,
    pure_tree_state,
)
from .decay import (
    DecayConfig,
    DecayResult,
    build_hea,
    layered_ratio,
    mixed_layer_ratio,
    predicted_ratio,
    qem_rescale,
)
from .deepvqe import (
    AnsatzSpec,
    ClusterModel,
    DeepVqeResult,
    InteractionTerm,
    OptimizerSpec,
    cluster_vqe,
    deep_vqe,
    deep_vqe_energy,
    dv2_effective_state,
    dv_effective_state,
    effective_hamiltonian,
    gram_schmidt_transform,
    overlap_matrix,
)
from .forging import (
    ForgedAnsatz,
    SamplerPlan,
    SamplerResult,
    build_sampler_plan,
    forged_effective_state,
    forged_expectation,
    forged_htn_expectation,
    forged_sampler,
    optimal_coefficients,
    schmidt_decompose,
)

__version__ = "0.1.0"
