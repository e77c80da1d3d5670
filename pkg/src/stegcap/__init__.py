"""Steganographic capacity: permissible-set counting, secure capacity
estimates, information spectra and coding simulations."""

from .exceptions import (
    StegcapError,
    ValidationError,
    BudgetExceededError,
    DomainError,
)
from .prob import (
    Distribution,
    JointDistribution,
    TypeVector,
    entropy,
    binary_entropy,
    mutual_information,
    kl_divergence,
    information_density,
    type_class_size,
    stirling_slack,
    type_class_entropy_bounds,
    iter_types,
    nearest_type,
)
from .steganalyzer import (
    PermissibleSet,
    Steganalyzer,
    SumSteganalyzer,
    MemorylessSteganalyzer,
    VarianceSteganalyzer,
    MeanSignSteganalyzer,
    ExplicitSetSteganalyzer,
    TypeClassSteganalyzer,
    CompositeSteganalyzer,
    enumerate_permissible,
    count_sum_permissible,
    lift_memoryless,
    vacuous,
    compose,
    brute_force_permissible,
)
from .channel import (
    DMC,
    GaussianChannel,
    BlockKernel,
    StegoChannel,
    product_extend,
    compose_kernels,
    negation_attack,
    sample,
    load_dmc,
    kernel_from_spec,
)
from .capacity import (
    CapacityResult,
    ChannelCapacity,
    noiseless_secure_capacity,
    permissible_set_upper_bound,
    strong_converse_probe,
    dmsc_noiseless_capacity,
    awgn_secure_capacity,
    empirical_dist_capacity,
    cachin_capacity,
    dmsc_secure_capacity,
    secure_input_test,
    monotonicity_check,
)
from .spectrum import (
    IIDSource,
    BlockSource,
    UniformSource,
    GaussianSource,
    entropy_spectrum,
    information_spectrum,
    outage,
    outage_curve,
    ks_distance,
    spectral_inequality_check,
)
from .coding import (
    Code,
    SimResult,
    error_probability,
    detection_probability,
    evaluate_code,
    feinstein_code,
    awgn_experiment,
    sphere_packing_count,
    two_noise_demo,
)

__version__ = "0.1.0"

__all__ = [
    "StegcapError",
    "ValidationError",
    "BudgetExceededError",
    "DomainError",
    "Distribution",
    "JointDistribution",
    "TypeVector",
    "entropy",
    "binary_entropy",
    "mutual_information",
    "kl_divergence",
    "information_density",
    "type_class_size",
    "stirling_slack",
    "type_class_entropy_bounds",
    "iter_types",
    "nearest_type",
    "PermissibleSet",
    "Steganalyzer",
    "SumSteganalyzer",
    "MemorylessSteganalyzer",
    "VarianceSteganalyzer",
    "MeanSignSteganalyzer",
    "ExplicitSetSteganalyzer",
    "TypeClassSteganalyzer",
    "CompositeSteganalyzer",
    "enumerate_permissible",
    "count_sum_permissible",
    "lift_memoryless",
    "vacuous",
    "compose",
    "brute_force_permissible",
    "DMC",
    "GaussianChannel",
    "BlockKernel",
    "StegoChannel",
    "product_extend",
    "compose_kernels",
    "negation_attack",
    "sample",
    "load_dmc",
    "kernel_from_spec",
    "CapacityResult",
    "ChannelCapacity",
    "noiseless_secure_capacity",
    "permissible_set_upper_bound",
    "strong_converse_probe",
    "dmsc_noiseless_capacity",
    "awgn_secure_capacity",
    "empirical_dist_capacity",
    "cachin_capacity",
    "dmsc_secure_capacity",
    "secure_input_test",
    "monotonicity_check",
    "IIDSource",
    "BlockSource",
    "UniformSource",
    "GaussianSource",
    "entropy_spectrum",
    "information_spectrum",
    "outage",
    "outage_curve",
    "ks_distance",
    "spectral_inequality_check",
    "Code",
    "SimResult",
    "error_probability",
    "detection_probability",
    "evaluate_code",
    "feinstein_code",
    "awgn_experiment",
    "sphere_packing_count",
    "two_noise_demo",
]
