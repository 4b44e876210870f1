"""Weighted convolution algebras l^p(G, w) on discrete groups, with
constructive norm-controlled inversion and certified bounds."""

from .groups import (
    EnumerationCaps,
    GroupError,
    GroupModel,
    GrowthReport,
    HeisenbergModel,
    LocallyFiniteModel,
    RadiusCapError,
    SizeCapError,
    ZdModel,
    group_from_config,
    growth_report,
)
from .weights import (
    AuxiliaryFunction,
    ConditionReport,
    CustomProfileWeight,
    LocallyFiniteWeight,
    PolynomialWeight,
    SubexpLogWeight,
    SubexpPowerWeight,
    Weight,
    WeightError,
    build_auxiliary,
    check_growth_condition,
    check_summability,
    check_weight_axioms,
    validate_algebra_condition,
    validate_weak_subadditivity,
    weight_eval,
    weight_from_config,
)
from .algebra import (
    AlgebraElement,
    AlgebraError,
    NormInterval,
    SpectralRadiusReport,
    SupportCapError,
    convolve,
    involute,
    norm_1_sigma,
    norm_p_omega,
    opnorm_estimate,
    spectral_radius_estimate,
    spectral_radius_pair,
)
from .analysis import (
    CertificateError,
    DiffNormReport,
    HolderCertificate,
    NoFeasibleThetaError,
    PipelineResult,
    ProbeReport,
    SumInconclusiveError,
    check_algebra_inequality,
    check_diff_norm,
    conjugate_index,
    estimate_theta,
    holder_alpha,
    necessary_condition_probe,
    pipeline,
    random_element,
)
from .inversion import (
    AsymptoticBound,
    BoundResult,
    CertifiedNorms,
    DidNotConvergeError,
    InversionReport,
    NotCertifiedInvertibleError,
    ResidualReport,
    asymptotic_bound,
    bound_product,
    neumann_invert,
    verify_inverse,
)

__version__ = "0.1.0"
