"""Services: divergence covering, Neyman-Pearson testing, converse bounds, channel simulation, export, self-checks."""

from perm_converse.services.simplex_covering import (
    ProbVec,
    Grid1D,
    GridK,
    kl_div,
    chi2_div,
    llr_moments,
    kl_div_matrix,
    nearest_center,
    lambda_1d,
    lambda_2d,
    lambda_k,
    covering_number_upper,
    covering_tau,
    verify_radius,
    max_log_ratio_gap,
)
from perm_converse.services.np_testing import (
    BscChannel,
    NPThreshold,
    TrimmedMixture,
    BayesMixture,
    log_binom_pmf,
    binom_pmf_vector,
    binom_cdf,
    np_threshold,
    trimmed_mixture,
    bsc_log_beta,
    bsc_beta,
    bsc_weight_laws,
    bsc_outcome_laws,
    np_beta_bruteforce,
    build_bayes_mixture,
    bsc_bayes_mixture,
    mixture_log_law,
    generic_log_beta_small,
)
from perm_converse.services.bounds import (
    BoundKind,
    BoundCurve,
    CurvePoint,
    VarianceBracket,
    MomentTriple,
    MakurTerms,
    exact_converse_rate,
    variance_bracket,
    dispersion,
    normal_approx_rate,
    third_order_rate,
    general_asymptotic_upper,
    binomial_entropy,
    makur_rate,
    berry_esseen_log_beta_lb,
    chebyshev_log_beta_lb,
    lower_bounds_in_order,
    moment_triple,
    bsc_moment_triple,
    bound_curve,
    bound_curves,
)
from perm_converse.services.channel_sim import (
    Decoder,
    Message,
    SimCodebook,
    SimResult,
    two_message_codebook,
    decode,
    output_laws,
    simulate,
    permutation_invariance_check,
    random_permuter,
    identity_permuter,
)
from perm_converse.services.export import (
    format_grid_csv,
    format_curves_csv,
    format_sim_json,
    write_grid_csv,
    write_curves_csv,
    write_sim_json,
)
from perm_converse.services.oracles import (
    OracleCheck,
    verify_np,
    verify_covering,
    verify_lemma2,
    run_oracles,
)

__all__ = [
    "ProbVec",
    "Grid1D",
    "GridK",
    "kl_div",
    "chi2_div",
    "llr_moments",
    "kl_div_matrix",
    "nearest_center",
    "lambda_1d",
    "lambda_2d",
    "lambda_k",
    "covering_number_upper",
    "covering_tau",
    "verify_radius",
    "max_log_ratio_gap",
    "BscChannel",
    "NPThreshold",
    "TrimmedMixture",
    "BayesMixture",
    "log_binom_pmf",
    "binom_pmf_vector",
    "binom_cdf",
    "np_threshold",
    "trimmed_mixture",
    "bsc_log_beta",
    "bsc_beta",
    "bsc_weight_laws",
    "bsc_outcome_laws",
    "np_beta_bruteforce",
    "build_bayes_mixture",
    "bsc_bayes_mixture",
    "mixture_log_law",
    "generic_log_beta_small",
    "BoundKind",
    "BoundCurve",
    "CurvePoint",
    "VarianceBracket",
    "MomentTriple",
    "MakurTerms",
    "exact_converse_rate",
    "variance_bracket",
    "dispersion",
    "normal_approx_rate",
    "third_order_rate",
    "general_asymptotic_upper",
    "binomial_entropy",
    "makur_rate",
    "berry_esseen_log_beta_lb",
    "chebyshev_log_beta_lb",
    "lower_bounds_in_order",
    "moment_triple",
    "bsc_moment_triple",
    "bound_curve",
    "bound_curves",
    "Decoder",
    "Message",
    "SimCodebook",
    "SimResult",
    "two_message_codebook",
    "decode",
    "output_laws",
    "simulate",
    "permutation_invariance_check",
    "random_permuter",
    "identity_permuter",
    "format_grid_csv",
    "format_curves_csv",
    "format_sim_json",
    "write_grid_csv",
    "write_curves_csv",
    "write_sim_json",
    "OracleCheck",
    "verify_np",
    "verify_covering",
    "verify_lemma2",
    "run_oracles",
]
