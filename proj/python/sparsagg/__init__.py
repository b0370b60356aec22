"""Weighted l1-penalized aggregation of dictionaries with oracle diagnostics."""

from ._core import (
    Dictionary,
    SparsaggError,
    __version__,
    bernstein_bound,
    coherence,
    empirical_gram,
    eta,
    fit,
    fit_weights,
    generate,
    kappa,
    kkt_residual,
    lemma_bound,
    membership,
    oracle,
    oracle_fourier,
    population_gram,
    rate,
    run_experiment,
    soft_threshold,
    theorem_rhs,
    validate_dictionary,
)

__all__ = [
    "Dictionary",
    "SparsaggError",
    "__version__",
    "bernstein_bound",
    "coherence",
    "empirical_gram",
    "eta",
    "fit",
    "fit_weights",
    "generate",
    "kappa",
    "kkt_residual",
    "lemma_bound",
    "membership",
    "oracle",
    "oracle_fourier",
    "population_gram",
    "rate",
    "run_experiment",
    "soft_threshold",
    "theorem_rhs",
    "validate_dictionary",
]
