"""Degenerate Schur polynomials, Hecke expansions and Satake-parameter statistics on GL(n)."""

from heckestat.symfunc import (
    DegeneratePointError,
    KappaIndex,
    Partition,
    SchurExpansion,
    dimension,
    kappa_dual,
    lr_bruteforce_oracle,
    partition_from_kappa,
    partition_to_kappa,
    reduce_mod_determinant,
    schur_eval_determinant,
    schur_eval_tableaux,
    schur_multiply,
)
from heckestat.hecke import (
    ForcedZeros,
    SatakePoint,
    SyntheticForm,
    coefficient_at_m,
    coefficient_at_prime,
    hecke_product_expansion,
    hecke_square_identity_check,
)
from heckestat.measures import (
    MeasureSpec,
    MonteCarloEstimate,
    mc_integrate,
    plancherel_weight,
    sample_plancherel,
    sample_sato_tate,
    sato_tate_density,
    small_value_measure,
)

__version__ = "0.1.0"
