"""Exact tools for weight systems of cyclic quotient cDV singularities."""
from .weights import (
    DomainError,
    InvalidWeightSystem,
    Weight,
    WeightSystem,
    alpha,
    complement,
    enumerate_N0,
    is_primitive,
    make_weight,
    psi_sets,
    setting_violations,
)
from .series import SeriesSupport, make_support, semiinvariant_monomials, weight_of_f, weight_of_monomial
from .valuation import (
    BetaFailure,
    BetaWitness,
    boundedness_certificate,
    diff,
    find_beta,
    sublevel_bruteforce,
    sublevel_enumerate,
)
from .lemmas import (
    bound_oracle,
    g_weight_lemma_check,
    nc_gamma0_scan,
    nc_hypothesis,
    terminal_conclusion,
    terminal_hypothesis,
    terminal_scan,
)
from .structure import check_cA_structure, check_nonCA_structure, check_structure, match_normal_form
from .families import FAMILY_TAGS, atlas_merge, generate_family, scan_family
from .pipeline import Verdict, classify, verify_all

__version__ = "0.1.0"
