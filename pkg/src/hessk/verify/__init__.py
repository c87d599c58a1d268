"""Samplers, constants, the definiteness estimate and the inequality suites."""
from .gamma import GammaEstimate, estimate_gamma_uniform
from .ledger import ConstantsLedger, build_ledger
from .report import CheckStats, Record, VerificationReport, reports_to_csv, reports_to_json
from .samplers import (
    make_rng,
    max_feasible_mu,
    random_orthogonal,
    random_skew,
    random_symmetric,
    sample_admissible,
    sample_sigma_slice,
    sample_sigma_slices,
)
from .suites import (
    SUITES,
    ledger_for,
    suite_dconcavity,
    suite_minors,
    suite_prop31_34,
    suite_prop45,
    suite_prop51,
    suite_structural,
    suite_theorem41,
)
