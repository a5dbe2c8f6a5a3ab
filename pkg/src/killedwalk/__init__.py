"""First-passage functionals of mean-zero random walks killed at zero.

Exact lattice dynamic programming, seeded Monte Carlo, corrected diffusion
approximations, and an empirical verification suite for the explicit
inequalities governing them.
"""

from .increments import (
    ContinuousIncrement,
    IncrementModel,
    InvalidDistributionError,
    LatticeIncrement,
    MomentSummary,
    Peakedness,
    charfn,
    lazy_walk,
    moments,
    parse_increment,
    peakedness_V,
    skew_walk,
    span,
    ssrw,
)
from .exact import (
    LadderStats,
    MemoryBudgetError,
    OvershootScan,
    RenewalTable,
    StoppingProfile,
    SurvivalTable,
    expected_min_tau,
    free_pmf,
    ladder_stats,
    overshoot_scan,
    renewal_tables,
    stopping_profile,
    survival_evolve,
    survival_prob,
    tail_prob,
)
from .approx import (
    ApproxTerms,
    BoundEnvelope,
    ales_envelope,
    corollary_envelopes,
    corrected_tail,
    correction_term,
    improved_envelope,
    normal_cdf,
    reflection_term,
    thm1_envelope,
)
from .montecarlo import McConfig, McEstimate, mc_stopping, mc_tail

__version__ = "0.1.0"
