"""Exact controllability of random graphs and Wigner matrices, and the
eigenvector-structure and small-ball diagnostics around it."""

from .control import (
    ControllabilityVerdict,
    eigvec_dot_profile,
    is_controllable,
    pbh_screen,
    shift_equivalence_check,
    simple_spectrum,
)
from .eigstruct import StructureConstants, classify, is_delocalized, lcd, regularized_lcd, sphere_net
from .exactlin import build_krylov, charpoly_int, is_squarefree, rank_certified, rank_mod_p, rank_rational
from .harness import ExperimentConfig, enumerate_small, run_experiment
from .matgen import (
    AtomDistribution,
    adjacency_wigner_shift,
    certify_nondegeneracy,
    sample_gnp,
    sample_gnpq,
    sample_wigner,
    spectral_norm_event,
)
from .seeding import SeedSpec

__version__ = "0.1.0"
