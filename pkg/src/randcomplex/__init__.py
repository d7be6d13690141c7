"""Random simplicial complexes: sampling, collapse, top homology, shadows and their limits."""
from .collapse import c_shadow, collapse_phases, collapse_to_core, rooted_collapse
from .faces import Complex, boundary_matrix, face_rank, face_unrank
from .homology import betti_d, classify_regime, r_shadow, rank_boundary
from .linalg import FAST_PRIME, PRIME, RATIONAL, FieldChoice
from .sampling import SampleConfig, sample
from .thresholds import c_d, gamma_d, regime_densities, t_fixed_point

__all__ = [
    "Complex", "FieldChoice", "SampleConfig", "FAST_PRIME", "PRIME", "RATIONAL",
    "betti_d", "boundary_matrix", "c_d", "c_shadow", "classify_regime", "collapse_phases",
    "collapse_to_core", "face_rank", "face_unrank", "gamma_d", "r_shadow", "rank_boundary",
    "regime_densities", "rooted_collapse", "sample", "t_fixed_point",
]
