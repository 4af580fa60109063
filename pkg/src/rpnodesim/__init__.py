"""Node similarity under seeded Gaussian random projections of sparse graphs.

The package pairs a projection/embedding pipeline (adjacency or transition
polynomial rows, dot-product or cosine readout) with the closed-form error
theory of those estimators and an experiment harness that verifies the
theory by Monte Carlo and measures its ranking consequences.
"""

__version__ = "0.1.0"

from .errors import (BoundsError, ConfigError, DegenerateError, DomainError,
                     GraphFormatError, NumericError, ResourceLimitError,
                     SamplingError)
from .estimator import GraphRandomProjection, as_sparse_graph
from .graph import (DegreeClassConfig, SparseGraph, degree_classes, from_coo,
                    gamma, generate, load_matrix_market, save_matrix_market,
                    two_hop)
from .projection import (EmbeddingMatrix, ProjectionConfig, embed, embed_rows,
                         export_embedding_csv, load_embedding, normalize_rows,
                         representation_cosine_sample, representation_dot_sample,
                         save_embedding)
from .similarity import (RelevancePair, SimilarityKind, exact_similarity,
                         projected_similarity, relevance_row)
from .experiments import (ExperimentReport, FlipRateResult, MonteCarloResult,
                          NdcgConfig, flip_rate, jl_violation_study,
                          ks_critical, ks_statistic, monte_carlo_similarity,
                          ndcg_at_k, ndcg_experiment, stratum_means,
                          violating_fraction)
from .theory import (FlipProbability, NormalParams, TailBound,
                     cosine_asymptotic, cosine_concentration_bound,
                     dot_a_asymptotic, dot_t_asymptotic, dot_tail_bound,
                     flip_probability, jl_min_q_cosine, jl_min_q_dot,
                     normal_sf, regularized_incomplete_beta,
                     sigma_interval, sign_change_probability, student_t_sf)

__all__ = [name for name in dir() if not name.startswith("_")]
