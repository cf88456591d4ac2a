"""privbandit: privacy-vs-performance benchmarking for shared transition matrices.

Simulates latent-bandit recommendation on anonymized user transition
matrices, attacks the released records with a scoreboard linkage adversary,
and scores the trade-off between regret and de-anonymization probability
alongside a nearest-record identifiability metric.
"""

__version__ = "0.1.0"
