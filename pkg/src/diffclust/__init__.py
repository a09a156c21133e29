"""Clustering of discretely observed diffusion paths with the Markov-operator
distance and three baseline dissimilarities."""

from .basis import OrthonormalBasis, SupportInterval, build_basis, detect_support, eval_basis
from .clustering import (ClusterAssignment, Dendrogram, Ellipse, Embedding2D, classical_mds,
                         cut, ellipsoid_hull, hac_complete)
from .markov import MarkovOperatorMatrix, estimate_operator
from .metrics import DistanceMatrix, d_dtw, d_euc, d_mo, d_sts, distance_matrix, rescale01
from .pipeline import PipelineConfig, emit_outputs, run_panel, run_synthetic
from .sde import (Path, SDEModel, SimulationConfig, invariant_density, make_model,
                  milstein2_step, simulate_path, synthetic_suite)

__version__ = "0.1.0"
