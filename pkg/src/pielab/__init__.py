"""pielab: a simulated ad-RCT laboratory.

Generates randomized ad experiments with known ground truth, computes
causal (ATT, incremental conversions per dollar) and last-click proxy
metrics, fits predictive models that map proxies to RCT-derived
incrementality, evaluates them leave-one-RCT-out with precision-weighted
RMSE, and quantifies threshold-decision disagreement.
"""

from pielab._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
