"""Cross-fit doubly robust estimation of the expected conditional covariance."""

__version__ = "0.1.0"

from .bandwidths import (
    AdaptiveKnn10,
    BandwidthRule,
    FixedBandwidth,
    KnnLogN,
    MinimaxCda,
    MseOptimalCda,
    SuboptCda,
    UndersmoothedLpr,
    midpoint_eps,
    resolve_bandwidth,
)
from .datagen import (
    DgpSpec,
    HolderFunctionSpec,
    build_holder_function,
    doppler,
    gen_doppler_dataset,
    gen_holder_dataset,
)
from .dataset import Dataset, read_csv, write_csv
from .estimators import (
    EccEstimate,
    ThreeFoldSplit,
    cycle_folds_average,
    dcdr_estimate,
    eif_values,
    equal_split,
    plugin_estimate,
    scdr_estimate,
)
from .inference import (
    StandardizedStat,
    limiting_variance_oracle,
    qq_points,
    standardize,
    wald_interval,
)
from .kernels import (
    KernelSpec,
    box_indicator,
    build_higher_order_kernel,
    epanechnikov,
    eval_kernel,
)
from .regressors import (
    CenteredForestRegressor,
    DensityAdaptedKernelRegressor,
    GlobalMeanRegressor,
    KnnRegressor,
    LocalPolynomialRegressor,
    OracleRegressor,
)
