"""Low-rank tensor completion via tensor-train matricizations.

Core objects: DenseTensor and ObservationMask; solvers silrtc/tmac and
their leading-split (tt/square) variants; ket augmentation for images;
synthetic generators and recovery metrics. The ``ttc`` console script
exposes the experiment protocols.
"""

from .augment import KaLayout, ka_forward, ka_inverse, ka_mask
from .errors import (
    DegenerateInputError,
    FormatError,
    NumericError,
    ParameterError,
    ShapeError,
    TtcError,
)
from .linalg import SvdFactors, nuclear_norm, pinv, svd, svt
from .mask import ObservationMask
from .metrics import (
    PhaseDiagram,
    phase_grid,
    rse,
    split_entropies,
    tt_rank_profile,
    tucker_rank_profile,
    vn_entropy,
)
from .solvers import (
    ALGORITHMS,
    CompletionReport,
    SolverConfig,
    WeightScheme,
    init_tensor,
    make_weights,
    run_algorithm,
    silrtc,
    silrtc_tt,
    tmac,
    tmac_tt,
)
from .synth import (
    TtCores,
    gen_mask,
    gen_tt_cores,
    gen_tt_tensor,
    gen_tucker_tensor,
    sample_image,
    text_mask,
)
from .tensor import (
    DenseTensor,
    Matricization,
    element_offset,
    fold,
    frobenius_norm,
    inner_product,
    matricize_mode_n,
    matricize_tt,
    mode_n_product,
    offset_to_index,
)

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "CompletionReport",
    "DegenerateInputError",
    "DenseTensor",
    "FormatError",
    "KaLayout",
    "Matricization",
    "NumericError",
    "ObservationMask",
    "ParameterError",
    "PhaseDiagram",
    "ShapeError",
    "SolverConfig",
    "SvdFactors",
    "TtCores",
    "TtcError",
    "WeightScheme",
    "element_offset",
    "fold",
    "frobenius_norm",
    "gen_mask",
    "gen_tt_cores",
    "gen_tt_tensor",
    "gen_tucker_tensor",
    "init_tensor",
    "inner_product",
    "ka_forward",
    "ka_inverse",
    "ka_mask",
    "make_weights",
    "matricize_mode_n",
    "matricize_tt",
    "mode_n_product",
    "nuclear_norm",
    "offset_to_index",
    "phase_grid",
    "pinv",
    "rse",
    "run_algorithm",
    "sample_image",
    "silrtc",
    "silrtc_tt",
    "split_entropies",
    "svd",
    "svt",
    "text_mask",
    "tmac",
    "tmac_tt",
    "tt_rank_profile",
    "tucker_rank_profile",
    "vn_entropy",
]
