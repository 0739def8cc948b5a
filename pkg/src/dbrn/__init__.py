"""Few-shot classification with local-descriptor prototypes, bias-rectify
weighting, multi-scale prototype augmentation and scaled-cosine top-k scoring."""

from .augment import ScaleSet, augmented_prototype, pool_to_grid
from .episodes import (
    Dataset,
    EvalReport,
    Episode,
    ablation_run,
    evaluate,
    generate_toy_dataset,
    sample_episode,
)
from .errors import (
    DBRNError,
    DimensionError,
    FormatError,
    ParameterError,
    ResolutionError,
    SamplingError,
)
from .extractor import (
    ExtractorConfig,
    Image,
    extract,
    load_features,
    resize_image,
    save_features,
)
from .head import (
    HeadConfig,
    Prototype,
    RectifyWeights,
    classify,
    compute_prototype,
    fit_tau,
    rectify_weights,
    similarity,
    tau_gradient,
)
from .heatmap import render_weight_heatmap
from .tensor import FeatureMap, cosine, cosine_matrix, l2_normalize, softmax, top_k_sum

__version__ = "0.1.0"
