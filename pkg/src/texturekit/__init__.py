"""texturekit: structural and statistical texture analysis.

Structural route: Laplacian pyramid + FFT-wedge directional filter
bank, cascaded by :func:`cdm_forward`. Statistical route: similarity
quantization, occupancy counting, histogram rebalancing, and graph
equalization over a region (:func:`tiem_forward`), plus directional
co-occurrence statistics over a full map (:func:`ctiem_forward`).
Regions come from :func:`sample_regions`; distillation losses compare
teacher/student features.
"""

from .cdm import CdmConfig, StructuralFeature, cdm_forward, structural_loss
from .ctiem import (
    Cooccurrence,
    CooccurrenceState,
    adapt_texture,
    cooccur,
    cooccur_count,
    cooccur_denoise,
    cooccur_stat,
    ctiem_forward,
    level_pair_grid,
)
from .dfb import DfbConfig, dfb_decompose, dfb_reconstruct, directional_masks
from .errors import (
    FormatError,
    NumericError,
    ShapeError,
    TextureKitError,
    UnsupportedImageError,
)
from .losses import (
    QclTerms,
    mahalanobis_corr,
    qcl_loss,
    response_kl_loss,
    stat_feature_loss,
    total_loss,
)
from .pyramid import BURT_ADELSON, LpConfig, lp_analyze, lp_synthesize, reflect_pad
from .sampler import RegionSample, SamplerConfig, crop_region, sample_regions, scale_region
from .tensor_io import (
    FeatureMap,
    WeightSet,
    feature_map,
    load_image,
    load_weights,
    read_tensor,
    save_weights,
    write_tensor,
)
from .tiem import (
    CountingMap,
    QuantizationState,
    StatFeature,
    build_stat_feature,
    count_levels,
    denoise,
    equalize,
    quantize,
    self_similarity,
    tiem_forward,
)
from .weights import default_weight_set

__version__ = "0.1.0"

__all__ = [
    "BURT_ADELSON",
    "CdmConfig",
    "Cooccurrence",
    "CooccurrenceState",
    "CountingMap",
    "DfbConfig",
    "FeatureMap",
    "FormatError",
    "LpConfig",
    "NumericError",
    "QclTerms",
    "QuantizationState",
    "RegionSample",
    "SamplerConfig",
    "ShapeError",
    "StatFeature",
    "StructuralFeature",
    "TextureKitError",
    "UnsupportedImageError",
    "WeightSet",
    "adapt_texture",
    "build_stat_feature",
    "cdm_forward",
    "cooccur",
    "cooccur_count",
    "cooccur_denoise",
    "cooccur_stat",
    "count_levels",
    "crop_region",
    "ctiem_forward",
    "default_weight_set",
    "denoise",
    "dfb_decompose",
    "dfb_reconstruct",
    "directional_masks",
    "equalize",
    "feature_map",
    "level_pair_grid",
    "load_image",
    "load_weights",
    "lp_analyze",
    "lp_synthesize",
    "mahalanobis_corr",
    "qcl_loss",
    "quantize",
    "read_tensor",
    "reflect_pad",
    "response_kl_loss",
    "sample_regions",
    "save_weights",
    "scale_region",
    "self_similarity",
    "stat_feature_loss",
    "structural_loss",
    "tiem_forward",
    "total_loss",
    "write_tensor",
]
