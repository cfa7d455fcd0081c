"""bodymark: deterministic synthetic body-map mark dataset generator."""

from .bodymap import (
    BodyMask,
    RegionPartition,
    SampleDomain,
    build_partition,
    contains,
    default_mask,
    load_mask,
    load_region_map,
    sample_point,
)
from .dataset import (
    DatasetConfig,
    DatasetManifest,
    ScenarioSpec,
    build_basic3,
    build_dataset,
    build_diagnoses,
    build_regions36,
    default_scenario,
    extract_subset,
    load_scenario,
    validate_dataset,
)
from .errors import (
    BodymarkError,
    ConfigurationError,
    GenerationError,
    PngDecodeError,
    SamplingExhaustedError,
)
from .geometry import (
    BezierCurve,
    Point,
    Polyline,
    RandomStream,
    derive_stream,
    eval_bezier,
    flatten,
    sample_in_disk,
)
from .primitives import (
    ClusterParams,
    DashPattern,
    LineParams,
    Primitive,
    PrimitiveKind,
    gen_cluster,
    gen_dashed_line,
    gen_line,
)
from .raster import Canvas, StrokeStyle, composite_template, decode_png, encode_png, render

__version__ = "0.1.0"
