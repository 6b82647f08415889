"""Table structure recovery from skeleton images.

The package generates synthetic table corpora (scan plus divider skeleton plus
ground-truth genotype), estimates an initial table genotype from projection
profiles, refines it with a genetic algorithm against image objectives, and
aggregates structure-error reports.
"""

from .model import (
    DEFAULT_MAX_CARDINALITY,
    MODEL_RESOLUTION,
    PAGE_HEIGHT,
    PAGE_WIDTH,
    PRESETS,
    InfeasibleConfigError,
    PageSpec,
    TableConfig,
    TableGenotype,
    get_preset,
    sample_genotype,
)
from .raster import (
    ImageFormatError,
    RasterImage,
    RenderStyle,
    render_scan,
    render_skeleton,
    resize,
)
from .skeleton_source import (
    DegradationParams,
    SkeletonTarget,
    StubDiscriminator,
    degraded_skeleton,
    load_external_skeleton,
    oracle_skeleton,
)
from .xyinit import InsufficientStructureError, initial_genotype
from .objectives import ObjectiveSpec, fitness, objective_value
from .ga import FitResult, GaParams, crossover, evolve, mutate
from .evaluation import EvalReport, StructureErrors, aggregate, compare
from .dataset import DatasetManifest, generate_dataset, load_manifest

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_MAX_CARDINALITY",
    "MODEL_RESOLUTION",
    "PAGE_HEIGHT",
    "PAGE_WIDTH",
    "PRESETS",
    "DatasetManifest",
    "DegradationParams",
    "EvalReport",
    "FitResult",
    "GaParams",
    "ImageFormatError",
    "InfeasibleConfigError",
    "InsufficientStructureError",
    "ObjectiveSpec",
    "PageSpec",
    "RasterImage",
    "RenderStyle",
    "SkeletonTarget",
    "StructureErrors",
    "StubDiscriminator",
    "TableConfig",
    "TableGenotype",
    "aggregate",
    "compare",
    "crossover",
    "degraded_skeleton",
    "evolve",
    "fitness",
    "generate_dataset",
    "get_preset",
    "initial_genotype",
    "load_external_skeleton",
    "load_manifest",
    "mutate",
    "objective_value",
    "oracle_skeleton",
    "render_scan",
    "render_skeleton",
    "resize",
    "sample_genotype",
]
