from .types import (
    ComplexCsiFrame,
    DatasetManifest,
    ManifestEntry,
    NormStats,
    SceneState,
    SPLITS,
)
from .csi import amplitude, normalize, denormalize, compute_norm_stats, refresh_stats
from .splits import split_counts, split_dataset
from .io import (
    amplitude_matrix,
    image_array,
    import_csv,
    load_amplitude,
    load_csi_frame,
    load_image,
    load_manifest,
    load_png,
    read_csif,
    save_manifest,
    save_png,
    write_csif,
)
from .synthetic import (
    PathModel,
    SyntheticConfig,
    describe_state,
    generate_synthetic,
    multipath_response,
    render_scene,
)

__all__ = [
    "ComplexCsiFrame",
    "DatasetManifest",
    "ManifestEntry",
    "NormStats",
    "SceneState",
    "SPLITS",
    "amplitude",
    "normalize",
    "denormalize",
    "compute_norm_stats",
    "refresh_stats",
    "split_counts",
    "split_dataset",
    "amplitude_matrix",
    "image_array",
    "import_csv",
    "load_amplitude",
    "load_csi_frame",
    "load_image",
    "load_manifest",
    "load_png",
    "read_csif",
    "save_manifest",
    "save_png",
    "write_csif",
    "PathModel",
    "SyntheticConfig",
    "describe_state",
    "generate_synthetic",
    "multipath_response",
    "render_scene",
]
