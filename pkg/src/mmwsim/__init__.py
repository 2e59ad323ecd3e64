"""Millimeter-wave FMCW/SAR imaging simulator.

Pipeline: scene -> point reflectors -> ray-traced channel -> FMCW beat
signals -> range FFT -> digital beamforming -> 3D heat-map, paired with
exact ground-truth depth-maps and perception metrics.
"""

from .channel import ChannelConfig, PathSet, trace_paths
from .config import ArrayConfig, ImagingGrid, SimConfig
from .dataset import Manifest, VariationConfig, generate_dataset, split_kfold
from .geometry import (
    AngularGrid,
    Pose,
    Scene,
    SceneObject,
    TriangleMesh,
    load_mesh,
    load_scene,
    pose_scene,
    spherical_project,
)
from .groundtruth import DepthMap2D, load_depth_map, render_depth, save_depth_map
from .imager import (
    HeatMap3D,
    RadarProjection2D,
    beamform,
    load_heat_map,
    project_top_m,
    projection_to_depth_map,
    save_heat_map,
    simulate_sample,
)
from .perception import (
    MetricsReport,
    SceneAnnotations,
    estimate_box,
    evaluate,
    shape_metrics,
    to_point_cloud,
)
from .rcs import PointReflectorCloud, RcsConfig, build_cloud, cull_occluded, extract_reflectors
from .waveform import BeatSignal, FmcwConfig, RangeProfile, range_fft, synthesize_beat

__version__ = "0.1.0"
