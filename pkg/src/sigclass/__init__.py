"""Classification of GPS signal reception conditions from dual-polarized
antenna features: data ingestion, geometric ground-truth labeling, synthetic
dataset generation, CART training, and evaluation."""

from .cart import (
    CvReport,
    TreeModel,
    TreeParams,
    best_split,
    extract_features,
    fit,
    gini,
    grid_search,
    kfold_stratified,
    load_model,
    predict,
    save_model,
)
from .evaluate import ConfusionMatrix, EvalReport, compare_partitions, evaluate
from .geometry import GroundTruth, direction_from_az_el, label_condition, los_blocked, reflection_exists
from .ingest import (
    build_dataset,
    pair_receiver_streams,
    parse_channel_csv,
    parse_dataset_csv,
    parse_observation_csv,
    serialize_dataset_csv,
    serialize_observation_csv,
    stratified_subsample,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .scene import Building, Receiver, UrbanScene, load_scene, save_scene
from .synth import Cn0Model, generate_dataset, sample_cn0
from .types import (
    ChannelRecord,
    Dataset,
    FeatureVector,
    LabeledSample,
    ObservationRecord,
    Provenance,
    SignalClass,
)

__version__ = "0.1.0"
