"""Radar image simulation for super-resolution training data.

Synthesizes FMCW MIMO radar frames of procedural scenes, renders input and
angle-enhanced ("super-radar") image pairs, maps super images to reflection
probabilities, and scores reflection detection with precision/recall.
"""

from superradar.config import RadarConfig, load_config, reference_config
from superradar.dsp import RadarImage, process_frame, to_cartesian
from superradar.evaluation import precision_recall_ap
from superradar.groundtruth import SigmaModel, boost_loss, partition_pixels, probability_map
from superradar.pairs import generate_pair, upscale_config
from superradar.scene import Scene, generate_procedural_scene
from superradar.synthesis import NoiseSpec, synthesize_frame

__version__ = "0.1.0"

__all__ = [
    "NoiseSpec", "RadarConfig", "RadarImage", "Scene", "SigmaModel", "boost_loss",
    "generate_pair", "generate_procedural_scene", "load_config", "partition_pixels",
    "precision_recall_ap", "probability_map", "process_frame", "reference_config",
    "synthesize_frame", "to_cartesian", "upscale_config",
]
