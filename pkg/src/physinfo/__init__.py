"""Pyramid segmentation of grayscale images into multi-level region
descriptions, with knowledgebase-driven scene annotation on top."""

from .annotate import annotate_description, annotate_scene, format_report, match_object
from .codec import PhysicalDescription, compression_report, decode, encode, reconstruct
from .descent import refine_level, run_descent
from .image_io import load_image, save_image
from .kb import KnowledgeBase, load_kb, parse_kb
from .metrics import adjusted_rand_index, boundary_f_measure
from .pipeline import describe_image, segment_image
from .pyramid import Pyramid, build_pyramid
from .segment import LabelMap, SegConfig, segment_top

__version__ = "0.1.0"

__all__ = [
    "KnowledgeBase", "LabelMap", "PhysicalDescription", "Pyramid", "SegConfig",
    "adjusted_rand_index", "annotate_description", "annotate_scene", "boundary_f_measure",
    "build_pyramid", "compression_report", "decode", "describe_image", "encode",
    "format_report", "load_image", "load_kb", "match_object", "parse_kb", "reconstruct",
    "refine_level", "run_descent", "save_image", "segment_image", "segment_top",
]
