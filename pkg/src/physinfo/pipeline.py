"""End-to-end physical pipeline: pyramid, top segmentation, descent,
registry and description."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codec import LevelDescription, PhysicalDescription
from .descent import DescentResult, run_descent
from .pyramid import DEFAULT_STOP_THRESHOLD, Pyramid, build_pyramid
from .registry import RegionDescriptor, RelationEdge, compute_topology, describe_levels, link_hierarchy
from .segment import SegConfig, segment_top


@dataclass
class PipelineRun:
    pyramid: Pyramid
    result: DescentResult
    descriptors: list[list[RegionDescriptor]]
    description: PhysicalDescription


def segment_image(img: np.ndarray, cfg: SegConfig = SegConfig(),
                  stop_threshold: int = DEFAULT_STOP_THRESHOLD) -> tuple[Pyramid, DescentResult]:
    pyr = build_pyramid(img, stop_threshold)
    top = segment_top(pyr.top, cfg, pyr.top_level)
    return pyr, run_descent(pyr, top, cfg)


def build_description(pyr: Pyramid, result: DescentResult, cfg: SegConfig) -> tuple[list, PhysicalDescription]:
    """Descriptors for every level plus the document.

    The document keeps level-0 topology and the full hierarchy.  Coarser
    topology follows exactly from the stored bboxes and sizes (see
    ``level_topology``) and would grow quadratically with the many small
    boundary regions of coarse levels.
    """
    descs = describe_levels(result, pyr)
    relations = compute_topology(descs[0]) + link_hierarchy(result)
    h, w = pyr[0].shape
    levels = [LevelDescription(lv, result.labels[lv].labels, descs[lv]) for lv in range(len(descs))]
    return descs, PhysicalDescription(w, h, cfg, pyr.stop_threshold, levels, relations)


def describe_image(img: np.ndarray, cfg: SegConfig = SegConfig(),
                   stop_threshold: int = DEFAULT_STOP_THRESHOLD) -> PipelineRun:
    pyr, result = segment_image(img, cfg, stop_threshold)
    descs, desc = build_description(pyr, result, cfg)
    return PipelineRun(pyr, result, descs, desc)


def level_topology(desc: PhysicalDescription, level: int) -> list[RelationEdge]:
    """left-of / above / contains edges of any level, from its region table."""
    return compute_topology(desc.level(level).regions)
