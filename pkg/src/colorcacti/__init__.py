"""Coded-aperture compressive video for colour sensors: simulation and tree-structured Bayesian reconstruction."""

from ._backend import BACKEND
from .errors import (
    CactiError,
    ConfigError,
    DimensionError,
    IngestionError,
    LayoutError,
    NumericalFailure,
    ParameterError,
    ScheduleError,
)
from .forward import (
    MaskStack,
    Measurement,
    NoiseModel,
    apply_H,
    apply_H_adjoint,
    build_mask_stack,
    forward_measure,
    gen_mask,
    horizontal_schedule,
)
from .pipeline import ModelSpec, invert_channel, make_problem
from .transforms import Basis1D, PsiOperator, Transform3D, apply_Psi, psi_column_sq_norms
from .tree import TreeIndex, TreeLayout, build_tree
from .vb import HyperParams, InferenceOptions, Problem, reconstruct, run_inference
from .video import ColorVideo, PsnrReport, demosaic, merge_bayer, psnr, rgb_to_bayer, split_bayer

__version__ = "0.1.0"
