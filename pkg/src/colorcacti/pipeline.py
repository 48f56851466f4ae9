"""Glue between transforms, trees and inference: one channel in, one cube out."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .transforms import Basis1D, PsiOperator, Transform3D
from .tree import TreeLayout, build_tree
from .vb import HyperParams, InferenceOptions, Problem, backprojection, reconstruct, run_inference

_LAYOUT_FOR_BASES = {
    ("db8", "db8", "db8"): "wavelet3d",
    ("db8", "db8", "dct"): "hybrid",
    ("dct", "dct", "dct"): "dct-block",
}


@dataclass(frozen=True)
class ModelSpec:
    """Basis per axis plus wavelet depth and filter length."""

    basis: tuple = ("db8", "db8", "dct")
    levels: int = 3
    taps: int = 8

    @property
    def layout_kind(self):
        try:
            return _LAYOUT_FOR_BASES[tuple(self.basis)]
        except KeyError:
            raise ConfigError(
                f"unsupported basis combination {self.basis}; use one of {sorted(_LAYOUT_FOR_BASES)}"
            ) from None

    def transform(self, shape):
        kind = self.layout_kind
        block = (1 << self.levels) if kind == "dct-block" else None
        bases = [
            Basis1D("db8", n, levels=self.levels, taps=self.taps) if b == "db8" else Basis1D("dct", n, block=block)
            for n, b in zip(shape, self.basis)
        ]
        return Transform3D(*bases)

    def tree(self, shape):
        return build_tree(TreeLayout(self.layout_kind, tuple(shape), self.levels))


def make_problem(y, masks, spec=None):
    spec = spec or ModelSpec()
    transform = spec.transform(masks.shape)
    return Problem(y, PsiOperator(masks, transform), spec.tree(masks.shape))


@dataclass
class ChannelResult:
    cube: np.ndarray
    baseline: np.ndarray
    trace: list
    converged: bool


def invert_channel(y, masks, spec=None, opts=None, hyper=None, clamp=True):
    """Invert one measurement image; returns the reconstruction and baseline."""
    problem = make_problem(y, masks, spec)
    hyper = hyper or HyperParams.from_level_counts(problem.tree.level_counts)
    result = run_inference(problem, hyper, opts or InferenceOptions())
    cube = reconstruct(result.theta, problem.op.transform, clamp=clamp)
    base = backprojection(problem)
    if clamp:
        base = np.clip(base, 0.0, 1.0)
    return ChannelResult(cube, base, result.trace, result.converged)
