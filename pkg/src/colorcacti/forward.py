"""Discrete coded-exposure measurement: shifted binary masks and temporal integration.

Flat vectors follow one convention everywhere: column-major inside a frame
(row index fastest), frames concatenated in order, i.e.
``vec(cube) == cube.ravel(order="F")`` for a cube shaped ``(n_x, n_y, n_t)``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParameterError, ScheduleError


def vec(cube):
    return np.asarray(cube).ravel(order="F")


def unvec(x, shape):
    x = np.asarray(x)
    if x.size != int(np.prod(shape)):
        raise DimensionError(f"vector of length {x.size} cannot hold shape {shape}")
    return x.reshape(shape, order="F")


def gen_mask(m_x, m_y, density=0.5, seed=0):
    """I.i.d. Bernoulli(``density``) binary pattern, reproducible per seed."""
    if not 0.0 < density < 1.0:
        raise ParameterError(f"mask density must lie in (0, 1), got {density}")
    if m_x < 1 or m_y < 1:
        raise ParameterError(f"mask dims must be positive, got {(m_x, m_y)}")
    rng = np.random.default_rng(seed)
    return (rng.random((m_x, m_y)) < density).astype(np.uint8)


def horizontal_schedule(n_t, step=1):
    """Mask slides ``step`` pixels along the column axis per frame."""
    return [(0, step * k) for k in range(n_t)]


@dataclass(frozen=True)
class MaskStack:
    """Immutable ``(n_x, n_y, n_t)`` stack of per-frame binary codes."""

    frames: np.ndarray
    schedule: tuple = field(default=())

    def __post_init__(self):
        arr = np.array(self.frames, dtype=float)
        if arr.ndim == 2:
            arr = arr[..., None]
        if arr.ndim != 3:
            raise DimensionError(f"mask stack must be 3-D, got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "frames", arr)
        object.__setattr__(self, "schedule", tuple(tuple(s) for s in self.schedule))

    @property
    def shape(self):
        return self.frames.shape

    @property
    def n_t(self):
        return self.frames.shape[2]

    @property
    def n_pixels(self):
        return self.frames.shape[0] * self.frames.shape[1]

    @classmethod
    def ones(cls, n_x, n_y, n_t):
        return cls(np.ones((n_x, n_y, n_t)))


def build_mask_stack(pattern, schedule, n_x, n_y, wrap=False):
    """Crop ``Phi_k[i, j] = pattern[i + r_k, j + s_k]`` for every scheduled shift.

    With ``wrap`` the pattern is treated as periodic instead of requiring the
    window to fit.
    """
    pattern = np.asarray(pattern)
    if pattern.ndim != 2:
        raise DimensionError(f"mask pattern must be 2-D, got {pattern.shape}")
    m_x, m_y = pattern.shape
    frames = []
    for k, (r, s) in enumerate(schedule, start=1):
        if wrap:
            rows = (np.arange(n_x) + r) % m_x
            cols = (np.arange(n_y) + s) % m_y
            frames.append(pattern[np.ix_(rows, cols)])
            continue
        if r < 0 or s < 0 or r + n_x > m_x or s + n_y > m_y:
            raise ScheduleError(
                f"shift k={k} ({r}, {s}) puts the {n_x}x{n_y} window outside the {m_x}x{m_y} mask"
            )
        frames.append(pattern[r:r + n_x, s:s + n_y])
    if not frames:
        raise ScheduleError("empty shift schedule")
    return MaskStack(np.stack(frames, axis=2), schedule=schedule)


@dataclass
class NoiseModel:
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ParameterError("noise sigma must be non-negative")

    @property
    def kind(self):
        return "none" if self.sigma == 0 else "gaussian"


@dataclass
class Measurement:
    data: np.ndarray
    noise_sigma: float = 0.0


def _integrate(frames, cube):
    # fixed frame-by-frame summation order, so every path gives identical bits
    y = frames[:, :, 0] * cube[:, :, 0]
    for k in range(1, frames.shape[2]):
        y = y + frames[:, :, k] * cube[:, :, k]
    return y


def forward_measure(z, masks, noise=None):
    """``Y = sum_k Phi_k * Z_k`` plus optional i.i.d. Gaussian noise."""
    z = np.asarray(z, dtype=float)
    if z.ndim == 2:
        z = z[..., None]
    if z.shape != masks.shape:
        raise DimensionError(f"video {z.shape} and mask stack {masks.shape} disagree")
    y = _integrate(masks.frames, z)
    sigma = 0.0
    if noise is not None and noise.sigma > 0:
        sigma = noise.sigma
        y = y + np.random.default_rng(noise.seed).normal(0.0, sigma, size=y.shape)
    return Measurement(y, sigma)


def apply_H(x, masks):
    """Matrix-free ``H x`` with ``H = [diag(vec Phi_1), ..., diag(vec Phi_nt)]``."""
    x = np.asarray(x, dtype=float)
    n_x, n_y, n_t = masks.shape
    if x.ndim != 1 or x.size != n_x * n_y * n_t:
        raise DimensionError(f"apply_H expects length {n_x * n_y * n_t}, got {x.shape}")
    cube = x.reshape((n_x, n_y, n_t), order="F")
    return vec(_integrate(masks.frames, cube))


def apply_H_adjoint(y, masks):
    """``H^T y``: frame k of the result is ``Phi_k * Y``."""
    y = np.asarray(y, dtype=float)
    n_x, n_y, _ = masks.shape
    if y.ndim != 1 or y.size != n_x * n_y:
        raise DimensionError(f"apply_H_adjoint expects length {n_x * n_y}, got {y.shape}")
    img = y.reshape((n_x, n_y), order="F")
    return vec(masks.frames * img[..., None])
