"""Video containers, Bayer mosaicing/demosaicing and PSNR.

Videos are numpy arrays indexed ``(i, j, k)``: row, column, frame.  A
:class:`ColorVideo` bundles three such cubes.  Mosaic images and mosaic
videos are plain arrays whose first two axes are the sensor grid.
"""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve

from .errors import DimensionError

# offsets of R, G1, G2, B inside the 2x2 cell for each supported phase
BAYER_LAYOUTS = {
    "RGGB": ((0, 0), (0, 1), (1, 0), (1, 1)),
    "BGGR": ((1, 1), (0, 1), (1, 0), (0, 0)),
    "GRBG": ((0, 1), (0, 0), (1, 1), (1, 0)),
    "GBRG": ((1, 0), (0, 0), (1, 1), (0, 1)),
}

_CROSS = np.array([[0.0, 1.0, 0.0], [1.0, 4.0, 1.0], [0.0, 1.0, 0.0]])
_BOX = np.array([[1.0, 2.0, 1.0], [2.0, 4.0, 2.0], [1.0, 2.0, 1.0]])


@dataclass
class ColorVideo:
    """Three equally shaped ``(n_x, n_y, n_t)`` cubes."""

    r: np.ndarray
    g: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.g = np.asarray(self.g, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        if not (self.r.shape == self.g.shape == self.b.shape) or self.r.ndim != 3:
            raise DimensionError(
                f"channel shapes differ or are not 3-D: {self.r.shape}, {self.g.shape}, {self.b.shape}"
            )

    @property
    def shape(self):
        return self.r.shape

    def stack(self):
        """Return an ``(n_x, n_y, n_t, 3)`` array."""
        return np.stack([self.r, self.g, self.b], axis=-1)

    @classmethod
    def from_stack(cls, arr):
        arr = np.asarray(arr, dtype=float)
        if arr.ndim != 4 or arr.shape[-1] != 3:
            raise DimensionError(f"expected (n_x, n_y, n_t, 3), got {arr.shape}")
        return cls(arr[..., 0], arr[..., 1], arr[..., 2])

    @classmethod
    def gray(cls, cube):
        cube = np.asarray(cube, dtype=float)
        return cls(cube, cube.copy(), cube.copy())

    def luminance(self):
        return (self.r + self.g + self.b) / 3.0


@dataclass
class PsnrReport:
    per_frame: np.ndarray
    mean: float
    peak: float

    def rows(self):
        """CSV rows ``(frame, psnr_db)``; the last row carries the mean."""
        out = [(str(k), _fmt_db(v)) for k, v in enumerate(self.per_frame)]
        out.append(("mean", _fmt_db(self.mean)))
        return out


def _fmt_db(v):
    return "inf" if np.isinf(v) else f"{v:.6f}"


def _check_even(shape):
    if len(shape) < 2 or shape[0] % 2 or shape[1] % 2:
        raise DimensionError(f"Bayer operations need even spatial dims, got {tuple(shape[:2])}")


def _layout(pattern):
    try:
        return BAYER_LAYOUTS[pattern.upper()]
    except KeyError:
        raise ValueError(f"unknown Bayer layout {pattern!r}; choose from {sorted(BAYER_LAYOUTS)}") from None


def bayer_masks(shape, pattern="RGGB"):
    """Boolean sampling masks (R, G, B) for a sensor of ``shape``."""
    _check_even(shape)
    (ri, rj), (g1i, g1j), (g2i, g2j), (bi, bj) = _layout(pattern)
    masks = np.zeros((3,) + tuple(shape[:2]), dtype=bool)
    masks[0, ri::2, rj::2] = True
    masks[1, g1i::2, g1j::2] = True
    masks[1, g2i::2, g2j::2] = True
    masks[2, bi::2, bj::2] = True
    return masks


def rgb_to_bayer(cv, pattern="RGGB"):
    """Mosaic every frame of ``cv``; returns an ``(n_x, n_y, n_t)`` array."""
    n_x, n_y, _ = cv.shape
    mr, mg, mb = bayer_masks((n_x, n_y), pattern)
    return (
        cv.r * mr[..., None]
        + cv.g * mg[..., None]
        + cv.b * mb[..., None]
    )


def split_bayer(m, pattern="RGGB"):
    """Split a mosaic (any trailing axes) into its R, G1, G2, B sub-grids."""
    m = np.asarray(m)
    _check_even(m.shape)
    return tuple(m[i::2, j::2].copy() for i, j in _layout(pattern))


def merge_bayer(channels, pattern="RGGB"):
    """Inverse of :func:`split_bayer`."""
    channels = [np.asarray(c) for c in channels]
    if len(channels) != 4 or len({c.shape for c in channels}) != 1:
        raise DimensionError("merge_bayer needs four equally shaped channel arrays")
    shape = (2 * channels[0].shape[0], 2 * channels[0].shape[1]) + channels[0].shape[2:]
    out = np.empty(shape, dtype=np.result_type(*channels))
    for (i, j), c in zip(_layout(pattern), channels):
        out[i::2, j::2] = c
    return out


def demosaic(m, pattern="RGGB"):
    """Bilinear demosaicing of one mosaic frame with edge replication.

    Missing samples are the normalized average of same-colour neighbours in
    the 3x3 window, which reduces to the textbook bilinear kernels in the
    interior.  Returns an ``(n_x, n_y, 3)`` array.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise DimensionError(f"demosaic expects a 2-D mosaic, got {m.shape}")
    masks = bayer_masks(m.shape, pattern).astype(float)
    out = np.empty(m.shape + (3,))
    for c, kernel in enumerate((_BOX, _CROSS, _BOX)):
        num = convolve(m * masks[c], kernel, mode="nearest")
        den = convolve(masks[c], kernel, mode="nearest")
        out[..., c] = np.where(masks[c] > 0, m, num / den)
    return out


def demosaic_video(mv, pattern="RGGB"):
    """Demosaic an ``(n_x, n_y, n_t)`` mosaic video into a :class:`ColorVideo`."""
    mv = np.asarray(mv, dtype=float)
    if mv.ndim != 3:
        raise DimensionError(f"expected a mosaic video (n_x, n_y, n_t), got {mv.shape}")
    frames = np.stack([demosaic(mv[:, :, k], pattern) for k in range(mv.shape[2])], axis=2)
    return ColorVideo.from_stack(frames)


def psnr(a, b, peak=1.0, frame_axis=2):
    """Per-frame PSNR in dB; identical frames give ``inf``.

    All axes other than ``frame_axis`` are pooled into the MSE, so colour
    videos may be passed as ``(n_x, n_y, n_t, 3)`` arrays.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionError(f"psnr inputs differ in shape: {a.shape} vs {b.shape}")
    if peak <= 0:
        raise ValueError("peak must be positive")
    if a.ndim == 2:
        a, b = a[..., None], b[..., None]
        frame_axis = 2
    diff = np.moveaxis(a - b, frame_axis, 0).reshape(a.shape[frame_axis], -1)
    mse = np.mean(diff**2, axis=1)
    with np.errstate(divide="ignore"):
        per_frame = np.where(mse > 0, 10.0 * np.log10(peak**2 / np.where(mse > 0, mse, 1.0)), np.inf)
    return PsnrReport(per_frame=per_frame, mean=float(np.mean(per_frame)), peak=float(peak))
