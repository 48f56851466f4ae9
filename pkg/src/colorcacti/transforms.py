"""Orthonormal 1-D bases (Daubechies wavelets, DCT-II), their separable 3-D
composition, and the projected sensing operator ``Psi = H (F_t x F_y x F_x)``.

A basis is described by its synthesis matrix ``F`` (columns are atoms); the
forward transform returns coefficients ``F^T v``.
"""

from dataclasses import dataclass, field
from functools import cached_property
from math import comb

import numpy as np
import scipy.fft

from .errors import DimensionError, ParameterError
from .forward import MaskStack, apply_H, apply_H_adjoint, unvec, vec


def daubechies_filter(taps=8):
    """Minimum-phase Daubechies scaling filter with ``taps`` coefficients.

    Built by spectral factorization of the maximally flat half-band
    polynomial; ``taps=8`` gives 4 vanishing moments.
    """
    if taps < 2 or taps % 2:
        raise ParameterError(f"Daubechies filter length must be even and >= 2, got {taps}")
    p = taps // 2
    poly = [comb(p - 1 + k, k) for k in range(p)]
    q = np.array([1.0 + 0j])
    for y in np.roots(poly[::-1]) if p > 1 else []:
        zs = np.roots([1.0, -(2.0 - 4.0 * y), 1.0])
        q = np.convolve(q, [1.0, -zs[np.argmin(np.abs(zs))]])
    h = np.array([1.0])
    for _ in range(p):
        h = np.convolve(h, [1.0, 1.0])
    h = np.convolve(h, q).real
    return h * (np.sqrt(2.0) / h.sum())


def _qmf(h):
    g = h[::-1].copy()
    g[1::2] *= -1
    return g


def dwt_forward(v, levels, taps=8):
    """Periodic orthonormal DWT of a 1-D signal.

    Output order: ``[scaling | detail level L | ... | detail level 1]``.
    """
    v = np.asarray(v, dtype=float)
    n = v.shape[0]
    if v.ndim != 1 or n == 0 or n % (1 << levels):
        raise DimensionError(f"length {v.shape} not divisible by 2^{levels}")
    h = daubechies_filter(taps)
    g = _qmf(h)
    out = v.copy()
    approx = v
    for lev in range(levels):
        m = approx.shape[0]
        idx = (2 * np.arange(m // 2)[:, None] + np.arange(h.size)[None, :]) % m
        a = approx[idx] @ h
        d = approx[idx] @ g
        out[m // 2:m] = d
        approx = a
    out[:approx.shape[0]] = approx
    return out


def dwt_inverse(c, levels, taps=8):
    """Inverse of :func:`dwt_forward`."""
    c = np.asarray(c, dtype=float)
    n = c.shape[0]
    if c.ndim != 1 or n == 0 or n % (1 << levels):
        raise DimensionError(f"length {c.shape} not divisible by 2^{levels}")
    h = daubechies_filter(taps)
    g = _qmf(h)
    m = n >> levels
    approx = c[:m].copy()
    for _ in range(levels):
        d = c[m:2 * m]
        out = np.zeros(2 * m)
        idx = (2 * np.arange(m)[:, None] + np.arange(h.size)[None, :]) % (2 * m)
        np.add.at(out, idx, approx[:, None] * h[None, :] + d[:, None] * g[None, :])
        approx = out
        m *= 2
    return approx


def dct_forward(v):
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        raise DimensionError("DCT of an empty vector")
    return scipy.fft.dct(v, type=2, norm="ortho", axis=0)


def dct_inverse(c):
    c = np.asarray(c, dtype=float)
    if c.size == 0:
        raise DimensionError("inverse DCT of an empty vector")
    return scipy.fft.idct(c, type=2, norm="ortho", axis=0)


def _apply_along(mat, arr, axis):
    return np.moveaxis(np.tensordot(mat, arr, axes=(1, axis)), 0, axis)


@dataclass(frozen=True)
class Basis1D:
    """One axis basis.

    ``kind`` is ``"db8"`` (Daubechies wavelet, ``taps`` long filter, ``levels``
    decomposition levels) or ``"dct"`` (orthonormal DCT-II over the whole axis,
    or over consecutive blocks of length ``block``).
    """

    kind: str
    n: int
    levels: int = 3
    taps: int = 8
    block: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise DimensionError("basis length must be positive")
        if self.kind == "db8":
            if self.n % (1 << self.levels):
                raise DimensionError(
                    f"wavelet axis of length {self.n} is not divisible by 2^{self.levels}"
                )
        elif self.kind == "dct":
            if self.block is not None and (self.block < 1 or self.n % self.block):
                raise DimensionError(f"DCT block {self.block} does not tile length {self.n}")
        else:
            raise ParameterError(f"unknown basis kind {self.kind!r}; use 'db8' or 'dct'")

    @cached_property
    def synthesis(self):
        """Dense orthonormal ``F`` (n x n); columns are the basis atoms."""
        if self.kind == "db8":
            eye = np.eye(self.n)
            F = np.column_stack([dwt_inverse(eye[:, c], self.levels, self.taps) for c in range(self.n)])
        else:
            P = self.block or self.n
            D = scipy.fft.idct(np.eye(P), type=2, norm="ortho", axis=0)
            F = np.kron(np.eye(self.n // P), D)
        F.setflags(write=False)
        return F

    def forward(self, arr, axis=0):
        arr = np.asarray(arr, dtype=float)
        if arr.shape[axis] != self.n:
            raise DimensionError(f"axis {axis} has length {arr.shape[axis]}, basis expects {self.n}")
        return _apply_along(self.synthesis.T, arr, axis)

    def inverse(self, arr, axis=0):
        arr = np.asarray(arr, dtype=float)
        if arr.shape[axis] != self.n:
            raise DimensionError(f"axis {axis} has length {arr.shape[axis]}, basis expects {self.n}")
        return _apply_along(self.synthesis, arr, axis)

    def sparse_atoms(self):
        """CSR-style ``(ptr, idx, val)`` listing the nonzero support of every atom."""
        F = self.synthesis
        ptr = [0]
        idx, val = [], []
        for c in range(self.n):
            nz = np.flatnonzero(F[:, c])
            idx.append(nz)
            val.append(F[nz, c])
            ptr.append(ptr[-1] + nz.size)
        return (
            np.asarray(ptr, dtype=np.intp),
            np.concatenate(idx).astype(np.intp),
            np.concatenate(val).astype(float),
        )


@dataclass(frozen=True)
class Transform3D:
    """Separable 3-D transform ``theta = (F_t^T x F_y^T x F_x^T) vec(z)``."""

    bx: Basis1D
    by: Basis1D
    bt: Basis1D

    @property
    def shape(self):
        return (self.bx.n, self.by.n, self.bt.n)

    @property
    def size(self):
        return self.bx.n * self.by.n * self.bt.n

    def _check(self, cube):
        cube = np.asarray(cube, dtype=float)
        if cube.shape != self.shape:
            raise DimensionError(f"cube {cube.shape} does not match transform {self.shape}")
        return cube

    def forward_cube(self, z):
        z = self._check(z)
        return self.bt.forward(self.by.forward(self.bx.forward(z, 0), 1), 2)

    def inverse_cube(self, theta):
        theta = self._check(theta)
        return self.bt.inverse(self.by.inverse(self.bx.inverse(theta, 0), 1), 2)

    def forward(self, x):
        """Flat (vec-ordered) video -> flat coefficients."""
        return vec(self.forward_cube(unvec(x, self.shape)))

    def inverse(self, theta):
        return vec(self.inverse_cube(unvec(theta, self.shape)))


def transform3d_forward(z, t):
    return t.forward_cube(z)


def transform3d_inverse(theta, t):
    return t.inverse_cube(theta)


def make_transform(shape, basis=("db8", "db8", "dct"), levels=3, taps=8, block=None):
    """Build a :class:`Transform3D` from per-axis basis names."""
    bases = []
    for n, kind in zip(shape, basis):
        if kind == "db8":
            bases.append(Basis1D("db8", n, levels=levels, taps=taps))
        else:
            bases.append(Basis1D("dct", n, block=block))
    return Transform3D(*bases)


@dataclass
class PsiOperator:
    """Matrix-free ``Psi = H F`` for one mask stack and one 3-D transform.

    Column ``i = ix + n_x (iy + n_y it)`` of ``Psi`` is the image
    ``fx[:, ix] fy[:, iy]^T * M[it]`` where ``M[it] = sum_k F_t[k, it] Phi_k``
    is the temporally modulated mask; the sweep kernels use that factorization.
    """

    masks: MaskStack
    transform: Transform3D
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.masks.shape != self.transform.shape:
            raise DimensionError(
                f"mask stack {self.masks.shape} and transform {self.transform.shape} disagree"
            )

    @property
    def shape(self):
        return self.transform.shape

    @property
    def n_coeffs(self):
        return self.transform.size

    @property
    def n_meas(self):
        return self.masks.n_pixels

    def apply(self, theta):
        return apply_H(self.transform.inverse(theta), self.masks)

    def adjoint(self, y):
        return self.transform.forward(apply_H_adjoint(y, self.masks))

    @property
    def modulated_masks(self):
        """``(n_t, n_x, n_y)`` array with ``M[it] = sum_k F_t[k, it] Phi_k``."""
        if "mod" not in self._cache:
            Ft = self.transform.bt.synthesis
            mod = np.einsum("ijk,kt->tij", self.masks.frames, Ft)
            self._cache["mod"] = np.ascontiguousarray(mod)
        return self._cache["mod"]

    def column_sq_norms(self):
        """``||Psi e_i||^2`` for every coefficient, in vec order."""
        if "colnorm" not in self._cache:
            Fx2 = self.transform.bx.synthesis ** 2
            Fy2 = self.transform.by.synthesis ** 2
            M2 = self.modulated_masks ** 2
            cube = np.einsum("xa,txy,yb->abt", Fx2, M2, Fy2)
            self._cache["colnorm"] = vec(cube)
        return self._cache["colnorm"]

    def atoms(self):
        if "atoms" not in self._cache:
            self._cache["atoms"] = (self.transform.bx.sparse_atoms(), self.transform.by.sparse_atoms())
        return self._cache["atoms"]


def apply_Psi(theta, masks, transform):
    return PsiOperator(masks, transform).apply(theta)


def apply_Psi_adjoint(y, masks, transform):
    return PsiOperator(masks, transform).adjoint(y)


def psi_column_sq_norms(masks, transform):
    return PsiOperator(masks, transform).column_sq_norms()
