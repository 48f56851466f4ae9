"""Parent/child forest over 3-D transform coefficients.

Every axis carries a dyadic scale label: index ``i`` of an axis with a
scaling band of size ``b`` has scale 0 when ``i < b`` and
``bit_length(i // b)`` otherwise.  For a wavelet axis with ``L`` levels,
``b = n / 2^L``; a DCT axis is banded ``{0}, {1}, {2, 3}, {4..7}, ...``
(``b = 1``), optionally inside blocks.  A coefficient's level is the largest
of its three axis scales, so the scaling block is level 0.

Linkage: a root ``(i, j, t)`` owns the 7 children obtained by adding the
scaling-band sizes ``(b_x, b_y, b_t)`` to any non-empty subset of its
coordinates; any other node ``(i, j, t)`` owns ``(2i + a, 2j + b, 2t + c)``
for ``a, b, c`` in ``{0, 1}``.  Children falling outside an axis (which only
happens when axes have different depths) are dropped.
"""

from dataclasses import dataclass
import numpy as np

from .errors import LayoutError

LAYOUT_KINDS = ("wavelet3d", "dct-block", "hybrid")


@dataclass(frozen=True)
class AxisBands:
    """Dyadic banding of one axis: ``n`` samples in blocks of ``block``."""

    n: int
    b: int
    block: int

    @property
    def depth(self):
        return int(self.block // self.b).bit_length() - 1

    def scales(self):
        local = np.arange(self.n) % self.block
        q = local // self.b
        # frexp exponent == bit_length for q >= 1; the scaling band (q == 0) maps to 0
        return np.frexp(q.astype(float))[1].astype(np.intp)


def _is_pow2(n):
    return n >= 1 and n & (n - 1) == 0


@dataclass(frozen=True)
class TreeLayout:
    kind: str
    dims: tuple
    levels: int = 3
    block: int | None = None

    def __post_init__(self):
        if self.kind not in LAYOUT_KINDS:
            raise LayoutError(f"unknown layout {self.kind!r}; choose from {LAYOUT_KINDS}")
        if len(self.dims) != 3 or min(self.dims) < 1:
            raise LayoutError(f"dims must be three positive ints, got {self.dims}")

    def axes(self):
        n_x, n_y, n_t = self.dims
        L = self.levels
        if self.kind == "dct-block":
            P = self.block if self.block is not None else 1 << L
            if P != 1 << L:
                raise LayoutError(f"dct-block needs P = 2^L = {1 << L}, got {P}")
            for n in self.dims:
                if n % P:
                    raise LayoutError(f"axis length {n} is not a multiple of the block size {P}")
            return tuple(AxisBands(n, 1, P) for n in self.dims)

        out = []
        spatial = (n_x, n_y) if self.kind == "hybrid" else (n_x, n_y, n_t)
        for n in spatial:
            if n % (1 << L):
                raise LayoutError(f"axis length {n} is not divisible by 2^{L}")
            out.append(AxisBands(n, n >> L, n))
        if self.kind == "hybrid":
            if not _is_pow2(n_t):
                raise LayoutError(f"hybrid layout needs n_t a power of two, got {n_t}")
            out.append(AxisBands(n_t, 1, n_t))
        return tuple(out)


@dataclass(frozen=True)
class TreeIndex:
    """Immutable forest over the ``N = n_x n_y n_t`` coefficients (vec order).

    ``parent[i] == -1`` marks a root; children of ``i`` are
    ``child_idx[child_ptr[i]:child_ptr[i + 1]]``.
    """

    dims: tuple
    level: np.ndarray
    parent: np.ndarray
    child_ptr: np.ndarray
    child_idx: np.ndarray
    scaling_dims: tuple
    layout: TreeLayout

    @property
    def size(self):
        return self.level.size

    @property
    def depth(self):
        return int(self.level.max())

    @property
    def level_counts(self):
        return np.bincount(self.level, minlength=self.depth + 1)

    def _check(self, idx):
        if not 0 <= idx < self.size:
            raise IndexError(f"coefficient index {idx} outside 0..{self.size - 1}")

    def level_of(self, idx):
        self._check(idx)
        return int(self.level[idx])

    def parent_of(self, idx):
        self._check(idx)
        p = int(self.parent[idx])
        return None if p < 0 else p

    def children_of(self, idx):
        self._check(idx)
        return self.child_idx[self.child_ptr[idx]:self.child_ptr[idx + 1]].tolist()

    def coords(self, idx):
        n_x, n_y, _ = self.dims
        return (idx % n_x, (idx // n_x) % n_y, idx // (n_x * n_y))

    def sweep_order(self):
        """Coarse-to-fine, index-ascending inside a level."""
        return np.argsort(self.level, kind="stable").astype(np.intp)


def build_tree(layout):
    """Construct the :class:`TreeIndex` for ``layout``."""
    axes = layout.axes()
    n_x, n_y, n_t = layout.dims
    grids = np.meshgrid(np.arange(n_x), np.arange(n_y), np.arange(n_t), indexing="ij")
    coords = [g.ravel(order="F") for g in grids]
    scales = [ax.scales()[c] for ax, c in zip(axes, coords)]
    level = np.maximum(np.maximum(scales[0], scales[1]), scales[2]).astype(np.intp)
    N = level.size

    local = [c % ax.block for c, ax in zip(coords, axes)]
    base = [c - loc for c, loc in zip(coords, local)]
    parent_local = []
    for loc, s, ax in zip(local, scales, axes):
        pl = loc // 2
        # level-1 nodes hang off the scaling block by subtracting the band size
        lvl1 = level == 1
        pl = np.where(lvl1, np.where(s == 1, loc - ax.b, loc), pl)
        parent_local.append(pl)
    parent = (base[0] + parent_local[0]) + n_x * ((base[1] + parent_local[1]) + n_y * (base[2] + parent_local[2]))
    parent = np.where(level == 0, -1, parent).astype(np.intp)

    has_parent = parent >= 0
    order = np.argsort(np.where(has_parent, parent, N), kind="stable")
    counts = np.bincount(parent[has_parent], minlength=N)
    child_ptr = np.zeros(N + 1, dtype=np.intp)
    np.cumsum(counts, out=child_ptr[1:])
    child_idx = order[: int(has_parent.sum())].astype(np.intp)

    return TreeIndex(
        dims=tuple(layout.dims),
        level=level,
        parent=parent,
        child_ptr=child_ptr,
        child_idx=child_idx,
        scaling_dims=tuple(ax.b for ax in axes),
        layout=layout,
    )

