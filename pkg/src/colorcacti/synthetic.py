"""Synthetic test material: moving-pattern videos and draws from the coefficient prior."""

import numpy as np

from .video import ColorVideo


def moving_pattern_video(n_x=32, n_y=32, n_t=8, seed=0):
    """Gray video in [0, 1]: smooth background, a disk and a square moving by one pixel per frame."""
    rng = np.random.default_rng(seed)
    x = np.arange(n_x)[:, None]
    y = np.arange(n_y)[None, :]
    fx, fy = rng.uniform(0.5, 1.5, size=2)
    phase = rng.uniform(0, 2 * np.pi)
    cx, cy = n_x / 2 + rng.uniform(-2, 2), n_y / 4
    sx, sy = n_x / 5, 3 * n_y / 4
    r = max(2.0, min(n_x, n_y) / 6.5)
    h = max(1.0, min(n_x, n_y) / 12)
    frames = []
    for k in range(n_t):
        bg = 0.3 + 0.2 * np.sin(2 * np.pi * fx * x / n_x + phase) * np.cos(2 * np.pi * fy * y / n_y)
        disk = (x - cx) ** 2 + (y - cy - 2 * k) ** 2 < r**2
        square = (np.abs(x - sx - k) < h) & (np.abs(y - sy) < h)
        frames.append(np.clip(bg + 0.5 * disk + 0.4 * square, 0.0, 1.0))
    return np.stack(frames, axis=2)


def smooth_color_video(n_x=32, n_y=32, n_t=4, seed=0):
    """Slowly varying colour video (no edges), useful for demosaicing checks."""
    rng = np.random.default_rng(seed)
    x = np.arange(n_x)[:, None, None] / n_x
    y = np.arange(n_y)[None, :, None] / n_y
    t = np.arange(n_t)[None, None, :] / max(n_t, 1)
    chans = []
    for _ in range(3):
        a, b, c = rng.uniform(0.3, 1.0, size=3)
        ph = rng.uniform(0, 2 * np.pi)
        chans.append(0.5 + 0.3 * np.sin(2 * np.pi * (a * x + b * y + 0.2 * c * t) + ph))
    return ColorVideo(*chans)


def moving_color_video(n_x=32, n_y=32, n_t=8, seed=0):
    """Colour version of :func:`moving_pattern_video` with per-channel gains."""
    base = moving_pattern_video(n_x, n_y, n_t, seed)
    gains = np.random.default_rng(seed + 1).uniform(0.6, 1.0, size=3)
    return ColorVideo(*(np.clip(g * base, 0.0, 1.0) for g in gains))


def sample_prior(tree, pi1, p1, p0, alpha, rng):
    """Draw ``(z, theta)`` from the tree spike-and-slab prior.

    Roots are always active; level-1 nodes switch on with ``pi1``; deeper
    nodes with ``p1`` or ``p0`` depending on the parent.  Slab standard
    deviation at level ``l`` is ``alpha[l] ** -0.5``.
    """
    level = tree.level
    z = np.zeros(tree.size)
    z[level == 0] = 1.0
    sel = level == 1
    z[sel] = rng.random(sel.sum()) < pi1
    for lvl in range(2, tree.depth + 1):
        sel = level == lvl
        zp = z[tree.parent[sel]]
        z[sel] = rng.random(sel.sum()) < np.where(zp > 0, p1, p0)
    w = rng.normal(size=tree.size) / np.sqrt(np.asarray(alpha)[level])
    return z, z * w
