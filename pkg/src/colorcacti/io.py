"""File formats: PNG frame folders, the raw float container, masks, schedules, CSV.

Raw container layout: one ASCII header line ``CACTI <n_x> <n_y> <n_t> <channels>``
followed by little-endian float32 samples in column-major order (row index
fastest, then column, frame, channel).  This is the same vectorization used
by the measurement operator.
"""

import csv
import re
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import DimensionError, IngestionError
from .video import ColorVideo

_FRAME_RE = re.compile(r"frame_(\d+)\.png$", re.IGNORECASE)
CONTAINER_SUFFIX = ".cacti"


def write_container(path, arr):
    """Write an array of up to 4 dims ``(n_x, n_y, n_t, channels)``."""
    arr = np.asarray(arr, dtype="<f4")
    if arr.ndim > 4:
        raise DimensionError(f"container holds at most 4 dims, got {arr.shape}")
    shape = arr.shape + (1,) * (4 - arr.ndim)
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(("CACTI %d %d %d %d\n" % shape).encode("ascii"))
        fh.write(arr.reshape(shape).tobytes(order="F"))
    return path


def read_container(path):
    """Read a raw container; always returns a 4-D float64 array."""
    path = Path(path)
    if not path.is_file():
        raise IngestionError(f"no such container: {path}")
    with path.open("rb") as fh:
        header = fh.readline().decode("ascii", errors="replace").split()
        payload = fh.read()
    if len(header) != 5 or header[0] != "CACTI":
        raise IngestionError(f"{path}: bad header {' '.join(header)!r}")
    try:
        shape = tuple(int(v) for v in header[1:])
    except ValueError:
        raise IngestionError(f"{path}: non-integer dims in header") from None
    if min(shape) < 1:
        raise IngestionError(f"{path}: dims must be positive, got {shape}")
    data = np.frombuffer(payload, dtype="<f4")
    if data.size != np.prod(shape):
        raise DimensionError(
            f"{path}: header promises {np.prod(shape)} samples, file holds {data.size}"
        )
    return data.reshape(shape, order="F").astype(float)


def _list_frames(directory):
    frames = {}
    for p in directory.iterdir():
        m = _FRAME_RE.search(p.name)
        if m:
            frames[int(m.group(1))] = p
    return frames


def load_video(path, normalize=True):
    """Load a :class:`ColorVideo` from a frame directory or a raw container.

    Frames are ``frame_000.png, frame_001.png, ...``; numbering must be
    contiguous and every frame must share the first frame's size.  8-bit
    samples are divided by 255 when ``normalize`` is set.  Containers with
    one channel are replicated into gray colour videos.
    """
    path = Path(path)
    if path.is_file():
        arr = read_container(path)
        if arr.shape[3] == 1:
            return ColorVideo.gray(arr[..., 0])
        if arr.shape[3] != 3:
            raise DimensionError(f"{path}: expected 1 or 3 channels, got {arr.shape[3]}")
        return ColorVideo.from_stack(arr)
    if not path.is_dir():
        raise IngestionError(f"no such video: {path}")

    frames = _list_frames(path)
    if not frames:
        raise IngestionError(f"{path}: no frame_*.png files")
    first = min(frames)
    stack, ref_shape = [], None
    for idx in range(first, first + len(frames)):
        if idx not in frames:
            raise IngestionError(f"{path}: missing frame number {idx}")
        fp = frames[idx]
        try:
            img = np.asarray(Image.open(fp).convert("RGB"), dtype=float)
        except OSError as exc:
            raise IngestionError(f"{fp}: unreadable frame ({exc})") from None
        if ref_shape is None:
            ref_shape = img.shape
        elif img.shape != ref_shape:
            raise IngestionError(f"{fp}: frame size {img.shape[:2]} differs from {ref_shape[:2]}")
        stack.append(img)
    arr = np.stack(stack, axis=2)
    if normalize:
        arr = arr / 255.0
    return ColorVideo.from_stack(arr)


def save_frames(directory, video):
    """Write a ColorVideo or gray cube as 8-bit PNG frames (values clipped to [0, 1])."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    arr = video.stack() if isinstance(video, ColorVideo) else np.asarray(video)[..., None]
    arr = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    for k in range(arr.shape[2]):
        frame = arr[:, :, k]
        img = Image.fromarray(frame[..., 0] if frame.shape[-1] == 1 else frame)
        img.save(directory / f"frame_{k:03d}.png")
    return directory


def load_mask(path):
    """Binary mask from an 8-bit PNG (>=128 passes) or an ASCII 0/1 matrix."""
    path = Path(path)
    if not path.is_file():
        raise IngestionError(f"no such mask file: {path}")
    if path.suffix.lower() == ".png":
        arr = np.asarray(Image.open(path).convert("L"))
        return (arr >= 128).astype(np.uint8)
    try:
        arr = np.loadtxt(path, ndmin=2)
    except ValueError as exc:
        raise IngestionError(f"{path}: cannot parse ASCII mask ({exc})") from None
    if not np.isin(arr, (0, 1)).all():
        raise IngestionError(f"{path}: ASCII mask must contain only 0 and 1")
    return arr.astype(np.uint8)


def save_mask(path, mask):
    path = Path(path)
    mask = np.asarray(mask)
    if path.suffix.lower() == ".png":
        Image.fromarray((mask > 0).astype(np.uint8) * 255).save(path)
    else:
        np.savetxt(path, mask, fmt="%d")
    return path


def load_schedule(path):
    """Read ``k,r,s`` lines (k = 1..n_t); returns a list of ``(r, s)``."""
    path = Path(path)
    if not path.is_file():
        raise IngestionError(f"no such schedule file: {path}")
    rows = []
    with path.open(newline="") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                k, r, s = (int(v) for v in row)
            except ValueError:
                if line_no == 1:
                    continue  # header line
                raise IngestionError(f"{path}:{line_no}: expected 'k,r,s' integers") from None
            rows.append((k, r, s))
    rows.sort()
    if [k for k, _, _ in rows] != list(range(1, len(rows) + 1)):
        raise IngestionError(f"{path}: frame indices must run 1..n_t without gaps")
    return [(r, s) for _, r, s in rows]


def save_schedule(path, schedule):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "r", "s"])
        for k, (r, s) in enumerate(schedule, start=1):
            w.writerow([k, r, s])
    return path


def write_psnr_csv(path, report):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["frame", "psnr_db"])
        w.writerows(report.rows())
    return path


def write_level_counts(path, counts):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["level", "count"])
        for lvl, c in enumerate(counts):
            w.writerow([lvl, int(c)])
    return path


def write_trace_csv(path, trace):
    """Diagnostics trace with columns ``sweep,residual_norm,active_count,alpha0``."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sweep", "residual_norm", "active_count", "alpha0"])
        for row in trace:
            w.writerow([row.sweep, repr(row.residual_norm), repr(row.active_count), repr(row.alpha0)])
    return path
