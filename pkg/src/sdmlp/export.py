"""Writers for the run artifacts: PLY clouds, CSV reports, depth images.

Every writer is deterministic: identical inputs produce byte-identical files.
CSV files use '.' as the decimal separator and LF line endings; float columns
are written with shortest round-trip formatting, so parsing them back
recovers the exact values.
"""

from pathlib import Path

import numpy as np
from PIL import Image


def write_ply(cloud, path) -> None:
    """ASCII PLY 1.0 with x/y/z floats and optional uchar RGB.

    Coordinates are written with 6 significant digits.
    """
    points = np.asarray(cloud.points, dtype=np.float64).reshape(-1, 3)
    colors = cloud.colors
    lines = [
        "ply",
        "format ascii 1.0",
        f"element vertex {points.shape[0]}",
        "property float x",
        "property float y",
        "property float z",
    ]
    if colors is not None:
        colors = np.asarray(colors, dtype=np.uint8).reshape(-1, 3)
        if colors.shape[0] != points.shape[0]:
            raise ValueError(
                f"{colors.shape[0]} colors for {points.shape[0]} points"
            )
        lines += ["property uchar red", "property uchar green", "property uchar blue"]
    lines.append("end_header")
    for i in range(points.shape[0]):
        coord = " ".join(format(v, ".6g") for v in points[i])
        if colors is not None:
            coord += " " + " ".join(str(int(c)) for c in colors[i])
        lines.append(coord)
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def write_csv_losses(report, path) -> None:
    """Per-epoch loss curve: epoch,mse,l2,wall_ms with 1-based epochs."""
    lines = ["epoch,mse,l2,wall_ms"]
    for i, (m, l2, wall) in enumerate(
        zip(report.epoch_mse, report.epoch_l2, report.epoch_wall_ms), start=1
    ):
        lines.append(f"{i},{float(m)!r},{float(l2)!r},{float(wall)!r}")
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def write_csv_eval(records, hist, path_records, path_hist) -> None:
    """Per-frame RMSE records plus the histogram over them.

    The records file carries one row per frame in ascending index order and a
    trailing aggregate row ``mean,<value>,``.
    """
    if not records:
        raise ValueError("no evaluation records to write")
    edges, counts = hist
    rec_lines = ["frame,rmse,n_pixels"]
    for r in sorted(records, key=lambda r: r.frame_index):
        rec_lines.append(f"{r.frame_index},{float(r.rmse)!r},{r.n_pixels}")
    mean = sum(float(r.rmse) for r in records) / len(records)
    rec_lines.append(f"mean,{mean!r},")
    Path(path_records).write_text("\n".join(rec_lines) + "\n", newline="\n")

    hist_lines = ["bin_lo,bin_hi,count"]
    for i in range(len(counts)):
        hist_lines.append(f"{float(edges[i])!r},{float(edges[i + 1])!r},{int(counts[i])}")
    Path(path_hist).write_text("\n".join(hist_lines) + "\n", newline="\n")


def write_depth_png(prediction, path) -> None:
    """8-bit grayscale of the Z channel, min-max normalized over valid pixels.

    Invalid pixels are black; a degenerate Z range maps every valid pixel to
    mid-gray 128.
    """
    z = prediction.xyz[:, :, 2]
    valid = prediction.valid
    if not valid.any():
        raise ValueError("depth image needs at least one valid pixel")
    zmin = float(z[valid].min())
    zmax = float(z[valid].max())
    img = np.zeros(z.shape, dtype=np.uint8)
    if zmax == zmin:
        img[valid] = 128
    else:
        scaled = np.rint((z[valid] - zmin) / (zmax - zmin) * 255.0)
        img[valid] = scaled.astype(np.uint8)
    Image.fromarray(img, "L").save(Path(path))
