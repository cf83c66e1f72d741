#!/usr/bin/env python3
"""Predict a frame and export the artifacts: PLY cloud, depth PNG, CSVs."""

import tempfile
from pathlib import Path

from sdmlp import (
    SeededRng,
    TrainConfig,
    predict_frame,
    save_checkpoint,
    synth_dataset,
    train,
)
from sdmlp.data import load_dataset_frame, write_synth_dataset
from sdmlp.export import write_csv_losses, write_depth_png, write_ply
from sdmlp.pipeline import PointCloud

work = Path(tempfile.mkdtemp(prefix="sdmlp_demo_"))
frames = synth_dataset(SeededRng(3), 4, 24, 24, "radial")
write_synth_dataset(frames, work)

config = TrainConfig(epochs=5, dropout_rate=0.0, l2_lambda=0.0, seed=5,
                     n_train_frames=3)
net, report = train(config, work)
save_checkpoint(net, work / "model.sdmlp")
write_csv_losses(report, work / "losses.csv")

# predict the held-out frame and export everything
frame, depth_gt = load_dataset_frame(work, 3)
pred_depth, cloud = predict_frame(net, frame)
write_ply(cloud, work / "predicted.ply")
write_ply(
    PointCloud(points=depth_gt.xyz[depth_gt.valid], colors=frame.left[depth_gt.valid]),
    work / "ground_truth.ply",
)
write_depth_png(pred_depth, work / "depth.png")

print("wrote:")
for name in ("model.sdmlp", "losses.csv", "predicted.ply", "ground_truth.ply",
             "depth.png"):
    print(f"  {work / name}  ({(work / name).stat().st_size} bytes)")

print("\nhead of predicted.ply:")
for line in (work / "predicted.ply").read_text().splitlines()[:12]:
    print(" ", line)
