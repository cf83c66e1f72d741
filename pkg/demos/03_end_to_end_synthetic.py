#!/usr/bin/env python3
"""Full pipeline at desk scale: synthesize data, train, evaluate.

Writes a small synthetic dataset to a temp directory, trains the 6-500-500-3
network for a few epochs, and reports per-image RMSE over the held-out frames.
"""

import tempfile
from pathlib import Path

from sdmlp import SeededRng, TrainConfig, evaluate, split_frames, synth_dataset, train
from sdmlp.data import write_synth_dataset

work = Path(tempfile.mkdtemp(prefix="sdmlp_demo_"))
print("working in", work)

# 6 frames of 32x32: first 4 train, last 2 test
frames = synth_dataset(SeededRng(7), 6, 32, 32, "linear", mask_fraction=0.1)
write_synth_dataset(frames, work)

config = TrainConfig(
    epochs=8,
    batch_size=128,
    dropout_rate=0.0,
    l2_lambda=0.0,
    seed=42,
    n_train_frames=4,
)
net, report = train(config, work)

print("epoch  mse         l2")
for i, (m, l2) in enumerate(zip(report.epoch_mse, report.epoch_l2), start=1):
    print(f"{i:>5}  {m:<10.6f}  {l2:.6f}")

split = split_frames(6, 4)
result = evaluate(net, split, work, n_bins=5)
print("\nper-frame mean Euclidean distance on the test frames:")
for rec in result.records:
    print(f"  frame {rec.frame_index}: rmse={rec.rmse:.5f} over {rec.n_pixels} px")
print("mean:", result.mean_rmse)
print("conventional (root outside the mean):", result.mean_conventional)
