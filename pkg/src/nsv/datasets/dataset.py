"""Frame-pair dataset: generation, persistence, splits, and batch iteration.

On-disk layout under a dataset directory:

    manifest.json                 parameters, splits, seed, checksum
    states.csv                    one row per frame: traj, frame, time, state...
    traj0000/frame0000.ppm        binary P6 frames, 8-bit

Frames are stored 8-bit and loaded as float64 v/255.  A training sample is
three consecutive frames: input pair (f_t, f_{t+1}), target pair
(f_{t+1}, f_{t+2}), stacked along the channel axis (H, W, 6), so each
trajectory of `steps` frames yields steps - 2 samples.  Splits partition
whole trajectories; no frame is shared between splits.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..systems import SystemSpec, observe_step, render, sample_initial_state
from ..systems.render import RenderRejected
from .ppm import read_ppm, write_ppm

SPLIT_NAMES = ("train", "val", "test")
DEFAULT_DT_OBS = 1.0 / 60.0
DEFAULT_SPLIT_FRACTIONS = (0.8, 0.1, 0.1)
MAX_RESAMPLES_PER_TRAJECTORY = 200


class DatasetError(Exception):
    pass


def _frame_path(root: Path, traj: int, t: int) -> Path:
    return root / f"traj{traj:04d}" / f"frame{t:04d}.ppm"


def _assign_splits(n_traj: int, fractions, rng: np.random.Generator) -> dict:
    order = rng.permutation(n_traj)
    n_train = int(round(fractions[0] * n_traj))
    n_val = int(round(fractions[1] * n_traj))
    return {
        "train": sorted(int(i) for i in order[:n_train]),
        "val": sorted(int(i) for i in order[n_train:n_train + n_val]),
        "test": sorted(int(i) for i in order[n_train + n_val:]),
    }


def generate_dataset(spec: SystemSpec, n_traj: int, steps: int, size: int,
                     seed: int, out_dir, dt_obs: float = DEFAULT_DT_OBS,
                     split_fractions=DEFAULT_SPLIT_FRACTIONS) -> "Dataset":
    """Simulate, render, and store a dataset; returns the loaded handle.

    Initial states follow the spec's documented init distribution.  A
    trajectory whose render leaves the canvas is resampled from the same
    stream (count logged in the manifest).  Content is a pure function of
    (spec, n_traj, steps, size, seed, dt_obs, split_fractions).
    """
    if steps < 3:
        raise ValueError("steps must be >= 3 (a sample needs 3 consecutive frames)")
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)

    ss = np.random.SeedSequence(seed)
    traj_seeds, split_seed = ss.spawn(2)
    traj_rngs = [np.random.default_rng(s) for s in traj_seeds.spawn(n_traj)]

    dim = spec.state_dim
    states = np.empty((n_traj, steps, dim))
    frames = np.empty((n_traj, steps, size, size, 3), dtype=np.uint8)
    resamples = 0
    for i in range(n_traj):
        rng = traj_rngs[i]
        for attempt in range(MAX_RESAMPLES_PER_TRAJECTORY):
            s = sample_initial_state(spec, rng)
            try:
                traj_states = np.empty((steps, dim))
                traj_frames = np.empty((steps, size, size, 3), dtype=np.uint8)
                for t in range(steps):
                    traj_states[t] = s
                    img = render(spec, s, size)
                    traj_frames[t] = np.round(img * 255.0).astype(np.uint8)
                    if t + 1 < steps:
                        s = observe_step(spec, s, dt_obs)
                break
            except RenderRejected:
                resamples += 1
        else:
            raise DatasetError(f"trajectory {i}: {MAX_RESAMPLES_PER_TRAJECTORY} "
                               "resamples exhausted (canvas too small for the "
                               "init distribution)")
        states[i] = traj_states
        frames[i] = traj_frames

    digest = hashlib.sha256()
    for i in range(n_traj):
        (root / f"traj{i:04d}").mkdir(exist_ok=True)
        for t in range(steps):
            write_ppm(_frame_path(root, i, t), frames[i, t])
            digest.update(frames[i, t].tobytes())

    labels = spec.state_labels
    with open(root / "states.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["traj", "frame", "time"] + labels)
        for i in range(n_traj):
            for t in range(steps):
                writer.writerow([i, t, repr(float(t * dt_obs))]
                                + [repr(float(v)) for v in states[i, t]])

    manifest = {
        "format": "nsv-dataset v1",
        "system": spec.to_json_dict(),
        "dt_obs": dt_obs,
        "size": size,
        "n_traj": n_traj,
        "steps": steps,
        "seed": seed,
        "split_fractions": list(split_fractions),
        "splits": _assign_splits(n_traj, split_fractions,
                                 np.random.default_rng(split_seed)),
        "state_labels": labels,
        "resample_count": resamples,
        "frames_sha256": digest.hexdigest(),
    }
    with open(root / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return Dataset(root, manifest, frames, states)


def load_dataset(path, verify_checksum: bool = False) -> "Dataset":
    """Load a stored dataset; fails naming the first bad or missing file."""
    root = Path(path)
    manifest_path = root / "manifest.json"
    if not manifest_path.exists():
        raise DatasetError(f"{root}: no manifest.json")
    with open(manifest_path) as f:
        manifest = json.load(f)
    spec = SystemSpec.from_json_dict(manifest["system"])  # validates name
    n_traj, steps, size = manifest["n_traj"], manifest["steps"], manifest["size"]

    frames = np.empty((n_traj, steps, size, size, 3), dtype=np.uint8)
    digest = hashlib.sha256() if verify_checksum else None
    for i in range(n_traj):
        for t in range(steps):
            p = _frame_path(root, i, t)
            if not p.exists():
                raise DatasetError(f"missing frame file {p}")
            try:
                frames[i, t] = read_ppm(p)
            except ValueError as e:
                raise DatasetError(str(e)) from None
            if digest is not None:
                digest.update(frames[i, t].tobytes())
    if digest is not None and manifest.get("frames_sha256"):
        if digest.hexdigest() != manifest["frames_sha256"]:
            raise DatasetError(f"{root}: frame checksum mismatch")

    states = np.empty((n_traj, steps, spec.state_dim))
    with open(root / "states.csv") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header[3:] != manifest["state_labels"]:
            raise DatasetError(f"{root}: states.csv columns {header[3:]} do not "
                               f"match manifest {manifest['state_labels']}")
        for row in reader:
            i, t = int(row[0]), int(row[1])
            states[i, t] = [float(v) for v in row[3:]]
    return Dataset(root, manifest, frames, states)


@dataclass
class Dataset:
    root: Path
    manifest: dict
    frames: np.ndarray        # (n_traj, steps, H, W, 3) uint8
    states: np.ndarray        # (n_traj, steps, state_dim)

    def __post_init__(self):
        self.spec = SystemSpec.from_json_dict(self.manifest["system"])
        self.dt_obs = self.manifest["dt_obs"]
        self.size = self.manifest["size"]
        self.steps = self.manifest["steps"]
        self.splits = {k: list(v) for k, v in self.manifest["splits"].items()}

    def frame(self, traj: int, t: int) -> np.ndarray:
        return self.frames[traj, t].astype(np.float64) / 255.0

    def sample_index(self, split: str) -> list:
        """(traj, t) pairs; sample t covers frames t, t+1, t+2."""
        if split not in SPLIT_NAMES:
            raise ValueError(f"unknown split {split!r}")
        return [(i, t) for i in self.splits[split] for t in range(self.steps - 2)]

    def n_samples(self, split: str) -> int:
        return len(self.splits[split]) * (self.steps - 2)

    def pairs_for(self, index) -> tuple:
        """(inputs, targets) float64 arrays of shape (N, H, W, 6)."""
        n = len(index)
        x = np.empty((n, self.size, self.size, 6))
        y = np.empty((n, self.size, self.size, 6))
        for row, (i, t) in enumerate(index):
            f0 = self.frames[i, t].astype(np.float64) / 255.0
            f1 = self.frames[i, t + 1].astype(np.float64) / 255.0
            f2 = self.frames[i, t + 2].astype(np.float64) / 255.0
            x[row] = np.concatenate([f0, f1], axis=2)
            y[row] = np.concatenate([f1, f2], axis=2)
        return x, y

    def state_for(self, index) -> np.ndarray:
        """Ground-truth state at each sample's first frame."""
        return np.array([self.states[i, t] for i, t in index])


def iterate_samples(dataset: Dataset, split: str, batch_size: int, seed: int,
                    epoch: int = 0):
    """Yield (inputs, targets, index) batches in a seeded permutation.

    Every sample of the split is visited exactly once per epoch; the same
    (seed, epoch) always produces the same order.  A batch_size larger
    than the split yields one smaller batch.
    """
    if batch_size < 1:
        raise ValueError("batch size must be >= 1")
    index = dataset.sample_index(split)
    if not index:
        raise ValueError(f"split {split!r} is empty")
    order = np.random.default_rng([seed & 0xFFFFFFFF, epoch]).permutation(len(index))
    for start in range(0, len(index), batch_size):
        chosen = [index[k] for k in order[start:start + batch_size]]
        x, y = dataset.pairs_for(chosen)
        yield x, y, chosen
