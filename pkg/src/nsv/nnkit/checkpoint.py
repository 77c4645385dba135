"""Checkpoint format: text header + raw little-endian float64 parameter blobs.

Layout (bytes, in order):

    line 1:  ``nnkit-checkpoint v1\\n``
    line 2:  decimal byte length of the JSON header, then ``\\n``
    header:  UTF-8 JSON with keys
               network   - layer kinds/shapes (Network.spec())
               optimizer - hyperparameters dict or null
               seed      - int or null
               meta      - free-form dict (callers stash model metadata here)
    blob:    every parameter array in declaration order (``Network.params()``
             order), each as little-endian IEEE-754 float64, row-major,
             concatenated with no padding.

Floats in the header round-trip exactly through Python's json (shortest
repr); blobs are raw bytes, so save -> load is bit-exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import NnkitError
from .network import Network

MAGIC = b"nnkit-checkpoint v1\n"


def save_checkpoint(path, net: Network, optimizer: dict | None = None,
                    seed: int | None = None, meta: dict | None = None) -> None:
    header = {
        "network": net.spec(),
        "optimizer": optimizer,
        "seed": seed,
        "meta": meta or {},
    }
    payload = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(f"{len(payload)}\n".encode("ascii"))
        f.write(payload)
        for p in net.params():
            f.write(np.ascontiguousarray(p, dtype="<f8").tobytes())


def load_checkpoint(path):
    """Return (Network, header dict). Blob length is validated against shapes."""
    path = Path(path)
    with open(path, "rb") as f:
        magic = f.read(len(MAGIC))
        if magic != MAGIC:
            raise NnkitError(f"{path}: not an nnkit checkpoint")
        length = int(f.readline().strip())
        header = json.loads(f.read(length).decode("utf-8"))
        net = Network.from_spec(header["network"])
        values = []
        for p in net.params():
            raw = f.read(p.size * 8)
            if len(raw) != p.size * 8:
                raise NnkitError(f"{path}: truncated parameter blob")
            values.append(np.frombuffer(raw, dtype="<f8").reshape(p.shape))
        extra = f.read(1)
        if extra:
            raise NnkitError(f"{path}: trailing bytes after parameter blob")
    net.set_params(values)
    return net, header
