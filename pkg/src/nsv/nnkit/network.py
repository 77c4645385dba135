"""Sequential network container with shape checking and cached backprop."""

from __future__ import annotations

import numpy as np

from .errors import ShapeError
from .layers import Layer, layer_from_spec


class Network:
    """Ordered layers with a fixed input shape.

    Shapes are composed at construction time, so a bad stack fails fast
    with the offending layer named.  ``forward`` accepts a single sample
    (shape == input_shape) or a batch ((B,) + input_shape) and returns a
    matching result.
    """

    def __init__(self, input_shape, layers: list[Layer]):
        if not layers:
            raise ShapeError("a network needs at least one layer")
        self.input_shape = tuple(int(d) for d in input_shape)
        self.layers = list(layers)
        self.shapes = [self.input_shape]
        for i, layer in enumerate(self.layers):
            try:
                self.shapes.append(layer.out_shape(self.shapes[-1]))
            except ShapeError as e:
                raise ShapeError(f"layer {i} ({layer.kind}): {e}") from None
        self.output_shape = self.shapes[-1]

    def params(self) -> list[np.ndarray]:
        out = []
        for layer in self.layers:
            out.extend(layer.params())
        return out

    def n_params(self) -> int:
        return sum(p.size for p in self.params())

    def _batched(self, x: np.ndarray):
        x = np.asarray(x, dtype=np.float64)
        if x.shape == self.input_shape:
            return x[None], True
        if x.shape[1:] == self.input_shape:
            return x, False
        raise ShapeError(f"input shape {x.shape} does not match network input {self.input_shape}")

    def forward(self, x: np.ndarray):
        """Run the stack; returns (output, cache) with cache for backward."""
        xb, single = self._batched(x)
        caches = []
        for i, layer in enumerate(self.layers):
            try:
                xb, c = layer.forward(xb)
            except ValueError as e:
                raise ShapeError(f"layer {i} ({layer.kind}): {e}") from None
            caches.append(c)
        out = xb[0] if single else xb
        return out, (caches, single)

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)[0]

    def backward(self, cache, gy: np.ndarray):
        """Backprop an output gradient; returns (parameter grads, input grad).

        Parameter gradients come back in the same order as ``params()``.
        """
        caches, single = cache
        if len(caches) != len(self.layers):
            raise ShapeError("stale cache: layer count mismatch")
        g = np.asarray(gy, dtype=np.float64)
        if single:
            if g.shape != self.output_shape:
                raise ShapeError(f"output gradient shape {g.shape} != {self.output_shape}")
            g = g[None]
        elif g.shape[1:] != self.output_shape:
            raise ShapeError(f"output gradient shape {g.shape} != (B,)+{self.output_shape}")
        grads_rev = []
        for layer, c in zip(reversed(self.layers), reversed(caches)):
            gparams, g = layer.backward(c, g)
            grads_rev.extend(reversed(gparams))
        gx = g[0] if single else g
        return list(reversed(grads_rev)), gx

    def spec(self) -> dict:
        return {"input_shape": list(self.input_shape),
                "layers": [layer.spec() for layer in self.layers]}

    @classmethod
    def from_spec(cls, spec: dict) -> "Network":
        layers = [layer_from_spec(s) for s in spec["layers"]]
        return cls(tuple(spec["input_shape"]), layers)

    def set_params(self, values: list[np.ndarray]) -> None:
        own = self.params()
        if len(own) != len(values):
            raise ShapeError(f"expected {len(own)} parameter arrays, got {len(values)}")
        for p, v in zip(own, values):
            if p.shape != v.shape:
                raise ShapeError(f"parameter shape {v.shape} != {p.shape}")
            p[...] = v
