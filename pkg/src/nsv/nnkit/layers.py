"""Layer menu for the differentiable-network engine.

Every layer works on float64 arrays with an explicit batch axis:
``x.shape == (B,) + in_shape``.  ``forward`` returns the output plus an
opaque cache consumed by ``backward``; both are pure (no layer state is
mutated outside of parameter arrays, which only the optimizer touches).

Relu convention: the subgradient at exactly 0 is 0 (mask is ``x > 0``).
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError


def glorot_uniform(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(np.float64)


class Layer:
    """Base class: subclasses define kind, shape rule, forward and backward."""

    kind = "abstract"

    def out_shape(self, in_shape: tuple) -> tuple:
        raise NotImplementedError

    def params(self) -> list[np.ndarray]:
        return []

    def forward(self, x: np.ndarray):
        raise NotImplementedError

    def backward(self, cache, gy: np.ndarray):
        """Return (per-parameter gradients, input gradient)."""
        raise NotImplementedError

    def spec(self) -> dict:
        """JSON-serializable constructor descriptor (no parameter data)."""
        return {"kind": self.kind}


class Dense(Layer):
    kind = "dense"

    def __init__(self, in_width: int, out_width: int, rng: np.random.Generator | None = None):
        if in_width < 1 or out_width < 1:
            raise ShapeError(f"dense widths must be positive, got {in_width}->{out_width}")
        self.in_width = in_width
        self.out_width = out_width
        if rng is None:
            self.weight = np.zeros((in_width, out_width))
            self.bias = np.zeros(out_width)
        else:
            self.weight = glorot_uniform(rng, (in_width, out_width), in_width, out_width)
            self.bias = np.zeros(out_width)

    def out_shape(self, in_shape):
        if in_shape != (self.in_width,):
            raise ShapeError(f"dense expects ({self.in_width},), got {in_shape}")
        return (self.out_width,)

    def params(self):
        return [self.weight, self.bias]

    def forward(self, x):
        return x @ self.weight + self.bias, x

    def backward(self, cache, gy):
        x = cache
        gw = x.T @ gy
        gb = gy.sum(axis=0)
        gx = gy @ self.weight.T
        return [gw, gb], gx

    def spec(self):
        return {"kind": self.kind, "in_width": self.in_width, "out_width": self.out_width}


class Conv2d(Layer):
    """3x3-style convolution on channel-last images via im2col + one matmul."""

    kind = "conv2d"

    def __init__(self, in_ch: int, out_ch: int, ksize: int = 3, stride: int = 1,
                 padding: int = 1, rng: np.random.Generator | None = None):
        if ksize < 1 or stride < 1:
            raise ShapeError(f"conv2d needs ksize >= 1 and stride >= 1, got {ksize}, {stride}")
        self.in_ch = in_ch
        self.out_ch = out_ch
        self.ksize = ksize
        self.stride = stride
        self.padding = padding
        fan_in = ksize * ksize * in_ch
        fan_out = ksize * ksize * out_ch
        if rng is None:
            self.weight = np.zeros((fan_in, out_ch))
        else:
            self.weight = glorot_uniform(rng, (fan_in, out_ch), fan_in, fan_out)
        self.bias = np.zeros(out_ch)

    def out_shape(self, in_shape):
        if len(in_shape) != 3 or in_shape[2] != self.in_ch:
            raise ShapeError(f"conv2d expects (H, W, {self.in_ch}), got {in_shape}")
        h, w, _ = in_shape
        k, s, p = self.ksize, self.stride, self.padding
        ho = (h + 2 * p - k) // s + 1
        wo = (w + 2 * p - k) // s + 1
        if ho < 1 or wo < 1:
            raise ShapeError(f"conv2d output would be empty for input {in_shape}")
        return (ho, wo, self.out_ch)

    def params(self):
        return [self.weight, self.bias]

    def _im2col(self, xp, ho, wo):
        # (B, Hp, Wp, C) -> (B, ho, wo, k, k, C) patch view, then flat columns
        k, s = self.ksize, self.stride
        win = np.lib.stride_tricks.sliding_window_view(xp, (k, k), axis=(1, 2))
        win = win[:, ::s, ::s]  # (B, ho, wo, C, k, k)
        col = np.ascontiguousarray(win.transpose(0, 1, 2, 4, 5, 3))  # (B, ho, wo, k, k, C)
        return col.reshape(xp.shape[0] * ho * wo, k * k * self.in_ch)

    def forward(self, x):
        b, h, w, _ = x.shape
        ho, wo, _ = self.out_shape(x.shape[1:])
        p = self.padding
        xp = np.pad(x, ((0, 0), (p, p), (p, p), (0, 0))) if p else x
        col = self._im2col(xp, ho, wo)
        y = (col @ self.weight + self.bias).reshape(b, ho, wo, self.out_ch)
        return y, (col, x.shape)

    def backward(self, cache, gy):
        col, x_shape = cache
        b, h, w, _ = x_shape
        ho, wo = gy.shape[1], gy.shape[2]
        k, s, p = self.ksize, self.stride, self.padding
        gy_flat = gy.reshape(b * ho * wo, self.out_ch)
        gw = col.T @ gy_flat
        gb = gy_flat.sum(axis=0)
        gcol = (gy_flat @ self.weight.T).reshape(b, ho, wo, k, k, self.in_ch)
        gxp = np.zeros((b, h + 2 * p, w + 2 * p, self.in_ch))
        for kh in range(k):
            for kw in range(k):
                gxp[:, kh:kh + s * ho:s, kw:kw + s * wo:s, :] += gcol[:, :, :, kh, kw, :]
        gx = gxp[:, p:p + h, p:p + w, :] if p else gxp
        return [gw, gb], gx

    def spec(self):
        return {"kind": self.kind, "in_ch": self.in_ch, "out_ch": self.out_ch,
                "ksize": self.ksize, "stride": self.stride, "padding": self.padding}


class UpsampleNearest(Layer):
    kind = "upsample-nearest"

    def __init__(self, factor: int = 2):
        if factor < 1:
            raise ShapeError(f"upsample factor must be >= 1, got {factor}")
        self.factor = factor

    def out_shape(self, in_shape):
        if len(in_shape) != 3:
            raise ShapeError(f"upsample-nearest expects (H, W, C), got {in_shape}")
        h, w, c = in_shape
        return (h * self.factor, w * self.factor, c)

    def forward(self, x):
        f = self.factor
        return x.repeat(f, axis=1).repeat(f, axis=2), x.shape

    def backward(self, cache, gy):
        b, h, w, c = cache
        f = self.factor
        gx = gy.reshape(b, h, f, w, f, c).sum(axis=(2, 4))
        return [], gx

    def spec(self):
        return {"kind": self.kind, "factor": self.factor}


class Relu(Layer):
    kind = "relu"

    def out_shape(self, in_shape):
        return in_shape

    def forward(self, x):
        return np.maximum(x, 0.0), x > 0.0

    def backward(self, cache, gy):
        return [], gy * cache


class Sigmoid(Layer):
    kind = "sigmoid"

    def out_shape(self, in_shape):
        return in_shape

    def forward(self, x):
        # numerically stable split for large |x|
        y = np.empty_like(x)
        pos = x >= 0
        y[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
        ex = np.exp(x[~pos])
        y[~pos] = ex / (1.0 + ex)
        return y, y

    def backward(self, cache, gy):
        y = cache
        return [], gy * y * (1.0 - y)


class Flatten(Layer):
    kind = "flatten"

    def out_shape(self, in_shape):
        n = 1
        for d in in_shape:
            n *= d
        return (n,)

    def forward(self, x):
        return x.reshape(x.shape[0], -1), x.shape

    def backward(self, cache, gy):
        return [], gy.reshape(cache)


class Reshape(Layer):
    kind = "reshape"

    def __init__(self, target_shape):
        self.target_shape = tuple(int(d) for d in target_shape)

    def out_shape(self, in_shape):
        n_in = 1
        for d in in_shape:
            n_in *= d
        n_out = 1
        for d in self.target_shape:
            n_out *= d
        if n_in != n_out:
            raise ShapeError(f"reshape {in_shape} -> {self.target_shape} changes element count")
        return self.target_shape

    def forward(self, x):
        return x.reshape((x.shape[0],) + self.target_shape), x.shape

    def backward(self, cache, gy):
        return [], gy.reshape(cache)

    def spec(self):
        return {"kind": self.kind, "target_shape": list(self.target_shape)}


LAYER_KINDS = {
    "dense": Dense,
    "conv2d": Conv2d,
    "upsample-nearest": UpsampleNearest,
    "relu": Relu,
    "sigmoid": Sigmoid,
    "flatten": Flatten,
    "reshape": Reshape,
}


def layer_from_spec(spec: dict) -> Layer:
    kind = spec.get("kind")
    if kind not in LAYER_KINDS:
        raise ShapeError(f"unknown layer kind {kind!r}")
    kwargs = {k: v for k, v in spec.items() if k != "kind"}
    return LAYER_KINDS[kind](**kwargs)
