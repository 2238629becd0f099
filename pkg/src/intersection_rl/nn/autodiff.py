"""Reverse-mode automatic differentiation over numpy arrays.

Small by design: only the operations the Q-networks need. Every op records a
closure that accumulates gradients into its parents; tapes are per-result and
freed once backward() has run.
"""

from __future__ import annotations

import numpy as np

from ..errors import UsageError

_GRAD_ENABLED = True


class no_grad:
    """Context manager disabling graph recording (inference-only forwards)."""

    def __enter__(self):
        global _GRAD_ENABLED
        self._prev = _GRAD_ENABLED
        _GRAD_ENABLED = False
        return self

    def __exit__(self, *exc):
        global _GRAD_ENABLED
        _GRAD_ENABLED = self._prev
        return False


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backprop")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents: tuple[Tensor, ...] = ()
        self._backprop = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self, grad=None) -> None:
        """Propagate gradients from this node to every parameter it used."""
        if grad is None:
            if self.data.size != 1:
                raise UsageError("backward on a non-scalar requires an explicit gradient")
            grad = np.ones_like(self.data)
        grad = np.asarray(grad, dtype=np.float64)
        if grad.shape != self.data.shape:
            raise UsageError(f"gradient shape {grad.shape} != value shape {self.data.shape}")

        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                stack.append((parent, False))

        _accumulate(self, grad)
        for node in reversed(order):
            if node._backprop is not None and node.grad is not None:
                node._backprop(node.grad)


def _accumulate(t: Tensor, g: np.ndarray) -> None:
    if t.requires_grad:
        t.grad = g if t.grad is None else t.grad + g


def _node(data: np.ndarray, parents: tuple[Tensor, ...], backprop) -> Tensor:
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        out = Tensor(data)
        out.requires_grad = True
        out._parents = parents
        out._backprop = backprop
        return out
    return Tensor(data)


def parameter(data) -> Tensor:
    return Tensor(data, requires_grad=True)


def constant(data) -> Tensor:
    return Tensor(data)


# ------------------------------------------------------------------ operations


def affine(x: Tensor, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    """x @ weight (+ bias) applied along the last axis of x."""
    xd, wd = x.data, weight.data
    if xd.ndim < 1 or wd.ndim != 2 or xd.shape[-1] != wd.shape[0]:
        raise UsageError(f"affine shape mismatch: {xd.shape} @ {wd.shape}")
    xm = xd.reshape(-1, xd.shape[-1])
    ym = xm @ wd
    if bias is not None:
        if bias.data.shape != (wd.shape[1],):
            raise UsageError(f"bias shape {bias.data.shape} != ({wd.shape[1]},)")
        ym = ym + bias.data
    y = ym.reshape(*xd.shape[:-1], wd.shape[1])
    parents = (x, weight) if bias is None else (x, weight, bias)

    def backprop(g):
        gm = g.reshape(-1, wd.shape[1])
        _accumulate(weight, xm.T @ gm)
        if bias is not None:
            _accumulate(bias, gm.sum(axis=0))
        _accumulate(x, (gm @ wd.T).reshape(xd.shape))

    return _node(y, parents, backprop)


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0.0
    return _node(x.data * mask, (x,), lambda g: _accumulate(x, g * mask))


def add(x: Tensor, y: Tensor) -> Tensor:
    if x.data.shape != y.data.shape:
        raise UsageError(f"add shape mismatch: {x.data.shape} vs {y.data.shape}")

    def backprop(g):
        _accumulate(x, g)
        _accumulate(y, g)

    return _node(x.data + y.data, (x, y), backprop)


def scale(x: Tensor, factor: float) -> Tensor:
    return _node(x.data * factor, (x,), lambda g: _accumulate(x, g * factor))


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    old = x.data.shape
    return _node(x.data.reshape(shape), (x,), lambda g: _accumulate(x, g.reshape(old)))


def concat(tensors: list[Tensor], axis: int) -> Tensor:
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def backprop(g):
        for t, piece in zip(tensors, np.split(g, splits, axis=axis)):
            _accumulate(t, piece)

    return _node(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), backprop)


def conv2d(x: Tensor, kernel: Tensor, bias: Tensor) -> Tensor:
    """Valid convolution with stride equal to the kernel size (non-overlapping).

    x: (B, H, W, C); kernel: (kh, kw, C, out); spatial dims must be divisible
    by the kernel size.
    """
    xd, kd = x.data, kernel.data
    if xd.ndim != 4 or kd.ndim != 4 or xd.shape[3] != kd.shape[2]:
        raise UsageError(f"conv2d shape mismatch: {xd.shape} with kernel {kd.shape}")
    batch, height, width, chans = xd.shape
    kh, kw, _, out_chans = kd.shape
    if height % kh != 0 or width % kw != 0:
        raise UsageError(f"spatial dims {height}x{width} not divisible by kernel {kh}x{kw}")
    oh, ow = height // kh, width // kw

    patches = (
        xd.reshape(batch, oh, kh, ow, kw, chans)
        .transpose(0, 1, 3, 2, 4, 5)
        .reshape(batch * oh * ow, kh * kw * chans)
    )
    wm = kd.reshape(kh * kw * chans, out_chans)
    ym = patches @ wm + bias.data
    y = ym.reshape(batch, oh, ow, out_chans)

    def backprop(g):
        gm = g.reshape(-1, out_chans)
        _accumulate(kernel, (patches.T @ gm).reshape(kd.shape))
        _accumulate(bias, gm.sum(axis=0))
        dp = (gm @ wm.T).reshape(batch, oh, ow, kh, kw, chans)
        _accumulate(x, dp.transpose(0, 1, 3, 2, 4, 5).reshape(xd.shape))

    return _node(y, (x, kernel, bias), backprop)


def _softmax_forward(scores: np.ndarray) -> np.ndarray:
    top = scores.max(axis=-1, keepdims=True)
    if not np.isfinite(top).all():
        raise UsageError("softmax undefined: a row has no finite score")
    exps = np.exp(scores - top)
    return exps / exps.sum(axis=-1, keepdims=True)


def softmax(scores) -> np.ndarray:
    """Numerically stable softmax over the last axis; -inf scores map to 0."""
    return _softmax_forward(np.asarray(scores, dtype=np.float64))


def softmax_rows(x: Tensor, mask: np.ndarray | None = None) -> Tensor:
    """Differentiable softmax along the last axis; masked-out entries get weight 0."""
    d = x.data
    if mask is not None:
        d = np.where(mask, d, -np.inf)
    y = _softmax_forward(d)

    def backprop(g):
        _accumulate(x, y * (g - (g * y).sum(axis=-1, keepdims=True)))

    return _node(y, (x,), backprop)


def attention_scores(query: Tensor, keys: Tensor) -> Tensor:
    """Dot products of one query per batch item with every key: (B,K),(B,M,K)->(B,M)."""
    qd, kd = query.data, keys.data
    y = np.einsum("bk,bmk->bm", qd, kd)

    def backprop(g):
        _accumulate(query, np.einsum("bm,bmk->bk", g, kd))
        _accumulate(keys, np.einsum("bm,bk->bmk", g, qd))

    return _node(y, (query, keys), backprop)


def attention_mix(weights: Tensor, values: Tensor) -> Tensor:
    """Convex combination of values by attention weights: (B,M),(B,M,K)->(B,K)."""
    wd, vd = weights.data, values.data
    y = np.einsum("bm,bmk->bk", wd, vd)

    def backprop(g):
        _accumulate(weights, np.einsum("bk,bmk->bm", g, vd))
        _accumulate(values, np.einsum("bm,bk->bmk", wd, g))

    return _node(y, (weights, values), backprop)


def gather_actions(q: Tensor, actions: np.ndarray) -> Tensor:
    """Select one Q-value per row: (B,A),(B,)->(B,)."""
    idx = np.arange(q.data.shape[0])
    y = q.data[idx, actions]

    def backprop(g):
        full = np.zeros_like(q.data)
        full[idx, actions] = g
        _accumulate(q, full)

    return _node(y, (q,), backprop)


def smooth_l1_mean(pred: Tensor, target: np.ndarray, delta: float = 1.0) -> Tensor:
    """Mean smooth-L1 (Huber) loss against a constant target vector."""
    diff = pred.data - target
    quad = np.abs(diff) <= delta
    vals = np.where(quad, 0.5 * diff**2, delta * (np.abs(diff) - 0.5 * delta))
    y = np.array(vals.mean())

    def backprop(g):
        local = np.where(quad, diff, delta * np.sign(diff))
        _accumulate(pred, local * (g / diff.size))

    return _node(y, (pred,), backprop)
