"""The three Q-networks: padded-list FCN, occupancy-grid CNN, and ego-attention.

All networks map an observation to 3 action values. The ego-attention model
additionally reports its attention weights over vehicles, one row per head.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from ..errors import NumericalError, UsageError
from . import autodiff as ad
from .autodiff import Tensor

ACTION_DIM = 3
LIST_ROWS = 15
FEATURE_DIM = 7
GRID_CELLS = 32

CHECKPOINT_FORMAT_VERSION = 1

MODEL_KINDS = ("fcn_list", "cnn_grid", "ego_attention")


@dataclass(frozen=True)
class AttentionConfig:
    heads: int = 2
    d_k: int = 32  # key/value width per head
    layers: int = 1  # stacked ego-attention blocks
    embed: int = 64  # per-vehicle embedding width

    def validate(self) -> None:
        if self.heads * self.d_k != self.embed:
            raise UsageError("heads * d_k must equal the embedding width")
        if self.layers < 1:
            raise UsageError("at least one attention layer is required")


class QNetwork:
    """Base class: named float64 parameters plus a recorded forward for backward()."""

    kind: str = ""

    def __init__(self):
        self.params: dict[str, Tensor] = {}
        self._last_output: Tensor | None = None

    # ------------------------------------------------------------- parameters

    def _new_param(self, name: str, shape: tuple[int, ...], fan_in: int, rng) -> Tensor:
        bound = math.sqrt(1.0 / fan_in)
        tensor = ad.parameter(rng.uniform(-bound, bound, size=shape))
        self.params[name] = tensor
        return tensor

    def _new_bias(self, name: str, size: int) -> Tensor:
        tensor = ad.parameter(np.zeros(size))
        self.params[name] = tensor
        return tensor

    def param_count(self) -> int:
        return sum(t.size for t in self.params.values())

    def zero_grads(self) -> None:
        for t in self.params.values():
            t.zero_grad()

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self.params.items()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        if set(state) != set(self.params):
            missing = set(self.params) ^ set(state)
            raise UsageError(f"parameter names do not match: {sorted(missing)}")
        for name, tensor in self.params.items():
            arr = np.asarray(state[name], dtype=np.float64)
            if arr.shape != tensor.data.shape:
                raise UsageError(f"shape mismatch for {name}: {arr.shape}")
            tensor.data = arr.copy()

    def copy_from(self, other: "QNetwork") -> None:
        self.load_state_dict(other.state_dict())

    # ---------------------------------------------------------------- forward

    def forward_batch(self, obs: np.ndarray, mask=None) -> tuple[Tensor, np.ndarray | None]:
        raise NotImplementedError

    def _record(self, out: Tensor) -> Tensor:
        self._last_output = out if out.requires_grad else None
        return out

    def q_values(self, obs: np.ndarray) -> tuple[np.ndarray, np.ndarray | None]:
        """Action values for a single observation (no gradient recording)."""
        obs = np.asarray(obs, dtype=np.float64)
        if not np.isfinite(obs).all():
            raise NumericalError("observation contains non-finite values")
        with ad.no_grad():
            out, trace = self.forward_batch(obs[None, ...])
        values = out.data[0]
        if not np.isfinite(values).all():
            raise NumericalError("forward pass produced non-finite action values")
        return values, (trace[0] if trace is not None else None)

    def backward(self, output_grad: np.ndarray) -> None:
        """Gradients of the last recorded forward, seeded at its outputs."""
        if self._last_output is None:
            raise UsageError("backward called without a recorded forward pass")
        self._last_output.backward(np.asarray(output_grad, dtype=np.float64))


class FullyConnectedQNet(QNetwork):
    """Two ReLU hidden layers of 128 on the flattened padded feature list."""

    kind = "fcn_list"

    def __init__(self, seed: int = 0):
        super().__init__()
        rng = np.random.default_rng(seed)
        flat = LIST_ROWS * FEATURE_DIM
        self.w1 = self._new_param("w1", (flat, 128), flat, rng)
        self.b1 = self._new_bias("b1", 128)
        self.w2 = self._new_param("w2", (128, 128), 128, rng)
        self.b2 = self._new_bias("b2", 128)
        self.w3 = self._new_param("w3", (128, ACTION_DIM), 128, rng)
        self.b3 = self._new_bias("b3", ACTION_DIM)

    def forward_batch(self, obs: np.ndarray, mask=None):
        batch = obs.shape[0]
        if obs.shape[1:] != (LIST_ROWS, FEATURE_DIM):
            raise UsageError(f"expected (B, {LIST_ROWS}, {FEATURE_DIM}) input, got {obs.shape}")
        x = ad.constant(obs.reshape(batch, -1))
        h = ad.relu(ad.affine(x, self.w1, self.b1))
        h = ad.relu(ad.affine(h, self.w2, self.b2))
        out = ad.affine(h, self.w3, self.b3)
        return self._record(out), None


class GridConvQNet(QNetwork):
    """Three 2x2/stride-2 conv layers (16/32/64) and a 20-unit head on the grid."""

    kind = "cnn_grid"

    CHANNELS = (16, 32, 64)
    HEAD = 20

    def __init__(self, seed: int = 0):
        super().__init__()
        rng = np.random.default_rng(seed)
        in_ch = FEATURE_DIM
        self.kernels = []
        self.kbiases = []
        for i, out_ch in enumerate(self.CHANNELS, start=1):
            fan_in = 2 * 2 * in_ch
            self.kernels.append(self._new_param(f"conv{i}_k", (2, 2, in_ch, out_ch), fan_in, rng))
            self.kbiases.append(self._new_bias(f"conv{i}_b", out_ch))
            in_ch = out_ch
        side = GRID_CELLS // 2 ** len(self.CHANNELS)
        flat = side * side * self.CHANNELS[-1]
        self.w_head = self._new_param("head_w", (flat, self.HEAD), flat, rng)
        self.b_head = self._new_bias("head_b", self.HEAD)
        self.w_out = self._new_param("out_w", (self.HEAD, ACTION_DIM), self.HEAD, rng)
        self.b_out = self._new_bias("out_b", ACTION_DIM)

    def forward_batch(self, obs: np.ndarray, mask=None):
        if obs.shape[1:] != (GRID_CELLS, GRID_CELLS, FEATURE_DIM):
            raise UsageError(f"expected (B, {GRID_CELLS}, {GRID_CELLS}, {FEATURE_DIM}), got {obs.shape}")
        h = ad.constant(obs)
        for kernel, bias in zip(self.kernels, self.kbiases):
            h = ad.relu(ad.conv2d(h, kernel, bias))
        h = ad.reshape(h, (obs.shape[0], -1))
        h = ad.relu(ad.affine(h, self.w_head, self.b_head))
        out = ad.affine(h, self.w_out, self.b_out)
        return self._record(out), None


class EgoAttentionQNet(QNetwork):
    """Per-vehicle encoders, ego-query attention heads, residual combine, decoder.

    The ego has its own encoder; all other vehicles share one. The ego's
    embedding participates in the keys/values, so with no traffic the model
    attends to itself. Accepts any number of vehicle rows.
    """

    kind = "ego_attention"

    def __init__(self, seed: int = 0, config: AttentionConfig = AttentionConfig()):
        super().__init__()
        config.validate()
        self.config = config
        rng = np.random.default_rng(seed)
        d = config.embed

        def encoder(prefix):
            return (
                self._new_param(f"{prefix}_w1", (FEATURE_DIM, d), FEATURE_DIM, rng),
                self._new_bias(f"{prefix}_b1", d),
                self._new_param(f"{prefix}_w2", (d, d), d, rng),
                self._new_bias(f"{prefix}_b2", d),
            )

        self.ego_encoder = encoder("ego_enc")
        self.other_encoder = encoder("oth_enc")

        self.blocks = []
        for layer in range(config.layers):
            heads = []
            for head in range(config.heads):
                tag = f"attn{layer}_h{head}"
                heads.append(
                    (
                        self._new_param(f"{tag}_wq", (d, config.d_k), d, rng),
                        self._new_param(f"{tag}_wk", (d, config.d_k), d, rng),
                        self._new_param(f"{tag}_wv", (d, config.d_k), d, rng),
                    )
                )
            combine = self._new_param(f"attn{layer}_combine", (config.heads * config.d_k, d), d, rng)
            self.blocks.append((heads, combine))

        self.dec_w1 = self._new_param("dec_w1", (d, d), d, rng)
        self.dec_b1 = self._new_bias("dec_b1", d)
        self.dec_w2 = self._new_param("dec_w2", (d, d), d, rng)
        self.dec_b2 = self._new_bias("dec_b2", d)
        self.dec_w3 = self._new_param("dec_w3", (d, ACTION_DIM), d, rng)
        self.dec_b3 = self._new_bias("dec_b3", ACTION_DIM)

    def _encode(self, rows: Tensor, encoder) -> Tensor:
        w1, b1, w2, b2 = encoder
        return ad.relu(ad.affine(ad.relu(ad.affine(rows, w1, b1)), w2, b2))

    def forward_batch(self, obs: np.ndarray, mask: np.ndarray | None = None):
        if obs.ndim != 3 or obs.shape[2] != FEATURE_DIM:
            raise UsageError(f"expected (B, M, {FEATURE_DIM}) input, got {obs.shape}")
        batch, rows = obs.shape[0], obs.shape[1]
        d = self.config.embed
        scaling = 1.0 / math.sqrt(self.config.d_k)

        ego_emb = self._encode(ad.constant(obs[:, 0, :]), self.ego_encoder)
        if rows > 1:
            others_emb = self._encode(ad.constant(obs[:, 1:, :]), self.other_encoder)
            all_emb = ad.concat([ad.reshape(ego_emb, (batch, 1, d)), others_emb], axis=1)
        else:
            all_emb = ad.reshape(ego_emb, (batch, 1, d))

        feature = ego_emb
        weights_per_head: list[np.ndarray] = []
        for heads, combine in self.blocks:
            outputs = []
            for wq, wk, wv in heads:
                query = ad.affine(feature, wq)
                keys = ad.affine(all_emb, wk)
                values = ad.affine(all_emb, wv)
                scores = ad.scale(ad.attention_scores(query, keys), scaling)
                attn = ad.softmax_rows(scores, mask)
                weights_per_head.append(attn.data)
                outputs.append(ad.attention_mix(attn, values))
            feature = ad.add(ad.affine(ad.concat(outputs, axis=-1), combine), feature)

        h = ad.relu(ad.affine(feature, self.dec_w1, self.dec_b1))
        h = ad.relu(ad.affine(h, self.dec_w2, self.dec_b2))
        out = ad.affine(h, self.dec_w3, self.dec_b3)
        trace = np.stack(weights_per_head, axis=1)  # (B, layers*heads, M)
        return self._record(out), trace


def build_model(kind: str, seed: int = 0, attention: AttentionConfig = AttentionConfig()) -> QNetwork:
    if kind == "fcn_list":
        return FullyConnectedQNet(seed)
    if kind == "cnn_grid":
        return GridConvQNet(seed)
    if kind == "ego_attention":
        return EgoAttentionQNet(seed, attention)
    raise UsageError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")


def masked_batch_forward(
    model: EgoAttentionQNet, batch: np.ndarray, mask: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Padded-batch inference: rows with mask False are excluded from attention.

    Equivalent to calling q_values on each item without its padding rows.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask[:, 0].all():
        raise UsageError("the ego row must be present in every batch item")
    with ad.no_grad():
        out, trace = model.forward_batch(np.asarray(batch, dtype=np.float64), mask)
    return out.data, trace


# ----------------------------------------------------------- attention surface


@dataclass(frozen=True)
class AttentionHeadParams:
    wq: np.ndarray  # (d_x, d_k)
    wk: np.ndarray
    wv: np.ndarray


@dataclass(frozen=True)
class EgoAttentionParams:
    heads: tuple[AttentionHeadParams, ...]
    combine: np.ndarray  # (heads * d_k, d_x)


def attention_head(
    ego_embedding: np.ndarray, all_embeddings: np.ndarray, params: AttentionHeadParams
) -> tuple[np.ndarray, np.ndarray]:
    """Single ego-query attention head; returns (output, weights over vehicles).

    Row 0 of all_embeddings must be the ego's embedding: the ego is one of the
    keys/values it can attend to.
    """
    d_k = params.wq.shape[1]
    query = ego_embedding @ params.wq
    keys = all_embeddings @ params.wk
    values = all_embeddings @ params.wv
    weights = ad.softmax(keys @ query / math.sqrt(d_k))
    return weights @ values, weights


def ego_attention_forward(
    embeddings: np.ndarray, params: EgoAttentionParams
) -> tuple[np.ndarray, np.ndarray]:
    """One ego-attention block: heads, linear combination, residual ego add.

    Returns (ego feature, per-head weight matrix of shape (heads, vehicles)).
    """
    outputs = []
    weights = []
    for head in params.heads:
        out, w = attention_head(embeddings[0], embeddings, head)
        outputs.append(out)
        weights.append(w)
    combined = np.concatenate(outputs) @ params.combine
    return combined + embeddings[0], np.stack(weights)


# ----------------------------------------------------------------- checkpoints


def save_checkpoint(model: QNetwork, path: str, config_hash: str = "") -> None:
    """Write parameters as JSON; decimal text round-trips bit-exactly."""
    payload = {
        "model_kind": model.kind,
        "config_hash": config_hash,
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "params": {
            name: {"shape": list(t.data.shape), "data": t.data.reshape(-1).tolist()}
            for name, t in model.params.items()
        },
    }
    tmp = f"{path}.tmp"
    with open(tmp, "w") as handle:
        json.dump(payload, handle)
    os.replace(tmp, path)


def _attention_config_from_params(params: dict) -> AttentionConfig:
    layers = len({name.split("_")[0] for name in params if name.startswith("attn")})
    heads = sum(1 for name in params if name.startswith("attn0_h") and name.endswith("_wq"))
    d_x, d_k = (int(v) for v in params["attn0_h0_wq"]["shape"])
    return AttentionConfig(heads=heads, d_k=d_k, layers=layers, embed=d_x)


def load_checkpoint(path: str) -> tuple[QNetwork, dict]:
    """Rebuild a model from a checkpoint; returns (model, header)."""
    with open(path) as handle:
        payload = json.load(handle)
    if payload.get("format_version") != CHECKPOINT_FORMAT_VERSION:
        raise UsageError(f"unsupported checkpoint format: {payload.get('format_version')}")
    kind = payload["model_kind"]
    if kind == "ego_attention":
        model = EgoAttentionQNet(config=_attention_config_from_params(payload["params"]))
    else:
        model = build_model(kind)
    state = {
        name: np.asarray(entry["data"], dtype=np.float64).reshape(entry["shape"])
        for name, entry in payload["params"].items()
    }
    model.load_state_dict(state)
    header = {k: payload[k] for k in ("model_kind", "config_hash", "format_version")}
    return model, header
