"""Network definition, initialization, forward/backward, and model files.

The default architecture is five conv3-conv3-maxpool blocks with
32-32-64-128-128 kernels, two 512-unit dense layers and an 18-unit
output.  Leaky ReLU follows every layer except the last two dense
layers, which use tanh; dropout sits after each pooling stage and after
each 512-unit layer.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field, replace

import numpy as np

from ..codec import FEATURES_PER_FRAME, Standardizer
from ..errors import DataError
from ..vision import CLIP_SIZE, VALID_K, CropSpec
from . import layers

MODEL_MAGIC = b"V2SM"
MODEL_FORMAT_VERSION = 1
TARGET_SCALE = 1.0 / 3.0

CONV_BLOCK_CHANNELS = (32, 32, 64, 128, 128)
DENSE_WIDTH = 512
OUTPUT_DIM = FEATURES_PER_FRAME


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    out_channels: int = 0
    out_dim: int = 0
    rate: float = 0.0
    alpha: float = 0.0


@dataclass(frozen=True)
class NetworkSpec:
    in_channels: int
    layers: tuple[LayerSpec, ...]


def default_network_spec(k: int, conv_dropout: float = 0.25,
                         dense_dropout: float = 0.5, alpha: float = 0.01) -> NetworkSpec:
    """The standard clip-to-sound-features architecture for K input frames."""
    if k not in VALID_K:
        raise DataError(f"K must be one of {VALID_K}")
    specs: list[LayerSpec] = []
    for channels in CONV_BLOCK_CHANNELS:
        specs.append(LayerSpec("conv", out_channels=channels))
        specs.append(LayerSpec("leaky_relu", alpha=alpha))
        specs.append(LayerSpec("conv", out_channels=channels))
        specs.append(LayerSpec("leaky_relu", alpha=alpha))
        specs.append(LayerSpec("pool"))
        specs.append(LayerSpec("dropout", rate=conv_dropout))
    specs.append(LayerSpec("flatten"))
    specs.append(LayerSpec("dense", out_dim=DENSE_WIDTH))
    specs.append(LayerSpec("leaky_relu", alpha=alpha))
    specs.append(LayerSpec("dropout", rate=dense_dropout))
    specs.append(LayerSpec("dense", out_dim=DENSE_WIDTH))
    specs.append(LayerSpec("tanh"))
    specs.append(LayerSpec("dropout", rate=dense_dropout))
    specs.append(LayerSpec("dense", out_dim=OUTPUT_DIM))
    specs.append(LayerSpec("tanh"))
    return NetworkSpec(in_channels=k, layers=tuple(specs))


def infer_shapes(spec: NetworkSpec, size: int = CLIP_SIZE) -> list[tuple[int, ...]]:
    """Per-layer output shapes (without the batch dim), validating the spec."""
    shape: tuple[int, ...] = (size, size, spec.in_channels)
    shapes = []
    for ls in spec.layers:
        if ls.kind == "conv":
            if len(shape) != 3:
                raise DataError("conv layer after flatten")
            shape = (shape[0], shape[1], ls.out_channels)
        elif ls.kind == "pool":
            if len(shape) != 3 or shape[0] % 2 or shape[1] % 2:
                raise DataError(f"cannot 2x2-pool shape {shape}")
            shape = (shape[0] // 2, shape[1] // 2, shape[2])
        elif ls.kind == "flatten":
            shape = (int(np.prod(shape)),)
        elif ls.kind == "dense":
            if len(shape) != 1:
                raise DataError("dense layer before flatten")
            shape = (ls.out_dim,)
        elif ls.kind not in ("leaky_relu", "tanh", "dropout"):
            raise DataError(f"unknown layer kind {ls.kind!r}")
        shapes.append(shape)
    return shapes


@dataclass
class ModelParams:
    """Learnable tensors plus optimizer state and the feature scaling."""

    spec: NetworkSpec
    layer_params: list[dict[str, np.ndarray]]
    adam_m: list[dict[str, np.ndarray]]
    adam_v: list[dict[str, np.ndarray]]
    step: int = 0
    standardizer: Standardizer | None = None
    target_scale: float = TARGET_SCALE
    crop: CropSpec | None = None
    input_size: int = CLIP_SIZE

    @property
    def dtype(self) -> np.dtype:
        for p in self.layer_params:
            if p:
                return p["w"].dtype
        return np.dtype(np.float64)

    def copy(self) -> "ModelParams":
        dup = lambda lst: [{k: v.copy() for k, v in d.items()} for d in lst]
        return ModelParams(
            spec=self.spec,
            layer_params=dup(self.layer_params),
            adam_m=dup(self.adam_m),
            adam_v=dup(self.adam_v),
            step=self.step,
            standardizer=self.standardizer,
            target_scale=self.target_scale,
            crop=self.crop,
            input_size=self.input_size,
        )


def he_init(spec: NetworkSpec, seed: int, dtype=np.float64,
            input_size: int = CLIP_SIZE) -> ModelParams:
    """Weights ~ Normal(0, sqrt(2/fan_in)), zero biases, zero Adam moments."""
    rng = np.random.default_rng(seed)
    dtype = np.dtype(dtype)
    in_shape: tuple[int, ...] = (input_size, input_size, spec.in_channels)
    shapes = [in_shape] + infer_shapes(spec, size=input_size)
    params, m, v = [], [], []
    for ls, prev in zip(spec.layers, shapes):
        if ls.kind == "conv":
            c = prev[2]
            w = rng.normal(0.0, np.sqrt(2.0 / (9 * c)), size=(3, 3, c, ls.out_channels))
            b = np.zeros(ls.out_channels)
        elif ls.kind == "dense":
            d = prev[0]
            w = rng.normal(0.0, np.sqrt(2.0 / d), size=(d, ls.out_dim))
            b = np.zeros(ls.out_dim)
        else:
            params.append({})
            m.append({})
            v.append({})
            continue
        params.append({"w": w.astype(dtype), "b": b.astype(dtype)})
        m.append({"w": np.zeros_like(w, dtype=dtype), "b": np.zeros_like(b, dtype=dtype)})
        v.append({"w": np.zeros_like(w, dtype=dtype), "b": np.zeros_like(b, dtype=dtype)})
    return ModelParams(spec=spec, layer_params=params, adam_m=m, adam_v=v,
                       input_size=input_size)


def forward(params: ModelParams, clips: np.ndarray, train_mode: bool = False,
            dropout_seed: int = 0):
    """Run a (B, K, H, W) batch through the network.

    Returns (predictions, caches); caches is None in eval mode and holds
    per-layer backward state for train mode.
    """
    x = np.asarray(clips)
    if x.ndim != 4 or x.shape[1] != params.spec.in_channels:
        raise DataError(
            f"input must be (B, {params.spec.in_channels}, H, W), got {x.shape}"
        )
    x = np.ascontiguousarray(x.transpose(0, 2, 3, 1), dtype=params.dtype)
    rng = np.random.default_rng(dropout_seed)
    caches: list | None = [] if train_mode else None
    for ls, lp in zip(params.spec.layers, params.layer_params):
        if ls.kind == "conv":
            xp = layers.pad_same(x)
            y = layers.conv3x3_forward(xp, lp["w"], lp["b"])
            cache = xp
        elif ls.kind == "pool":
            y, idx = layers.maxpool2_forward(x)
            cache = idx
        elif ls.kind == "flatten":
            y = x.reshape(x.shape[0], -1)
            cache = x.shape
        elif ls.kind == "dense":
            y = layers.dense_forward(x, lp["w"], lp["b"])
            cache = x
        elif ls.kind == "leaky_relu":
            y, neg = layers.leaky_relu_forward(x, ls.alpha)
            cache = neg
        elif ls.kind == "tanh":
            y, cache = layers.tanh_forward(x)
        else:  # dropout
            if train_mode:
                y, mask = layers.dropout_forward(x, ls.rate, rng)
            else:
                y, mask = x, None
            cache = mask
        if train_mode:
            caches.append(cache)
        x = y
    return x, caches


def backward(params: ModelParams, caches: list, loss_grad: np.ndarray):
    """Backpropagate the loss gradient; returns per-layer parameter grads."""
    grads: list[dict[str, np.ndarray]] = [{} for _ in params.spec.layers]
    dy = np.asarray(loss_grad, dtype=params.dtype)
    first_param_idx = next(
        (i for i, ls in enumerate(params.spec.layers) if ls.kind in ("conv", "dense")), 0
    )
    for i in range(len(params.spec.layers) - 1, -1, -1):
        ls, lp, cache = params.spec.layers[i], params.layer_params[i], caches[i]
        if ls.kind == "conv":
            dy, dw, db = layers.conv3x3_backward(dy, cache, lp["w"], need_dx=i > first_param_idx)
            grads[i] = {"w": dw, "b": db}
        elif ls.kind == "pool":
            dy = layers.maxpool2_backward(dy, cache)
        elif ls.kind == "flatten":
            dy = dy.reshape(cache)
        elif ls.kind == "dense":
            dy, dw, db = layers.dense_backward(dy, cache, lp["w"])
            grads[i] = {"w": dw, "b": db}
        elif ls.kind == "leaky_relu":
            dy = layers.leaky_relu_backward(dy, cache, ls.alpha)
        elif ls.kind == "tanh":
            dy = layers.tanh_backward(dy, cache)
        else:
            dy = layers.dropout_backward(dy, cache, ls.rate)
    return grads


def mse_loss(pred: np.ndarray, target: np.ndarray):
    """Mean squared error over all elements, plus its gradient w.r.t. pred."""
    if pred.shape != target.shape:
        raise DataError(f"shape mismatch {pred.shape} vs {target.shape}")
    diff = pred - np.asarray(target, dtype=pred.dtype)
    loss = float(np.mean(diff.astype(np.float64) ** 2))
    return loss, diff * (2.0 / diff.size)


def outputs_to_features(params: ModelParams, outputs: np.ndarray) -> np.ndarray:
    """Undo target scaling and standardization on raw network outputs."""
    if params.standardizer is None:
        raise DataError("model has no standardizer attached")
    return params.standardizer.invert(np.asarray(outputs, dtype=np.float64) / params.target_scale)


def predict_features(params: ModelParams, clips: np.ndarray, batch_size: int = 64) -> np.ndarray:
    """Predict raw (unsanitized) sound features for a stack of clips."""
    outs = []
    for s in range(0, len(clips), batch_size):
        y, _ = forward(params, clips[s:s + batch_size], train_mode=False)
        outs.append(y)
    return outputs_to_features(params, np.concatenate(outs, axis=0))


def _layer_to_json(ls: LayerSpec) -> dict:
    d = {"kind": ls.kind}
    if ls.kind == "conv":
        d["out_channels"] = ls.out_channels
    elif ls.kind == "dense":
        d["out_dim"] = ls.out_dim
    elif ls.kind == "dropout":
        d["rate"] = ls.rate
    elif ls.kind == "leaky_relu":
        d["alpha"] = ls.alpha
    return d


def _layer_from_json(d: dict) -> LayerSpec:
    return LayerSpec(
        kind=d["kind"],
        out_channels=d.get("out_channels", 0),
        out_dim=d.get("out_dim", 0),
        rate=d.get("rate", 0.0),
        alpha=d.get("alpha", 0.0),
    )


def _write_array(f, arr: np.ndarray) -> None:
    f.write(arr.astype("<f8").tobytes())


def _read_array(f, shape, path) -> np.ndarray:
    count = int(np.prod(shape))
    raw = f.read(count * 8)
    if len(raw) != count * 8:
        raise DataError(f"{path}: truncated model file")
    return np.frombuffer(raw, dtype="<f8").reshape(shape)


def save_model(params: ModelParams, path) -> None:
    """Write a versioned binary model file (all tensors as LE float64)."""
    header = {
        "dtype": str(params.dtype),
        "in_channels": params.spec.in_channels,
        "input_size": params.input_size,
        "layers": [_layer_to_json(ls) for ls in params.spec.layers],
        "step": params.step,
        "target_scale": params.target_scale,
        "has_standardizer": params.standardizer is not None,
        "crop": None if params.crop is None
                else {"region": params.crop.region, "rect": list(params.crop.rect)},
    }
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as f:
        f.write(MODEL_MAGIC)
        f.write(struct.pack("<I", MODEL_FORMAT_VERSION))
        f.write(struct.pack("<I", len(blob)))
        f.write(blob)
        if params.standardizer is not None:
            _write_array(f, params.standardizer.mean)
            _write_array(f, params.standardizer.std)
        for group in (params.layer_params, params.adam_m, params.adam_v):
            for d in group:
                if d:
                    _write_array(f, d["w"])
                    _write_array(f, d["b"])


def load_model(path) -> ModelParams:
    """Read a model file written by save_model; inverse of it bit-for-bit."""
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != MODEL_MAGIC:
            raise DataError(f"{path}: bad model magic {magic!r}")
        raw = f.read(4)
        if len(raw) != 4:
            raise DataError(f"{path}: truncated model file")
        (version,) = struct.unpack("<I", raw)
        if version != MODEL_FORMAT_VERSION:
            raise DataError(
                f"{path}: unsupported model format version {version} "
                f"(expected {MODEL_FORMAT_VERSION})"
            )
        raw = f.read(4)
        if len(raw) != 4:
            raise DataError(f"{path}: truncated model file")
        (hlen,) = struct.unpack("<I", raw)
        blob = f.read(hlen)
        if len(blob) != hlen:
            raise DataError(f"{path}: truncated model file")
        try:
            header = json.loads(blob)
        except json.JSONDecodeError:
            raise DataError(f"{path}: corrupt model header") from None
        spec = NetworkSpec(
            in_channels=header["in_channels"],
            layers=tuple(_layer_from_json(d) for d in header["layers"]),
        )
        dtype = np.dtype(header["dtype"])
        input_size = header.get("input_size", CLIP_SIZE)
        std = None
        if header["has_standardizer"]:
            mean = _read_array(f, (OUTPUT_DIM,), path)
            stdv = _read_array(f, (OUTPUT_DIM,), path)
            std = Standardizer(mean=mean, std=stdv)
        blank = he_init(spec, seed=0, dtype=dtype, input_size=input_size)
        groups = []
        for group in (blank.layer_params, blank.adam_m, blank.adam_v):
            loaded = []
            for d in group:
                if d:
                    loaded.append({
                        "w": _read_array(f, d["w"].shape, path).astype(dtype),
                        "b": _read_array(f, d["b"].shape, path).astype(dtype),
                    })
                else:
                    loaded.append({})
            groups.append(loaded)
        crop = None
        if header["crop"] is not None:
            crop = CropSpec(header["crop"]["region"], tuple(header["crop"]["rect"]))
    return ModelParams(
        spec=spec,
        layer_params=groups[0],
        adam_m=groups[1],
        adam_v=groups[2],
        step=header["step"],
        standardizer=std,
        target_scale=header["target_scale"],
        crop=crop,
        input_size=input_size,
    )
