"""Mini-batch training loop with early stopping on validation loss."""

from __future__ import annotations

import time
from dataclasses import dataclass, fields

import numpy as np

from ..errors import DataError, NumericError
from .adam import adam_step
from .model import ModelParams, NetworkSpec, backward, default_network_spec, forward, mse_loss


@dataclass
class TrainConfig:
    learning_rate: float = 0.003
    batch_size: int = 32
    conv_dropout: float = 0.25
    dense_dropout: float = 0.5
    leaky_relu_alpha: float = 0.01
    patience: int = 5
    max_epochs: int = 80
    seed: int = 0
    val_fraction: float = 0.1
    dtype: str = "float32"
    target_train_mse: float = 0.0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.batch_size <= 0 or self.max_epochs <= 0:
            raise DataError("learning_rate, batch_size and max_epochs must be positive")
        for rate in (self.conv_dropout, self.dense_dropout):
            if not 0.0 <= rate < 1.0:
                raise DataError("dropout rates must lie in [0, 1)")
        if not 0.0 <= self.val_fraction < 1.0:
            raise DataError("val_fraction must lie in [0, 1)")
        if self.patience < 0:
            raise DataError("patience must be >= 0")
        np.dtype(self.dtype)


def parse_config_file(path) -> TrainConfig:
    """Parse a line-oriented "key = value" training config file."""
    types = {f.name: f.type for f in fields(TrainConfig)}
    kwargs = {}
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DataError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in types:
                raise DataError(f"{path}:{lineno}: unknown config key {key!r}")
            try:
                if types[key] == "int":
                    kwargs[key] = int(value)
                elif types[key] == "float":
                    kwargs[key] = float(value)
                else:
                    kwargs[key] = value
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad value for {key!r}") from None
    return TrainConfig(**kwargs)


@dataclass
class EpochStats:
    epoch: int
    train_mse: float
    val_mse: float
    elapsed_s: float


def write_train_log(path, history: list[EpochStats]) -> None:
    with open(path, "w") as f:
        f.write("epoch,train_mse,val_mse,elapsed_s\n")
        for h in history:
            f.write(f"{h.epoch},{h.train_mse!r},{h.val_mse!r},{h.elapsed_s:.3f}\n")


def evaluate_mse(params: ModelParams, dataset, split: str = "val",
                 batch_size: int = 64) -> float:
    """Eval-mode MSE over a dataset split ("val" or "train")."""
    count = dataset.val_count() if split == "val" else dataset.train_count()
    fetch = dataset.val_batch if split == "val" else dataset.train_batch
    total = 0.0
    elems = 0
    for s in range(0, count, batch_size):
        idx = np.arange(s, min(s + batch_size, count))
        x, y = fetch(idx)
        pred, _ = forward(params, x, train_mode=False)
        total += float(np.sum((pred.astype(np.float64) - y) ** 2))
        elems += pred.size
    return total / elems


def train(dataset, config: TrainConfig, spec: NetworkSpec | None = None):
    """Fit the network; returns (best-validation params, epoch history).

    Stops when validation MSE has not improved for `patience` epochs,
    when `max_epochs` is reached, or (if target_train_mse > 0) as soon
    as the epoch training MSE drops below that target.
    """
    from .model import he_init  # local to avoid import cycle in docs tools

    n_train = dataset.train_count()
    if n_train == 0:
        raise DataError("empty training dataset")
    if spec is None:
        spec = default_network_spec(
            dataset.k,
            conv_dropout=config.conv_dropout,
            dense_dropout=config.dense_dropout,
            alpha=config.leaky_relu_alpha,
        )
    probe_x, _ = dataset.train_batch(np.array([0]))
    params = he_init(spec, seed=config.seed, dtype=np.dtype(config.dtype),
                     input_size=probe_x.shape[-1])
    shuffle_rng = np.random.default_rng(config.seed + 0x5EED)

    history: list[EpochStats] = []
    best_val = np.inf
    best_params = params.copy()
    bad_epochs = 0
    t0 = time.perf_counter()
    global_step = 0

    for epoch in range(1, config.max_epochs + 1):
        order = shuffle_rng.permutation(n_train)
        sq_sum = 0.0
        elems = 0
        for s in range(0, n_train, config.batch_size):
            idx = order[s:s + config.batch_size]
            x, y = dataset.train_batch(idx)
            global_step += 1
            dropout_seed = config.seed * 1_000_003 + global_step
            pred, caches = forward(params, x, train_mode=True, dropout_seed=dropout_seed)
            loss, dloss = mse_loss(pred, y.astype(pred.dtype))
            if not np.isfinite(loss):
                raise NumericError(f"non-finite training loss at step {global_step}")
            sq_sum += loss * pred.size
            elems += pred.size
            grads = backward(params, caches, dloss)
            adam_step(params, grads, config.learning_rate)
        train_mse = sq_sum / elems
        val_mse = evaluate_mse(params, dataset, "val", batch_size=config.batch_size)
        if not np.isfinite(val_mse):
            raise NumericError(f"non-finite validation loss at epoch {epoch}")
        history.append(EpochStats(epoch, train_mse, val_mse, time.perf_counter() - t0))

        if val_mse < best_val:
            best_val = val_mse
            best_params = params.copy()
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs > config.patience:
                break
        if config.target_train_mse > 0.0 and train_mse < config.target_train_mse:
            break
    return best_params, history
