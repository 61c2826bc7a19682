"""Two-layer dense network for the merged quality-of-life classes.

Input -> hidden (leaky rectifier, negative slope 0.01) -> softmax over the
4 classes.  Dropout (p = 0.5) applies to the hidden layer during training
only.  Cross-entropy loss, Adam updates, and all randomness (weight init,
batch order, dropout masks) drawn from named substreams of the run seed,
so a run is bit-reproducible.

Bias vectors start at 1, matching the written form of the classifier at
step 0; they are trained like any other parameter afterwards.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import ComputationError
from ..seeds import substream
from .features import FeatureMatrix, MinMaxScaler, N_CLASSES

MODEL_FORMAT = "civicpulse-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class MLPConfig:
    """Hyperparameters; serialized into every model and report."""

    input_dim: int
    hidden_units: int = 32
    output_classes: int = N_CLASSES
    leaky_slope: float = 0.01
    dropout: float = 0.5
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    epochs: int = 500
    batch_size: int = 32
    seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, raw: dict) -> "MLPConfig":
        return cls(**raw)


def init_params(config: MLPConfig, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Glorot-uniform weights, biases at 1."""
    j, n, c = config.input_dim, config.hidden_units, config.output_classes
    limit1 = np.sqrt(6.0 / (j + n))
    limit2 = np.sqrt(6.0 / (n + c))
    return {
        "w1": rng.uniform(-limit1, limit1, size=(j, n)),
        "b1": np.ones(n),
        "w2": rng.uniform(-limit2, limit2, size=(n, c)),
        "b2": np.ones(c),
    }


def _leaky(z: np.ndarray, slope: float) -> np.ndarray:
    return np.where(z >= 0, z, slope * z)


def _log_softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def forward_proba(
    params: dict[str, np.ndarray], features: np.ndarray, leaky_slope: float
) -> np.ndarray:
    """Class probabilities (dropout disabled)."""
    hidden = _leaky(features @ params["w1"] + params["b1"], leaky_slope)
    return np.exp(_log_softmax(hidden @ params["w2"] + params["b2"]))


def loss_and_gradients(
    params: dict[str, np.ndarray],
    features: np.ndarray,
    class_indices: np.ndarray,
    leaky_slope: float,
    dropout_mask: np.ndarray | None = None,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean cross-entropy and its analytic gradients.

    ``dropout_mask`` is the pre-scaled (inverted-dropout) multiplier for
    the hidden activations; None means no dropout, as at evaluation time.
    """
    batch = features.shape[0]
    z1 = features @ params["w1"] + params["b1"]
    hidden = _leaky(z1, leaky_slope)
    if dropout_mask is not None:
        hidden = hidden * dropout_mask
    z2 = hidden @ params["w2"] + params["b2"]
    log_probs = _log_softmax(z2)
    loss = -log_probs[np.arange(batch), class_indices].mean()

    probs = np.exp(log_probs)
    delta2 = probs
    delta2[np.arange(batch), class_indices] -= 1.0
    delta2 /= batch
    grad_w2 = hidden.T @ delta2
    grad_b2 = delta2.sum(axis=0)
    delta_hidden = delta2 @ params["w2"].T
    if dropout_mask is not None:
        delta_hidden = delta_hidden * dropout_mask
    delta1 = delta_hidden * np.where(z1 >= 0, 1.0, leaky_slope)
    grad_w1 = features.T @ delta1
    grad_b1 = delta1.sum(axis=0)
    return float(loss), {"w1": grad_w1, "b1": grad_b1, "w2": grad_w2, "b2": grad_b2}


class _Adam:
    def __init__(self, params: dict[str, np.ndarray], config: MLPConfig):
        self.config = config
        self.step_count = 0
        self.first = {key: np.zeros_like(value) for key, value in params.items()}
        self.second = {key: np.zeros_like(value) for key, value in params.items()}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        cfg = self.config
        self.step_count += 1
        correction1 = 1.0 - cfg.beta1 ** self.step_count
        correction2 = 1.0 - cfg.beta2 ** self.step_count
        for key in params:
            self.first[key] = cfg.beta1 * self.first[key] + (1 - cfg.beta1) * grads[key]
            self.second[key] = (
                cfg.beta2 * self.second[key] + (1 - cfg.beta2) * grads[key] ** 2
            )
            m_hat = self.first[key] / correction1
            v_hat = self.second[key] / correction2
            params[key] -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)


@dataclass
class TrainedModel:
    """Network parameters plus everything needed to reproduce them."""

    params: dict[str, np.ndarray]
    config: MLPConfig
    scaler: MinMaxScaler
    feature_names: tuple[str, ...]
    final_loss: float

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "config": self.config.to_dict(),
            "scaler": self.scaler.to_dict(),
            "feature_names": list(self.feature_names),
            "final_loss": self.final_loss,
            "shapes": {key: list(value.shape) for key, value in self.params.items()},
            "weights": {key: value.ravel().tolist() for key, value in self.params.items()},
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "TrainedModel":
        if raw.get("format") != MODEL_FORMAT:
            raise ComputationError("not a recognized model file")
        params = {
            key: np.asarray(raw["weights"][key], dtype=np.float64).reshape(shape)
            for key, shape in raw["shapes"].items()
        }
        return cls(
            params=params,
            config=MLPConfig.from_dict(raw["config"]),
            scaler=MinMaxScaler.from_dict(raw["scaler"]),
            feature_names=tuple(raw["feature_names"]),
            final_loss=raw["final_loss"],
        )


def train(X: FeatureMatrix, config: MLPConfig) -> TrainedModel:
    """Fit the network on an (optionally oversampled) training matrix.

    Features are min-max scaled with statistics from this matrix; the
    scaler travels with the model so prediction accepts raw code rows.
    """
    if X.n_rows == 0:
        raise ComputationError("empty training matrix")
    if len(set(X.labels.tolist())) < 2:
        raise ComputationError("training needs >= 2 classes")
    if X.n_features != config.input_dim:
        raise ComputationError(
            f"config input_dim {config.input_dim} != {X.n_features} features"
        )

    scaler = MinMaxScaler.fit(X.features)
    features = scaler.transform(X.features)
    class_indices = X.labels - 1

    rng_init = substream(config.seed, "init")
    rng_batch = substream(config.seed, "batching")
    rng_dropout = substream(config.seed, "dropout")
    params = init_params(config, rng_init)
    optimizer = _Adam(params, config)

    n = features.shape[0]
    keep = 1.0 - config.dropout
    final_loss = float("nan")
    for epoch in range(config.epochs):
        order = rng_batch.permutation(n)
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            mask = None
            if config.dropout > 0.0:
                mask = (
                    rng_dropout.random((len(idx), config.hidden_units)) < keep
                ) / keep
            # Overflow on a diverging run is detected below via the loss;
            # silence numpy's warning rather than crashing earlier.
            with np.errstate(over="ignore", invalid="ignore"):
                loss, grads = loss_and_gradients(
                    params,
                    features[idx],
                    class_indices[idx],
                    config.leaky_slope,
                    dropout_mask=mask,
                )
            if not np.isfinite(loss):
                raise ComputationError(
                    f"training diverged: non-finite loss at epoch {epoch + 1}"
                )
            optimizer.step(params, grads)
            epoch_loss += loss
            n_batches += 1
        final_loss = epoch_loss / n_batches

    return TrainedModel(
        params=params,
        config=config,
        scaler=scaler,
        feature_names=X.feature_names,
        final_loss=final_loss,
    )


def predict_proba(model: TrainedModel, x: np.ndarray) -> np.ndarray:
    """Class probabilities for one raw feature row or a stack of rows."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    rows = x.reshape(1, -1) if single else x
    if rows.shape[1] != model.config.input_dim:
        raise ComputationError(
            f"expected {model.config.input_dim} features, got {rows.shape[1]}"
        )
    probs = forward_proba(model.params, model.scaler.transform(rows), model.config.leaky_slope)
    return probs[0] if single else probs


def predict_class(model: TrainedModel, x: np.ndarray) -> np.ndarray | int:
    """Predicted merged class (1..4)."""
    probs = predict_proba(model, x)
    if probs.ndim == 1:
        return int(np.argmax(probs)) + 1
    return np.argmax(probs, axis=1) + 1
