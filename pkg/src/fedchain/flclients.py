"""Simulated client fleet: synthetic regression datasets, local training,
and scripted adversarial behaviors.

Training runs in ordinary float arithmetic; fixed-point quantization happens
once, at the submission boundary. All randomness flows from a root seed
through counter-based Philox streams keyed by (purpose, client, round), so
no global RNG state exists anywhere.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimMismatch
from .keccak import keccak256
from .numerics import GradientVector

BEHAVIOR_KINDS = ("honest", "negator", "scaler", "freerider", "dropout")

# stream purposes for the counter-based RNG
STREAM_TRUE_WEIGHTS = 1
STREAM_FEATURES = 2
STREAM_NOISE = 3
STREAM_DROPOUT = 4


def rng_stream(root_seed: int, purpose: int, a: int = 0, b: int = 0) -> np.random.Generator:
    """Independent deterministic stream addressed by (purpose, a, b)."""
    key = [root_seed & 0xFFFFFFFFFFFFFFFF, (root_seed >> 64) & 0xFFFFFFFFFFFFFFFF]
    bits = np.random.Philox(key=key, counter=[purpose, a, b, 0])
    return np.random.Generator(bits)


def make_client_id(index: int) -> bytes:
    """Simulator-assigned 20-byte client identifier."""
    return keccak256(b"fedchain client %d" % index)[:20]


@dataclass
class SyntheticDataset:
    """Linear-regression data: targets = features @ true_weights + noise."""

    features: np.ndarray
    targets: np.ndarray
    seed: int
    true_weights: np.ndarray
    noise_scale: float

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @classmethod
    def generate(
        cls,
        seed: int,
        n_samples: int,
        dim: int,
        noise_scale: float,
        true_weights: Optional[np.ndarray] = None,
        client_index: int = 0,
    ) -> "SyntheticDataset":
        """Reproducible dataset; clients of one scenario share true_weights."""
        if true_weights is None:
            true_weights = sample_true_weights(seed, dim)
        features = rng_stream(seed, STREAM_FEATURES, client_index).standard_normal(
            (n_samples, dim)
        )
        noise = rng_stream(seed, STREAM_NOISE, client_index).standard_normal(n_samples)
        targets = features @ true_weights + noise_scale * noise
        return cls(
            features=features,
            targets=targets,
            seed=seed,
            true_weights=np.asarray(true_weights, dtype=float),
            noise_scale=noise_scale,
        )


def sample_true_weights(seed: int, dim: int) -> np.ndarray:
    return rng_stream(seed, STREAM_TRUE_WEIGHTS).standard_normal(dim)


def local_train(
    model: GradientVector, dataset: SyntheticDataset, epochs: int, lr: float
) -> GradientVector:
    """Full-batch gradient descent on mean half-squared error.

    Returns the parameter delta w_local - w_global, quantized half-to-even
    at the end. The loss is mean_i 0.5 * (y_i - x_i . w)^2, so one step
    moves w by -lr * X^T (X w - y) / n.
    """
    if model.dim != dataset.dim:
        raise DimMismatch(f"model dim {model.dim} != data dim {dataset.dim}")
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    if lr <= 0:
        raise ValueError("learning rate must be positive")
    start = np.array(model.to_floats())
    w = start.copy()
    X, y = dataset.features, dataset.targets
    n = dataset.n_samples
    for _ in range(epochs):
        gradient = X.T @ (X @ w - y) / n
        w = w - lr * gradient
    return GradientVector.from_floats(w - start)


@dataclass(frozen=True)
class ClientBehavior:
    """Per-client scripted behavior; fixed for the whole scenario."""

    kind: str = "honest"
    scale: int = 100        # scaler: submits scale * g
    dropout_q: float = 0.5  # dropout: participates with probability q

    def __post_init__(self) -> None:
        if self.kind not in BEHAVIOR_KINDS:
            raise ValueError(f"unknown behavior {self.kind!r}")
        if not 0.0 <= self.dropout_q <= 1.0:
            raise ValueError("dropout probability must lie in [0, 1]")
        if self.scale < 1:
            raise ValueError("scale must be a positive integer")


def act(
    behavior: ClientBehavior,
    honest_update: GradientVector,
    rng: Optional[np.random.Generator] = None,
) -> Optional[GradientVector]:
    """What actually goes on the wire for a client this round.

    Returns None when the client sits the round out (dropout). The dropout
    draw comes from the caller-provided per-(client, round) stream.
    """
    if behavior.kind == "honest":
        return honest_update
    if behavior.kind == "negator":
        return honest_update.negate()
    if behavior.kind == "scaler":
        return honest_update.scale_int(behavior.scale)
    if behavior.kind == "freerider":
        return GradientVector.zeros(honest_update.dim)
    if behavior.kind == "dropout":
        if rng is None:
            raise ValueError("dropout behavior needs an rng stream")
        return honest_update if rng.random() < behavior.dropout_q else None
    raise AssertionError(behavior.kind)
