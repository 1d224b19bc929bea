"""Dense array helpers and seeded, splittable random streams.

All heavy arithmetic is delegated to numpy (float64 throughout). The helpers
here add the shape checking and the probability clamping that the rest of the
package relies on, plus a small splittable RNG wrapper so that per-sample
random draws are independent of batch order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Probabilities are clamped to [EPS, 1-EPS] before any logarithm so that
# cross-entropy stays finite at saturated predictions.
EPS = 1e-7


def split_rng(seed: int, *path) -> np.random.Generator:
    """Return a generator keyed by (seed, *path).

    Distinct paths give statistically independent streams; the same path
    always reproduces the same stream regardless of what other streams were
    drawn from in between.
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for part in path:
        if isinstance(part, str):
            # stable, platform-independent encoding of string tags
            entropy.extend(part.encode("utf-8"))
        else:
            entropy.append(int(part) & 0xFFFFFFFFFFFFFFFF)
    return np.random.default_rng(entropy)


@dataclass(frozen=True)
class Rng:
    """A named (seed, stream) pair; identical pairs yield identical draws."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        return split_rng(self.seed, self.stream)

    def split(self, *path) -> np.random.Generator:
        return split_rng(self.seed, self.stream, *path)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product with explicit shape validation."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError(f"matmul expects 2-D arrays, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    return a @ b


def sample_gaussian(rng: np.random.Generator, n: int, mean: float, std: float) -> np.ndarray:
    if std < 0:
        raise ValueError(f"std must be >= 0, got {std}")
    return rng.normal(loc=mean, scale=std, size=n)


def clamp_probs(p: np.ndarray) -> np.ndarray:
    return np.clip(p, EPS, 1.0 - EPS)


def sigmoid(z: np.ndarray) -> np.ndarray:
    # Stable sigmoid: evaluate exp on the negative side only.
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out
