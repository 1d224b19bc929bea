"""Small multi-label MLP with hand-derived gradients.

ReLU hidden layers, K independent sigmoid outputs, Adam updates, a one-cycle
learning-rate schedule and an EMA parameter shadow. Everything is plain
numpy; backward() recomputes the forward activations, which is cheap at this
scale and keeps the call signatures stateless.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .numeric import EPS, clamp_probs, sigmoid, split_rng


@dataclass
class Classifier:
    layer_sizes: list[int]
    weights: list[np.ndarray]  # weights[l]: (fan_in, fan_out)
    biases: list[np.ndarray]

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_outputs(self) -> int:
        return self.layer_sizes[-1]

    def copy(self) -> "Classifier":
        return Classifier(
            list(self.layer_sizes),
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
        )


@dataclass
class Gradients:
    weights: list[np.ndarray]
    biases: list[np.ndarray]


def init(layer_sizes, seed: int) -> Classifier:
    """Gaussian weights scaled by 1/sqrt(fan_in); zero biases."""
    sizes = [int(s) for s in layer_sizes]
    if len(sizes) < 2:
        raise ValueError(f"need at least input and output sizes, got {sizes}")
    if any(s < 1 for s in sizes):
        raise ValueError(f"layer sizes must be positive, got {sizes}")
    weights, biases = [], []
    for layer, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        rng = split_rng(seed, "init", layer)
        weights.append(rng.standard_normal((fan_in, fan_out)) / math.sqrt(fan_in))
        biases.append(np.zeros(fan_out))
    return Classifier(sizes, weights, biases)


def _forward_cache(c: Classifier, batch: np.ndarray):
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != c.n_inputs:
        raise ValueError(
            f"batch shape {x.shape} incompatible with input size {c.n_inputs}"
        )
    activations = [x]
    h = x
    for w, b in zip(c.weights[:-1], c.biases[:-1]):
        h = np.maximum(0.0, h @ w + b)
        activations.append(h)
    logits = h @ c.weights[-1] + c.biases[-1]
    p_raw = sigmoid(logits)
    return activations, p_raw


def forward(c: Classifier, batch: np.ndarray) -> np.ndarray:
    """Probabilities (B, K), clamped away from 0 and 1."""
    _, p_raw = _forward_cache(c, batch)
    return clamp_probs(p_raw)


def backward(c: Classifier, batch: np.ndarray, grad_output: np.ndarray) -> Gradients:
    """Exact gradients of the forward pass given d(loss)/d(probabilities)."""
    activations, p_raw = _forward_cache(c, batch)
    g = np.asarray(grad_output, dtype=np.float64)
    if g.shape != p_raw.shape:
        raise ValueError(f"grad_output shape {g.shape}, expected {p_raw.shape}")
    # Clamped entries have zero derivative through the clamp.
    inside = (p_raw > EPS) & (p_raw < 1.0 - EPS)
    dz = g * p_raw * (1.0 - p_raw) * inside
    gw = [np.empty(0)] * len(c.weights)
    gb = [np.empty(0)] * len(c.biases)
    for layer in range(len(c.weights) - 1, -1, -1):
        a_prev = activations[layer]
        gw[layer] = a_prev.T @ dz
        gb[layer] = dz.sum(axis=0)
        if layer > 0:
            dh = dz @ c.weights[layer].T
            dz = dh * (activations[layer] > 0)
    return Gradients(gw, gb)


@dataclass
class OptimState:
    m_w: list[np.ndarray]
    v_w: list[np.ndarray]
    m_b: list[np.ndarray]
    v_b: list[np.ndarray]
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def init_opt(c: Classifier, beta1: float = 0.9, beta2: float = 0.999) -> OptimState:
    return OptimState(
        m_w=[np.zeros_like(w) for w in c.weights],
        v_w=[np.zeros_like(w) for w in c.weights],
        m_b=[np.zeros_like(b) for b in c.biases],
        v_b=[np.zeros_like(b) for b in c.biases],
        beta1=beta1,
        beta2=beta2,
    )


def adam_step(c: Classifier, opt: OptimState, grads: Gradients, lr: float) -> None:
    """One Adam update with bias correction; mutates c and opt in place."""
    for name, g in [(f"W{i}", gw) for i, gw in enumerate(grads.weights)] + [
        (f"b{i}", gb) for i, gb in enumerate(grads.biases)
    ]:
        if not np.isfinite(g).all():
            raise ValueError(f"non-finite gradient for parameter {name}")
    opt.step += 1
    bc1 = 1.0 - opt.beta1**opt.step
    bc2 = 1.0 - opt.beta2**opt.step
    params = list(zip(c.weights, grads.weights, opt.m_w, opt.v_w)) + list(
        zip(c.biases, grads.biases, opt.m_b, opt.v_b)
    )
    for theta, g, m, v in params:
        m *= opt.beta1
        m += (1.0 - opt.beta1) * g
        v *= opt.beta2
        v += (1.0 - opt.beta2) * g * g
        theta -= lr * (m / bc1) / (np.sqrt(v / bc2) + opt.eps)


@dataclass(frozen=True)
class LrSchedule:
    max_lr: float
    total_steps: int
    warmup_fraction: float = 0.3
    start_div: float = 25.0
    final_div: float = 1e4

    def __post_init__(self):
        if not (0 < self.warmup_fraction < 1):
            raise ValueError("warmup_fraction must be in (0, 1)")
        if self.start_div <= 1 or self.final_div <= 1:
            raise ValueError("divisors must be > 1")
        if self.total_steps < 2:
            raise ValueError("total_steps must be >= 2")

    @property
    def ramp_steps(self) -> int:
        return max(1, int(round(self.warmup_fraction * self.total_steps)))


def lr_at(s: LrSchedule, step: int) -> float:
    """Cosine ramp to max_lr, then cosine anneal to max_lr/final_div."""
    if not (0 <= step < s.total_steps):
        raise ValueError(f"step {step} outside [0, {s.total_steps})")
    start = s.max_lr / s.start_div
    final = s.max_lr / s.final_div
    ramp = s.ramp_steps
    if step < ramp:
        t = step / ramp
        return start + (s.max_lr - start) * 0.5 * (1.0 - math.cos(math.pi * t))
    t = (step - ramp) / max(1, s.total_steps - 1 - ramp)
    return final + (s.max_lr - final) * 0.5 * (1.0 + math.cos(math.pi * t))


@dataclass
class EmaShadow:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    decay: float

    def as_classifier(self, layer_sizes) -> Classifier:
        return Classifier(list(layer_sizes), [w.copy() for w in self.weights],
                          [b.copy() for b in self.biases])


def init_ema(c: Classifier, decay: float) -> EmaShadow:
    if not (0 <= decay <= 1):
        raise ValueError(f"decay must be in [0, 1], got {decay}")
    return EmaShadow([w.copy() for w in c.weights], [b.copy() for b in c.biases], decay)


def ema_update(e: EmaShadow, c: Classifier) -> EmaShadow:
    d = e.decay
    for shadow, live in zip(e.weights, c.weights):
        shadow *= d
        shadow += (1.0 - d) * live
    for shadow, live in zip(e.biases, c.biases):
        shadow *= d
        shadow += (1.0 - d) * live
    return e


def save_checkpoint(path, c: Classifier, ema: EmaShadow, opt: OptimState) -> None:
    doc = {
        "layer_sizes": list(c.layer_sizes),
        "weights": [w.tolist() for w in c.weights],
        "biases": [b.tolist() for b in c.biases],
        "ema_weights": [w.tolist() for w in ema.weights],
        "ema_biases": [b.tolist() for b in ema.biases],
        "opt_state": {
            "m_w": [m.tolist() for m in opt.m_w],
            "v_w": [v.tolist() for v in opt.v_w],
            "m_b": [m.tolist() for m in opt.m_b],
            "v_b": [v.tolist() for v in opt.v_b],
            "step": opt.step,
            "beta1": opt.beta1,
            "beta2": opt.beta2,
            "eps": opt.eps,
        },
        "ema_decay": ema.decay,
        "step": opt.step,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_checkpoint(path) -> tuple[Classifier, EmaShadow, OptimState]:
    with open(path) as fh:
        doc = json.load(fh)
    sizes = doc["layer_sizes"]
    c = Classifier(
        sizes,
        [np.asarray(w, dtype=np.float64) for w in doc["weights"]],
        [np.asarray(b, dtype=np.float64) for b in doc["biases"]],
    )
    ema = EmaShadow(
        [np.asarray(w, dtype=np.float64) for w in doc["ema_weights"]],
        [np.asarray(b, dtype=np.float64) for b in doc["ema_biases"]],
        float(doc.get("ema_decay", 0.9997)),
    )
    o = doc["opt_state"]
    opt = OptimState(
        m_w=[np.asarray(m, dtype=np.float64) for m in o["m_w"]],
        v_w=[np.asarray(v, dtype=np.float64) for v in o["v_w"]],
        m_b=[np.asarray(m, dtype=np.float64) for m in o["m_b"]],
        v_b=[np.asarray(v, dtype=np.float64) for v in o["v_b"]],
        step=int(o["step"]),
        beta1=float(o["beta1"]),
        beta2=float(o["beta2"]),
        eps=float(o["eps"]),
    )
    return c, ema, opt
