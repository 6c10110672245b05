"""Expert banks and degradation-adaptive parameter fusion.

N expert networks share one topology; per input, a small two-layer net maps
the 33-value degradation vector to N weighting factors, and the expert
parameter sets are fused tensor-by-tensor into a single adapted set:

    adapted[name] = sum_i a_i * expert_i[name]

Fusing parameters before the (single) forward pass is what makes the scheme
non-linear: with activations between layers it is not equivalent to
averaging the experts' outputs.  The fusion costs N multiply-adds per
parameter, independent of image size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidVector, ShapeMismatch

#: name -> float32 array; insertion order is the canonical tensor order.
TensorMap = dict[str, np.ndarray]


def congruent(maps: list[TensorMap]) -> str | None:
    """Return the first offending tensor name if the maps disagree, else None."""
    if not maps:
        return None
    ref = maps[0]
    for other in maps[1:]:
        for name, t in ref.items():
            if name not in other or other[name].shape != t.shape:
                return name
        for name in other:
            if name not in ref:
                return name
    return None


@dataclass
class ExpertBank:
    """Immutable-by-convention collection of N congruent expert parameter sets."""

    experts: list[TensorMap]

    @property
    def n(self) -> int:
        return len(self.experts)

    def validate(self) -> None:
        if self.n < 1:
            raise ShapeMismatch("expert bank is empty")
        bad = congruent(self.experts)
        if bad is not None:
            raise ShapeMismatch(f"experts disagree on tensor {bad!r}")

    def param_count(self) -> int:
        return sum(t.size for t in self.experts[0].values())


@dataclass
class WeightingNet:
    """Two fully-connected layers mapping a 33-vector to N factors (no squashing)."""

    w1: np.ndarray  # (hidden, 33)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (N, hidden)
    b2: np.ndarray  # (N,)

    def validate(self) -> None:
        h = self.w1.shape[0]
        if self.b1.shape != (h,) or self.w2.shape[1] != h or self.b2.shape != (self.w2.shape[0],):
            raise ShapeMismatch("weighting net shapes are inconsistent")

    def param_count(self) -> int:
        return self.w1.size + self.b1.size + self.w2.size + self.b2.size

    def flops(self) -> int:
        """Multiply-accumulates of one evaluation."""
        return self.w1.size + self.w2.size


def compute_weights(v_hat: np.ndarray, net: WeightingNet) -> np.ndarray:
    """a = W2 @ relu(W1 @ v_hat + b1) + b2, evaluated in float64."""
    v_hat = np.asarray(v_hat, dtype=np.float64)
    if v_hat.shape != (net.w1.shape[1],):
        raise InvalidVector(f"expected {net.w1.shape[1]} values, got shape {v_hat.shape}")
    if not np.all(np.isfinite(v_hat)):
        raise InvalidVector("weighting input contains non-finite entries")
    hidden = np.maximum(net.w1.astype(np.float64) @ v_hat + net.b1.astype(np.float64), 0.0)
    return net.w2.astype(np.float64) @ hidden + net.b2.astype(np.float64)


def mixing_macs(bank: ExpertBank) -> int:
    """Multiply-adds one :func:`mix_params` call performs.

    Exactly one multiply-add per (expert, parameter) pair, i.e.
    N x total parameter count, independent of image size.
    """
    return bank.n * bank.param_count()


def mix_params(bank: ExpertBank, a: np.ndarray) -> TensorMap:
    """Fuse the bank into one adapted parameter set with factors ``a``.

    Covers every learnable tensor (weights, biases, parametric-activation
    slopes); a one-hot ``a`` therefore reproduces that expert bit-exactly.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    if a.size != bank.n:
        raise ShapeMismatch(f"got {a.size} factors for {bank.n} experts")
    bad = congruent(bank.experts)
    if bad is not None:
        raise ShapeMismatch(f"experts disagree on tensor {bad!r}")
    mixed: TensorMap = {}
    for name in bank.experts[0]:
        acc = a[0] * bank.experts[0][name].astype(np.float64)
        for i in range(1, bank.n):
            acc += a[i] * bank.experts[i][name].astype(np.float64)
        mixed[name] = acc.astype(np.float32)
    return mixed
