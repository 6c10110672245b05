"""Declarative topologies, a numpy forward pass, and analytic counters.

A topology is a flat list of layer specs (convolutions, activations, pixel
shuffles, skips, pooling).  The same declaration drives three things that
must agree with each other: the forward pass, the parameter counter, and
the multiply-accumulate counter.

Two topologies are built in:

* the ``expert``: a 16-block residual x4 super-resolution backbone with
  pixel-shuffle upsampling (1,517,571 learnable scalars);
* the ``predictor``: six 3x3 convolutions with leaky-ReLU activations and a
  global average pool producing the 33 degradation values.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import NumericFault, ShapeMismatch
from .moe import ExpertBank, TensorMap, WeightingNet, compute_weights, mix_params
from .space import VECTOR_LEN

LEAKY_SLOPE = 0.2


@dataclass(frozen=True)
class LayerSpec:
    kind: str                      # conv2d | leaky_relu | prelu | pixel_shuffle
    #                              # | global_avg_pool | add_skip
    name: str = ""                 # parameter prefix for learnable layers
    in_ch: int = 0
    out_ch: int = 0
    kernel: int = 3
    stride: int = 1
    slope: float = LEAKY_SLOPE     # leaky_relu negative slope
    factor: int = 2                # pixel_shuffle upscale
    skip_from: str = ""            # add_skip source label
    save_as: str = ""              # label this layer's output for later skips


@dataclass(frozen=True)
class NetworkTopology:
    name: str
    in_ch: int
    layers: tuple[LayerSpec, ...]

    def validate(self) -> None:
        ch = self.in_ch
        labels: dict[str, int] = {}
        names = set()
        for i, l in enumerate(self.layers):
            if l.kind == "conv2d":
                if l.kernel % 2 == 0 or l.stride < 1:
                    raise ShapeMismatch(f"{self.name}[{i}]: bad conv geometry")
                if l.in_ch != ch:
                    raise ShapeMismatch(
                        f"{self.name}[{i}] ({l.name}): expects {l.in_ch} channels, gets {ch}")
                if l.name in names:
                    raise ShapeMismatch(f"{self.name}: duplicate layer name {l.name!r}")
                names.add(l.name)
                ch = l.out_ch
            elif l.kind == "pixel_shuffle":
                if l.factor < 2 or ch % l.factor**2:
                    raise ShapeMismatch(f"{self.name}[{i}]: {ch} channels not divisible "
                                        f"by {l.factor}^2")
                ch //= l.factor**2
            elif l.kind == "add_skip":
                if l.skip_from not in labels:
                    raise ShapeMismatch(f"{self.name}[{i}]: unknown skip source {l.skip_from!r}")
                if labels[l.skip_from] != ch:
                    raise ShapeMismatch(f"{self.name}[{i}]: skip channel mismatch")
            elif l.kind == "prelu":
                if l.name in names:
                    raise ShapeMismatch(f"{self.name}: duplicate layer name {l.name!r}")
                names.add(l.name)
            elif l.kind not in ("leaky_relu", "global_avg_pool"):
                raise ShapeMismatch(f"{self.name}[{i}]: unknown layer kind {l.kind!r}")
            if l.save_as:
                labels[l.save_as] = ch

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        """Expected tensor name -> shape, in layer order."""
        shapes: dict[str, tuple[int, ...]] = {}
        ch = self.in_ch
        for l in self.layers:
            if l.kind == "conv2d":
                shapes[f"{l.name}.weight"] = (l.out_ch, l.in_ch, l.kernel, l.kernel)
                shapes[f"{l.name}.bias"] = (l.out_ch,)
                ch = l.out_ch
            elif l.kind == "prelu":
                shapes[f"{l.name}.slope"] = (ch,)
            elif l.kind == "pixel_shuffle":
                ch //= l.factor**2
        return shapes

    @property
    def returns_vector(self) -> bool:
        return bool(self.layers) and self.layers[-1].kind == "global_avg_pool"


# ---------------------------------------------------------------------------
# Built-in topologies
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def expert_topology() -> NetworkTopology:
    """x4 super-resolution backbone: 1,517,571 learnable parameters.

    Head conv, 16 identity-skip residual blocks, a long feature skip back to
    the head, two conv+pixel-shuffle x2 upsampling stages, a reconstruction
    conv, and the RGB projection.
    """
    layers: list[LayerSpec] = []
    conv = 0

    def c(in_ch: int, out_ch: int, **kw) -> LayerSpec:
        nonlocal conv
        spec = LayerSpec(kind="conv2d", name=f"conv{conv:02d}", in_ch=in_ch, out_ch=out_ch, **kw)
        conv += 1
        return spec

    layers.append(c(3, 64))
    layers.append(LayerSpec(kind="leaky_relu", save_as="head"))
    prev = "head"
    for b in range(16):
        layers.append(c(64, 64))
        layers.append(LayerSpec(kind="leaky_relu"))
        layers.append(c(64, 64))
        layers.append(LayerSpec(kind="add_skip", skip_from=prev, save_as=f"block{b}"))
        prev = f"block{b}"
    layers.append(LayerSpec(kind="add_skip", skip_from="head"))
    for _ in range(2):
        layers.append(c(64, 256))
        layers.append(LayerSpec(kind="pixel_shuffle", factor=2))
        layers.append(LayerSpec(kind="leaky_relu"))
    layers.append(c(64, 64))
    layers.append(LayerSpec(kind="leaky_relu"))
    layers.append(c(64, 3))
    topo = NetworkTopology(name="expert", in_ch=3, layers=tuple(layers))
    topo.validate()
    return topo


@lru_cache(maxsize=None)
def predictor_topology() -> NetworkTopology:
    """Degradation regressor: 6 convolutions + global average pooling -> 33 values.

    The channel plan (3-64-128-128-128s2-64-33) is sized so predictor plus
    weighting net land on the 0.47M-parameter / 18-GMac-at-256px budget.
    """
    plan = [(3, 64, 1), (64, 128, 1), (128, 128, 1), (128, 128, 2), (128, 64, 1), (64, 33, 1)]
    layers: list[LayerSpec] = []
    for i, (cin, cout, stride) in enumerate(plan):
        layers.append(LayerSpec(kind="conv2d", name=f"conv{i:02d}",
                                in_ch=cin, out_ch=cout, stride=stride))
        if i < len(plan) - 1:
            layers.append(LayerSpec(kind="leaky_relu"))
    layers.append(LayerSpec(kind="global_avg_pool"))
    topo = NetworkTopology(name="predictor", in_ch=3, layers=tuple(layers))
    topo.validate()
    return topo


# ---------------------------------------------------------------------------
# Counters
# ---------------------------------------------------------------------------

def count_params(topology: NetworkTopology) -> int:
    """Exact number of learnable scalars."""
    total = 0
    for shape in topology.param_shapes().values():
        n = 1
        for d in shape:
            n *= d
        total += n
    return total


def flops_by_layer(topology: NetworkTopology, height: int, width: int) -> list[float]:
    """Per-layer multiply-accumulate counts (convolutions only), in GMac."""
    h, w = height, width
    out = []
    for l in topology.layers:
        macs = 0
        if l.kind == "conv2d":
            pad = l.kernel // 2
            h = (h + 2 * pad - l.kernel) // l.stride + 1
            w = (w + 2 * pad - l.kernel) // l.stride + 1
            macs = l.kernel**2 * l.in_ch * l.out_ch * h * w
        elif l.kind == "pixel_shuffle":
            h, w = h * l.factor, w * l.factor
        out.append(macs / 1e9)
    return out


def count_flops(topology: NetworkTopology, height: int, width: int) -> float:
    """Total conv multiply-accumulates for one forward pass, in GMac."""
    return sum(flops_by_layer(topology, height, width))


# ---------------------------------------------------------------------------
# Forward pass
# ---------------------------------------------------------------------------

def _conv2d(x: np.ndarray, weight: np.ndarray, bias: np.ndarray, stride: int) -> np.ndarray:
    k = weight.shape[2]
    pad = k // 2
    xp = np.pad(x, ((0, 0), (pad, pad), (pad, pad)))
    win = np.lib.stride_tricks.sliding_window_view(xp, (k, k), axis=(1, 2))
    if stride > 1:
        win = win[:, ::stride, ::stride]
    out = np.tensordot(weight, win, axes=([1, 2, 3], [0, 3, 4]))
    return out + bias[:, None, None]


def _pixel_shuffle(x: np.ndarray, r: int) -> np.ndarray:
    c, h, w = x.shape
    x = x.reshape(c // r**2, r, r, h, w)
    return x.transpose(0, 3, 1, 4, 2).reshape(c // r**2, h * r, w * r)


def _check_params(topology: NetworkTopology, params: TensorMap) -> None:
    for name, shape in topology.param_shapes().items():
        if name not in params:
            raise ShapeMismatch(f"{topology.name}: missing tensor {name!r}")
        if tuple(params[name].shape) != shape:
            raise ShapeMismatch(f"{topology.name}: tensor {name!r} has shape "
                                f"{tuple(params[name].shape)}, expected {shape}")


def forward(topology: NetworkTopology, params: TensorMap, img: np.ndarray):
    """Run the network on an H x W x 3 image in [0, 1].

    Returns a 4H x 4W x 3 image clamped to [0, 1] for image-valued
    topologies, or a float vector for pooled ones.  Bitwise deterministic
    for fixed inputs.
    """
    _check_params(topology, params)
    x = np.ascontiguousarray(np.asarray(img, dtype=np.float32).transpose(2, 0, 1))
    if x.shape[0] != topology.in_ch:
        raise ShapeMismatch(f"{topology.name}: expected {topology.in_ch}-channel input")
    saved: dict[str, np.ndarray] = {}
    pooled: Optional[np.ndarray] = None
    for l in topology.layers:
        if l.kind == "conv2d":
            x = _conv2d(x, params[f"{l.name}.weight"], params[f"{l.name}.bias"], l.stride)
        elif l.kind == "leaky_relu":
            x = np.where(x >= 0, x, np.float32(l.slope) * x)
        elif l.kind == "prelu":
            slope = params[f"{l.name}.slope"][:, None, None]
            x = np.where(x >= 0, x, slope * x)
        elif l.kind == "pixel_shuffle":
            x = _pixel_shuffle(x, l.factor)
        elif l.kind == "add_skip":
            x = x + saved[l.skip_from]
        elif l.kind == "global_avg_pool":
            pooled = x.mean(axis=(1, 2))
        if l.save_as:
            saved[l.save_as] = x
    out = pooled if topology.returns_vector else x
    if not np.all(np.isfinite(out)):
        raise NumericFault(f"{topology.name}: non-finite values in output")
    if topology.returns_vector:
        return out.astype(np.float64)
    return np.clip(x.transpose(1, 2, 0), 0.0, 1.0).astype(np.float64)


def predict_degradation(img: np.ndarray, p_params: TensorMap) -> np.ndarray:
    """Estimate the 33 degradation values of an image."""
    return forward(predictor_topology(), p_params, img)


def super_resolve(
    img: np.ndarray,
    bank: ExpertBank,
    p_params: TensorMap,
    a_net: WeightingNet,
    override_v: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Degradation-adaptive x4 super-resolution.

    The degradation estimate conditions the expert weighting; passing
    ``override_v`` substitutes user-chosen degradation values for the
    estimate.  Exactly one expert-sized forward pass runs regardless of the
    bank size.  Returns (sr image, degradation estimate, expert factors).
    """
    if override_v is not None:
        v_hat = np.asarray(override_v, dtype=np.float64)
        if v_hat.shape != (VECTOR_LEN,):
            raise ShapeMismatch(f"override vector must have {VECTOR_LEN} entries")
    else:
        v_hat = predict_degradation(img, p_params)
    a = compute_weights(v_hat, a_net)
    adapted = mix_params(bank, a)
    sr = forward(expert_topology(), adapted, img)
    return sr, v_hat, a
