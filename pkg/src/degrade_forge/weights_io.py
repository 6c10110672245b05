"""Binary weight-file format and the bundled fixture-weight generator.

Layout (all integers little-endian):

    magic   6 bytes  b"DASRW1"
    version u32      currently 1
    count   u32      number of tensors
    tensor  repeated: name_len u16, name bytes (utf-8), dtype u8 (0=float32),
                      rank u8, dims u32 * rank, raw little-endian values
    digest  8 bytes  blake2b-64 of every preceding byte

Tensor order is preserved, so load followed by save is byte-identical.
Bundle-level helpers split the flat namespace into the expert bank
(``expert<i>.*``), the degradation predictor (``predictor.*``) and the
two-layer weighting net (``weighting.*``).
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .engine import expert_topology, predictor_topology
from .errors import CorruptWeights, ShapeMismatch
from .moe import ExpertBank, TensorMap, WeightingNet
from .space import VECTOR_LEN

MAGIC = b"DASRW1"
VERSION = 1
_DTYPE_F32 = 0


def _digest(data: bytes) -> bytes:
    return hashlib.blake2b(data, digest_size=8).digest()


def save_tensors(path, tensors: TensorMap) -> None:
    body = bytearray()
    body += MAGIC
    body += struct.pack("<II", VERSION, len(tensors))
    for name, tensor in tensors.items():
        raw = np.ascontiguousarray(tensor, dtype="<f4")
        encoded = name.encode("utf-8")
        body += struct.pack("<H", len(encoded)) + encoded
        body += struct.pack("<BB", _DTYPE_F32, raw.ndim)
        body += struct.pack(f"<{raw.ndim}I", *raw.shape)
        body += raw.tobytes()
    body += _digest(bytes(body))
    Path(path).write_bytes(bytes(body))


def load_tensors(path) -> TensorMap:
    data = Path(path).read_bytes()
    if len(data) < len(MAGIC) + 16 or data[:len(MAGIC)] != MAGIC:
        raise CorruptWeights(f"{path}: not a weight file (bad magic)")
    if _digest(data[:-8]) != data[-8:]:
        raise CorruptWeights(f"{path}: checksum mismatch")
    version, count = struct.unpack_from("<II", data, len(MAGIC))
    if version != VERSION:
        raise CorruptWeights(f"{path}: unsupported version {version}")
    offset = len(MAGIC) + 8
    tensors: TensorMap = {}
    for _ in range(count):
        (name_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        name = data[offset:offset + name_len].decode("utf-8")
        offset += name_len
        dtype, rank = struct.unpack_from("<BB", data, offset)
        offset += 2
        if dtype != _DTYPE_F32:
            raise CorruptWeights(f"{path}: unknown dtype tag {dtype}")
        dims = struct.unpack_from(f"<{rank}I", data, offset)
        offset += 4 * rank
        n = int(np.prod(dims, dtype=np.int64)) if rank else 1
        values = np.frombuffer(data, dtype="<f4", count=n, offset=offset).reshape(dims)
        offset += 4 * n
        if name in tensors:
            raise CorruptWeights(f"{path}: duplicate tensor {name!r}")
        tensors[name] = values.copy()
    if offset != len(data) - 8:
        raise CorruptWeights(f"{path}: trailing garbage after tensors")
    return tensors


# ---------------------------------------------------------------------------
# Bundles: expert bank + predictor + weighting net in one file
# ---------------------------------------------------------------------------

@dataclass
class ModelBundle:
    bank: ExpertBank
    predictor: TensorMap
    weighting: WeightingNet

    def flatten(self) -> TensorMap:
        flat: TensorMap = {}
        for i, expert in enumerate(self.bank.experts):
            for name, t in expert.items():
                flat[f"expert{i}.{name}"] = t
        for name, t in self.predictor.items():
            flat[f"predictor.{name}"] = t
        flat["weighting.fc0.weight"] = self.weighting.w1
        flat["weighting.fc0.bias"] = self.weighting.b1
        flat["weighting.fc1.weight"] = self.weighting.w2
        flat["weighting.fc1.bias"] = self.weighting.b2
        return flat


def save_bundle(path, bundle: ModelBundle) -> None:
    save_tensors(path, bundle.flatten())


def load_bundle(path) -> ModelBundle:
    """Load and structurally validate a bundle against the built-in topologies."""
    flat = load_tensors(path)
    experts: dict[int, TensorMap] = {}
    predictor: TensorMap = {}
    weighting: TensorMap = {}
    for name, t in flat.items():
        scope, _, rest = name.partition(".")
        if scope.startswith("expert"):
            experts.setdefault(int(scope[6:]), {})[rest] = t
        elif scope == "predictor":
            predictor[rest] = t
        elif scope == "weighting":
            weighting[rest] = t
        else:
            raise CorruptWeights(f"{path}: unknown tensor scope {scope!r}")
    if not experts or sorted(experts) != list(range(len(experts))):
        raise CorruptWeights(f"{path}: expert indices are not contiguous from 0")

    bank = ExpertBank(experts=[experts[i] for i in sorted(experts)])
    bank.validate()
    expected = expert_topology().param_shapes()
    for i, expert in enumerate(bank.experts):
        if {n: tuple(t.shape) for n, t in expert.items()} != expected:
            raise ShapeMismatch(f"expert{i} tensors do not match the expert topology")
    p_expected = predictor_topology().param_shapes()
    if {n: tuple(t.shape) for n, t in predictor.items()} != p_expected:
        raise ShapeMismatch("predictor tensors do not match the predictor topology")

    try:
        net = WeightingNet(w1=weighting["fc0.weight"], b1=weighting["fc0.bias"],
                           w2=weighting["fc1.weight"], b2=weighting["fc1.bias"])
    except KeyError as exc:
        raise ShapeMismatch(f"weighting net tensor missing: {exc}") from exc
    net.validate()
    if net.w1.shape[1] != VECTOR_LEN or net.w2.shape[0] != bank.n:
        raise ShapeMismatch("weighting net does not map 33 values to one factor per expert")
    return ModelBundle(bank=bank, predictor=predictor, weighting=net)


# ---------------------------------------------------------------------------
# Fixture weights (random but well-scaled; no trained checkpoints required)
# ---------------------------------------------------------------------------

def _random_params(rng: np.random.Generator, shapes: dict[str, tuple[int, ...]],
                   weight_scale: float) -> TensorMap:
    params: TensorMap = {}
    for name, shape in shapes.items():
        if name.endswith(".bias"):
            params[name] = np.zeros(shape, dtype=np.float32)
        else:
            fan_in = int(np.prod(shape[1:])) if len(shape) > 1 else shape[0]
            std = weight_scale * np.sqrt(2.0 / fan_in)
            params[name] = rng.normal(0.0, std, size=shape).astype(np.float32)
    return params


def make_fixture_bundle(seed: int = 0, n_experts: int = 5, hidden: int = 64) -> ModelBundle:
    """Seeded random weights for exercising every inference path.

    Conv weights are scaled down so 16 residual accumulations stay tame;
    the weighting net is biased toward uniform mixing with a mild
    dependence on the degradation input.
    """
    rng = np.random.default_rng(seed)
    bank = ExpertBank(experts=[
        _random_params(rng, expert_topology().param_shapes(), weight_scale=0.1)
        for _ in range(n_experts)
    ])
    predictor = _random_params(rng, predictor_topology().param_shapes(), weight_scale=0.5)
    net = WeightingNet(
        w1=rng.normal(0.0, 0.3, size=(hidden, VECTOR_LEN)).astype(np.float32),
        b1=np.zeros(hidden, dtype=np.float32),
        w2=rng.normal(0.0, 0.05, size=(n_experts, hidden)).astype(np.float32),
        b2=np.full(n_experts, 1.0 / n_experts, dtype=np.float32),
    )
    return ModelBundle(bank=bank, predictor=predictor, weighting=net)
