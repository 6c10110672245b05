"""Three-level degradation space: sampling and the 33-slot vector codec.

The space is split into levels S1/S2 (single-stage) and S3 (two-stage).
Every realized degradation is described by structured parameters
(:class:`DegradationParams`) and has a lossless encoding as a 33-value
vector in [0, 1], laid out as follows (1-indexed):

    v1-v4    stage-1 blur: kernel half-size m, sigma1, sigma2, theta
    v5-v8    stage-2 blur (zero when absent or skipped)
    v9-v10   stage-2 sinc filter: half-size m, cutoff omega_c
    v11      stage-1 resize scale
    v12-v14  stage-1 resize mode one-hot [area, bilinear, bicubic]
    v15      stage-2 resize scale
    v16-v18  stage-2 resize mode one-hot
    v19      stage-1 noise level (range depends on realized kind)
    v20      stage-1 gray-noise flag
    v21-v22  stage-1 noise kind one-hot [gaussian, poisson]
    v23-v26  stage-2 noise level / gray / kind
    v27      stage-1 JPEG quality
    v28      stage-2 JPEG quality
    v29-v30  stage-2 resize/JPEG operating order one-hot
    v31-v33  final resize mode one-hot

Scalar slots are normalized by global (across-level union) ranges so a
vector is interpretable without knowing its level.  Slots belonging to
inactive operations are exactly zero.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .errors import InvalidVector, RangeViolation

VECTOR_LEN = 33

RESIZE_MODES = ("area", "bilinear", "bicubic")
NOISE_KINDS = ("gaussian", "poisson")
JPEG_ORDERS = ("resize-then-jpeg", "jpeg-then-resize")

#: Threshold above which a stage-2 slot counts as active during decode.
#: encode writes exact zeros for inactive slots, so this is safe.
ACTIVITY_EPS = 1e-6


class Level(Enum):
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"

    @property
    def second_order(self) -> bool:
        return self is Level.S3


# ---------------------------------------------------------------------------
# Schema
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StageRanges:
    """Per-level, per-stage sampling ranges (Table-style configuration)."""

    sigma: tuple[float, float]
    scale: tuple[float, float]
    resize_updownkeep: tuple[float, float, float]
    gaussian_sigma: tuple[float, float]
    poisson_scale: tuple[float, float]
    jpeg_quality: tuple[int, int]


@dataclass(frozen=True)
class LevelRanges:
    stage1: StageRanges
    stage2: Optional[StageRanges] = None


@dataclass(frozen=True)
class DegradationSchema:
    """Sampling probabilities plus per-level ranges and derived global ranges."""

    level_probs: tuple[float, float, float] = (0.3, 0.3, 0.4)
    iso_prob: float = 0.65                 # isotropic vs anisotropic blur
    gray_prob: float = 0.4                 # shared-realization (gray) noise
    gaussian_prob: float = 0.5             # gaussian vs poisson noise
    stage2_blur_skip_prob: float = 0.2     # S3 stage 2 only
    sinc_prob: float = 0.8                 # S3 stage 2 only
    order_probs: tuple[float, float] = (0.5, 0.5)  # resize-then-jpeg / jpeg-then-resize
    kernel_half: tuple[int, int] = (3, 10)
    theta: tuple[float, float] = (-math.pi, math.pi)
    omega_c: tuple[float, float] = (math.pi / 3, math.pi)
    levels: dict = field(default_factory=lambda: dict(_DEFAULT_LEVELS))

    # -- global (across-level union) ranges used for normalization ---------

    def _union(self, stage: int, attr: str) -> tuple[float, float]:
        ranges = []
        for lv in Level:
            stage_ranges = self.levels[lv].stage1 if stage == 1 else self.levels[lv].stage2
            if stage_ranges is not None:
                ranges.append(getattr(stage_ranges, attr))
        return (min(r[0] for r in ranges), max(r[1] for r in ranges))

    def global_sigma(self, stage: int) -> tuple[float, float]:
        return self._union(stage, "sigma")

    def global_scale(self, stage: int) -> tuple[float, float]:
        return self._union(stage, "scale")

    def global_gaussian(self, stage: int) -> tuple[float, float]:
        return self._union(stage, "gaussian_sigma")

    def global_poisson(self, stage: int) -> tuple[float, float]:
        return self._union(stage, "poisson_scale")

    def global_quality(self, stage: int) -> tuple[float, float]:
        return self._union(stage, "jpeg_quality")

    def global_noise(self, stage: int, kind: str) -> tuple[float, float]:
        return self.global_gaussian(stage) if kind == "gaussian" else self.global_poisson(stage)

    def validate(self) -> None:
        for probs in (self.level_probs, self.order_probs):
            if abs(sum(probs) - 1.0) > 1e-9:
                raise ValueError(f"probabilities {probs} do not sum to 1")
        for lv, ranges in self.levels.items():
            stages = [ranges.stage1] + ([ranges.stage2] if ranges.stage2 else [])
            for sr in stages:
                if abs(sum(sr.resize_updownkeep) - 1.0) > 1e-9:
                    raise ValueError(f"{lv}: resize probabilities do not sum to 1")
                for name in ("sigma", "scale", "gaussian_sigma", "poisson_scale", "jpeg_quality"):
                    lo, hi = getattr(sr, name)
                    if not lo < hi:
                        raise ValueError(f"{lv}: {name} range [{lo}, {hi}] is empty")
        covered = sorted(i for s in SLOTS for i in s.indices)
        if covered != list(range(1, VECTOR_LEN + 1)):
            raise ValueError("slot layout does not partition 1..33")


_DEFAULT_LEVELS = {
    Level.S1: LevelRanges(
        stage1=StageRanges(
            sigma=(0.2, 0.8),
            scale=(0.85, 1.2),
            resize_updownkeep=(0.1, 0.2, 0.7),
            gaussian_sigma=(1.0, 10.0),
            poisson_scale=(0.05, 0.5),
            jpeg_quality=(90, 95),
        ),
    ),
    Level.S2: LevelRanges(
        stage1=StageRanges(
            sigma=(0.2, 1.5),
            scale=(0.5, 1.2),
            resize_updownkeep=(0.3, 0.4, 0.3),
            gaussian_sigma=(1.0, 20.0),
            poisson_scale=(0.05, 1.5),
            jpeg_quality=(50, 95),
        ),
    ),
    Level.S3: LevelRanges(
        stage1=StageRanges(
            sigma=(0.2, 3.0),
            scale=(0.15, 1.5),
            resize_updownkeep=(0.2, 0.7, 0.1),
            gaussian_sigma=(1.0, 30.0),
            poisson_scale=(0.05, 3.0),
            jpeg_quality=(30, 95),
        ),
        stage2=StageRanges(
            sigma=(0.2, 1.5),
            scale=(0.3, 1.2),
            resize_updownkeep=(0.3, 0.4, 0.3),
            gaussian_sigma=(1.0, 25.0),
            poisson_scale=(0.05, 2.5),
            jpeg_quality=(30, 95),
        ),
    ),
}

DEFAULT_SCHEMA = DegradationSchema()


# ---------------------------------------------------------------------------
# Structured degradation parameters
# ---------------------------------------------------------------------------

@dataclass
class BlurSpec:
    active: bool = True
    kernel_half: int = 3          # kernel size is 2m+1
    sigma1: float = 0.2
    sigma2: float = 0.2
    theta: float = 0.0
    sinc_active: bool = False     # S3 stage 2 only
    sinc_kernel_half: int = 3
    omega_c: float = math.pi


@dataclass
class ResizeSpec:
    scale: float = 1.0
    mode: str = "area"


@dataclass
class NoiseSpec:
    kind: str = "gaussian"
    level: float = 1.0            # sigma on the 0-255 scale, or poisson scale
    gray: bool = False


@dataclass
class JpegSpec:
    quality: int = 95
    order: Optional[str] = None              # S3 stage 2 only
    final_resize_mode: Optional[str] = None  # set on the last stage only


@dataclass
class StageSpec:
    blur: BlurSpec
    resize: ResizeSpec
    noise: NoiseSpec
    jpeg: JpegSpec


@dataclass
class DegradationParams:
    level: Level
    stage1: StageSpec
    stage2: Optional[StageSpec] = None
    rng_seed: int = 0


# ---------------------------------------------------------------------------
# Slot descriptors (drives /schema, the UI, and the static layout check)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SlotGroup:
    indices: tuple[int, ...]      # 1-based vector indices
    name: str
    group: str                    # UI panel group
    kind: str                     # "scalar" | "flag" | "onehot"
    stage: int
    choices: tuple[str, ...] = ()
    range_key: Optional[str] = None  # how to look up the de-normalization range


SLOTS: tuple[SlotGroup, ...] = (
    SlotGroup((1,), "blur1.kernel_half", "blur-1", "scalar", 1, range_key="kernel_half"),
    SlotGroup((2,), "blur1.sigma1", "blur-1", "scalar", 1, range_key="sigma1"),
    SlotGroup((3,), "blur1.sigma2", "blur-1", "scalar", 1, range_key="sigma1"),
    SlotGroup((4,), "blur1.theta", "blur-1", "scalar", 1, range_key="theta"),
    SlotGroup((5,), "blur2.kernel_half", "blur-2/sinc", "scalar", 2, range_key="kernel_half"),
    SlotGroup((6,), "blur2.sigma1", "blur-2/sinc", "scalar", 2, range_key="sigma2"),
    SlotGroup((7,), "blur2.sigma2", "blur-2/sinc", "scalar", 2, range_key="sigma2"),
    SlotGroup((8,), "blur2.theta", "blur-2/sinc", "scalar", 2, range_key="theta"),
    SlotGroup((9,), "sinc.kernel_half", "blur-2/sinc", "scalar", 2, range_key="kernel_half"),
    SlotGroup((10,), "sinc.omega_c", "blur-2/sinc", "scalar", 2, range_key="omega_c"),
    SlotGroup((11,), "resize1.scale", "resize", "scalar", 1, range_key="scale1"),
    SlotGroup((12, 13, 14), "resize1.mode", "resize", "onehot", 1, choices=RESIZE_MODES),
    SlotGroup((15,), "resize2.scale", "resize", "scalar", 2, range_key="scale2"),
    SlotGroup((16, 17, 18), "resize2.mode", "resize", "onehot", 2, choices=RESIZE_MODES),
    SlotGroup((19,), "noise1.level", "noise-1", "scalar", 1, range_key="noise1"),
    SlotGroup((20,), "noise1.gray", "noise-1", "flag", 1),
    SlotGroup((21, 22), "noise1.kind", "noise-1", "onehot", 1, choices=NOISE_KINDS),
    SlotGroup((23,), "noise2.level", "noise-2", "scalar", 2, range_key="noise2"),
    SlotGroup((24,), "noise2.gray", "noise-2", "flag", 2),
    SlotGroup((25, 26), "noise2.kind", "noise-2", "onehot", 2, choices=NOISE_KINDS),
    SlotGroup((27,), "jpeg1.quality", "jpeg/order", "scalar", 1, range_key="quality1"),
    SlotGroup((28,), "jpeg2.quality", "jpeg/order", "scalar", 2, range_key="quality2"),
    SlotGroup((29, 30), "jpeg2.order", "jpeg/order", "onehot", 2, choices=JPEG_ORDERS),
    SlotGroup((31, 32, 33), "final_resize.mode", "jpeg/order", "onehot", 1, choices=RESIZE_MODES),
)

#: 1-based indices whose activity marks a vector as second-order.  The
#: stage-1 JPEG slot v27 is excluded: it is populated for every level.
STAGE2_SLOTS = (5, 6, 7, 8, 9, 10, 15, 16, 17, 18, 23, 24, 25, 26, 28, 29, 30)


def slot_range(schema: DegradationSchema, key: str) -> tuple[float, float]:
    """Global de-normalization range for a scalar slot's range_key."""
    table = {
        "kernel_half": (float(schema.kernel_half[0]), float(schema.kernel_half[1])),
        "sigma1": schema.global_sigma(1),
        "sigma2": schema.global_sigma(2),
        "theta": schema.theta,
        "omega_c": schema.omega_c,
        "scale1": schema.global_scale(1),
        "scale2": schema.global_scale(2),
        "noise1": schema.global_gaussian(1),   # gaussian by default; kind one-hot disambiguates
        "noise2": schema.global_gaussian(2),
        "quality1": schema.global_quality(1),
        "quality2": schema.global_quality(2),
    }
    return table[key]


# ---------------------------------------------------------------------------
# Normalization helpers
# ---------------------------------------------------------------------------

def _norm(x: float, lo: float, hi: float) -> float:
    return (x - lo) / (hi - lo)


def _denorm(u: float, lo: float, hi: float) -> float:
    return lo + u * (hi - lo)


def snap_to_codec(x: float, lo: float, hi: float) -> float:
    """Nearest value that survives encode->decode bit-exactly.

    The affine normalization is its own mathematical inverse but not its own
    floating-point inverse; iterating decode(encode(.)) reaches a fixed point
    within a couple of steps for every representable input.
    """
    for _ in range(8):
        x2 = _denorm(_norm(x, lo, hi), lo, hi)
        if x2 == x:
            return x
        x = x2
    raise AssertionError(f"no codec fixed point near {x!r} in [{lo}, {hi}]")


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def sample_level(rng: np.random.Generator, schema: DegradationSchema = DEFAULT_SCHEMA) -> Level:
    """Draw a degradation level with the schema's level probabilities."""
    u = rng.random()
    acc = 0.0
    for lv, p in zip(Level, schema.level_probs):
        acc += p
        if u < acc:
            return lv
    return Level.S3


def _sample_scale(rng: np.random.Generator, ranges: StageRanges, glob: tuple[float, float]) -> float:
    lo, hi = ranges.scale
    p_up, p_down, _ = ranges.resize_updownkeep
    u = rng.random()
    if u < p_up:
        scale = rng.uniform(1.0, hi)
    elif u < p_up + p_down:
        scale = rng.uniform(lo, 1.0)
    else:
        scale = 1.0
    return snap_to_codec(float(scale), *glob)


def _sample_stage(
    rng: np.random.Generator,
    schema: DegradationSchema,
    ranges: StageRanges,
    stage: int,
    is_final: bool,
) -> StageSpec:
    m_lo, m_hi = schema.kernel_half
    glob_sigma = schema.global_sigma(stage)

    if stage == 2 and rng.random() < schema.stage2_blur_skip_prob:
        blur = BlurSpec(active=False)
    else:
        kernel_half = int(rng.integers(m_lo, m_hi + 1))
        iso = rng.random() < schema.iso_prob
        sigma1 = snap_to_codec(float(rng.uniform(*ranges.sigma)), *glob_sigma)
        sigma2 = sigma1 if iso else snap_to_codec(float(rng.uniform(*ranges.sigma)), *glob_sigma)
        theta = snap_to_codec(float(rng.uniform(*schema.theta)), *schema.theta)
        blur = BlurSpec(active=True, kernel_half=kernel_half,
                        sigma1=sigma1, sigma2=sigma2, theta=theta)
    if stage == 2 and rng.random() < schema.sinc_prob:
        blur.sinc_active = True
        blur.sinc_kernel_half = int(rng.integers(m_lo, m_hi + 1))
        blur.omega_c = snap_to_codec(float(rng.uniform(*schema.omega_c)), *schema.omega_c)

    resize = ResizeSpec(
        scale=_sample_scale(rng, ranges, schema.global_scale(stage)),
        mode=RESIZE_MODES[int(rng.integers(0, 3))],
    )

    kind = "gaussian" if rng.random() < schema.gaussian_prob else "poisson"
    kind_range = ranges.gaussian_sigma if kind == "gaussian" else ranges.poisson_scale
    noise = NoiseSpec(
        kind=kind,
        level=snap_to_codec(float(rng.uniform(*kind_range)), *schema.global_noise(stage, kind)),
        gray=bool(rng.random() < schema.gray_prob),
    )

    q_lo, q_hi = ranges.jpeg_quality
    jpeg = JpegSpec(quality=int(rng.integers(q_lo, q_hi + 1)))
    if stage == 2:
        jpeg.order = JPEG_ORDERS[0] if rng.random() < schema.order_probs[0] else JPEG_ORDERS[1]
    if is_final:
        jpeg.final_resize_mode = RESIZE_MODES[int(rng.integers(0, 3))]

    return StageSpec(blur=blur, resize=resize, noise=noise, jpeg=jpeg)


def sample_params(
    level: Level,
    rng: np.random.Generator,
    schema: DegradationSchema = DEFAULT_SCHEMA,
) -> DegradationParams:
    """Sample a structured degradation for one level.

    Draw order is fixed (blur, resize, noise, jpeg per stage, then the
    realization seed), so a given generator state always yields the same
    parameters.  Scalar draws are snapped to codec-representable values,
    making encode/decode lossless on sampled parameters.
    """
    ranges = schema.levels[level]
    stage1 = _sample_stage(rng, schema, ranges.stage1, stage=1, is_final=not level.second_order)
    stage2 = None
    if level.second_order:
        stage2 = _sample_stage(rng, schema, ranges.stage2, stage=2, is_final=True)
    seed = int(rng.integers(0, 2**32))
    return DegradationParams(level=level, stage1=stage1, stage2=stage2, rng_seed=seed)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

_REL_TOL = 1e-12  # absorbs the <=1-ulp drift introduced by codec snapping


def _check(field_name: str, value: float, lo: float, hi: float) -> None:
    tol = _REL_TOL * max(abs(lo), abs(hi), 1.0)
    if not (lo - tol <= value <= hi + tol):
        raise RangeViolation(field_name, value, lo, hi)


def _check_choice(field_name: str, value, choices) -> None:
    if value not in choices:
        raise RangeViolation(field_name, value, choices[0], choices[-1])


def _validate_stage(schema: DegradationSchema, ranges: StageRanges, s: StageSpec,
                    stage: int, is_final: bool) -> None:
    tag = f"stage{stage}"
    if s.blur.active:
        _check(f"{tag}.blur.kernel_half", s.blur.kernel_half, *schema.kernel_half)
        _check(f"{tag}.blur.sigma1", s.blur.sigma1, *ranges.sigma)
        _check(f"{tag}.blur.sigma2", s.blur.sigma2, *ranges.sigma)
        _check(f"{tag}.blur.theta", s.blur.theta, *schema.theta)
    elif stage == 1:
        raise RangeViolation(f"{tag}.blur.active", False, True, True)
    if s.blur.sinc_active:
        if stage != 2:
            raise RangeViolation(f"{tag}.blur.sinc_active", True, False, False)
        _check(f"{tag}.blur.sinc_kernel_half", s.blur.sinc_kernel_half, *schema.kernel_half)
        _check(f"{tag}.blur.omega_c", s.blur.omega_c, *schema.omega_c)

    _check_choice(f"{tag}.resize.mode", s.resize.mode, RESIZE_MODES)
    _check(f"{tag}.resize.scale", s.resize.scale, *ranges.scale)

    _check_choice(f"{tag}.noise.kind", s.noise.kind, NOISE_KINDS)
    kind_range = ranges.gaussian_sigma if s.noise.kind == "gaussian" else ranges.poisson_scale
    _check(f"{tag}.noise.level", s.noise.level, *kind_range)

    _check(f"{tag}.jpeg.quality", s.jpeg.quality, *ranges.jpeg_quality)
    if stage == 2:
        _check_choice(f"{tag}.jpeg.order", s.jpeg.order, JPEG_ORDERS)
    elif s.jpeg.order is not None:
        raise RangeViolation(f"{tag}.jpeg.order", s.jpeg.order, "None", "None")
    if is_final:
        _check_choice(f"{tag}.jpeg.final_resize_mode", s.jpeg.final_resize_mode, RESIZE_MODES)


def validate_params(params: DegradationParams, schema: DegradationSchema = DEFAULT_SCHEMA) -> None:
    """Raise :class:`RangeViolation` naming the first field outside its level's range."""
    ranges = schema.levels[params.level]
    has_stage2 = params.stage2 is not None
    if has_stage2 != params.level.second_order:
        raise RangeViolation("stage2", has_stage2, params.level.second_order,
                             params.level.second_order)
    _validate_stage(schema, ranges.stage1, params.stage1, stage=1, is_final=not has_stage2)
    if has_stage2:
        _validate_stage(schema, ranges.stage2, params.stage2, stage=2, is_final=True)


# ---------------------------------------------------------------------------
# Codec
# ---------------------------------------------------------------------------

def encode(params: DegradationParams, schema: DegradationSchema = DEFAULT_SCHEMA) -> np.ndarray:
    """Encode structured parameters into the normalized 33-vector."""
    validate_params(params, schema)
    v = np.zeros(VECTOR_LEN)

    def put(slot: int, value: float) -> None:  # slot is 1-based
        v[slot - 1] = value

    def put_blur(s: BlurSpec, base: int, stage: int) -> None:
        put(base + 0, _norm(s.kernel_half, *slot_range(schema, "kernel_half")))
        put(base + 1, _norm(s.sigma1, *schema.global_sigma(stage)))
        put(base + 2, _norm(s.sigma2, *schema.global_sigma(stage)))
        put(base + 3, _norm(s.theta, *schema.theta))

    def put_onehot(base: int, choices, value) -> None:
        put(base + choices.index(value), 1.0)

    s1 = params.stage1
    put_blur(s1.blur, 1, stage=1)
    put(11, _norm(s1.resize.scale, *schema.global_scale(1)))
    put_onehot(12, RESIZE_MODES, s1.resize.mode)
    put(19, _norm(s1.noise.level, *schema.global_noise(1, s1.noise.kind)))
    put(20, 1.0 if s1.noise.gray else 0.0)
    put_onehot(21, NOISE_KINDS, s1.noise.kind)
    put(27, _norm(s1.jpeg.quality, *schema.global_quality(1)))

    last = s1
    if params.stage2 is not None:
        s2 = params.stage2
        if s2.blur.active:
            put_blur(s2.blur, 5, stage=2)
        if s2.blur.sinc_active:
            put(9, _norm(s2.blur.sinc_kernel_half, *slot_range(schema, "kernel_half")))
            put(10, _norm(s2.blur.omega_c, *schema.omega_c))
        put(15, _norm(s2.resize.scale, *schema.global_scale(2)))
        put_onehot(16, RESIZE_MODES, s2.resize.mode)
        put(23, _norm(s2.noise.level, *schema.global_noise(2, s2.noise.kind)))
        put(24, 1.0 if s2.noise.gray else 0.0)
        put_onehot(25, NOISE_KINDS, s2.noise.kind)
        put(28, _norm(s2.jpeg.quality, *schema.global_quality(2)))
        put_onehot(29, JPEG_ORDERS, s2.jpeg.order)
        last = s2

    put_onehot(31, RESIZE_MODES, last.jpeg.final_resize_mode)
    return v


def _read_onehot(v: np.ndarray, base: int, choices):
    group = v[base - 1:base - 1 + len(choices)]
    return choices[int(np.argmax(group))]


def _stage1_fits(stage: StageSpec, ranges: StageRanges) -> bool:
    tol = 1e-9
    checks = [
        (stage.blur.sigma1, ranges.sigma),
        (stage.blur.sigma2, ranges.sigma),
        (stage.resize.scale, ranges.scale),
        (stage.noise.level,
         ranges.gaussian_sigma if stage.noise.kind == "gaussian" else ranges.poisson_scale),
        (stage.jpeg.quality, ranges.jpeg_quality),
    ]
    return all(lo - tol <= x <= hi + tol for x, (lo, hi) in checks)


def decode(v: np.ndarray, schema: DegradationSchema = DEFAULT_SCHEMA) -> DegradationParams:
    """Inverse of :func:`encode`.

    One-hot groups are read by argmax; a stage 2 is reconstructed when any
    stage-2 slot exceeds ``ACTIVITY_EPS``.  The level tag of a first-order
    vector is the narrowest level whose ranges contain the decoded values
    (the 33 slots themselves carry no S1-vs-S2 marker).
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (VECTOR_LEN,):
        raise InvalidVector(f"expected {VECTOR_LEN} values, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidVector("vector contains non-finite entries")

    def get(slot: int) -> float:
        return float(v[slot - 1])

    def get_blur(base: int, stage: int) -> BlurSpec:
        m_range = slot_range(schema, "kernel_half")
        return BlurSpec(
            active=True,
            kernel_half=int(round(_denorm(get(base + 0), *m_range))),
            sigma1=_denorm(get(base + 1), *schema.global_sigma(stage)),
            sigma2=_denorm(get(base + 2), *schema.global_sigma(stage)),
            theta=_denorm(get(base + 3), *schema.theta),
        )

    stage2_active = any(v[i - 1] > ACTIVITY_EPS for i in STAGE2_SLOTS)
    final_mode = _read_onehot(v, 31, RESIZE_MODES)

    kind1 = _read_onehot(v, 21, NOISE_KINDS)
    stage1 = StageSpec(
        blur=get_blur(1, stage=1),
        resize=ResizeSpec(scale=_denorm(get(11), *schema.global_scale(1)),
                          mode=_read_onehot(v, 12, RESIZE_MODES)),
        noise=NoiseSpec(kind=kind1,
                        level=_denorm(get(19), *schema.global_noise(1, kind1)),
                        gray=get(20) > 0.5),
        jpeg=JpegSpec(quality=int(round(_denorm(get(27), *schema.global_quality(1)))),
                      final_resize_mode=None if stage2_active else final_mode),
    )

    if not stage2_active:
        # Narrowest fitting first-order level; out-of-range hand-crafted
        # vectors fall through to the widest one.
        level = Level.S1 if _stage1_fits(stage1, schema.levels[Level.S1].stage1) else Level.S2
        return DegradationParams(level=level, stage1=stage1, stage2=None)

    blur_active = any(v[i - 1] > ACTIVITY_EPS for i in (5, 6, 7, 8))
    blur2 = get_blur(5, stage=2) if blur_active else BlurSpec(active=False)
    if get(9) > ACTIVITY_EPS or get(10) > ACTIVITY_EPS:
        blur2.sinc_active = True
        blur2.sinc_kernel_half = int(round(_denorm(get(9), *slot_range(schema, "kernel_half"))))
        blur2.omega_c = _denorm(get(10), *schema.omega_c)

    kind2 = _read_onehot(v, 25, NOISE_KINDS)
    stage2 = StageSpec(
        blur=blur2,
        resize=ResizeSpec(scale=_denorm(get(15), *schema.global_scale(2)),
                          mode=_read_onehot(v, 16, RESIZE_MODES)),
        noise=NoiseSpec(kind=kind2,
                        level=_denorm(get(23), *schema.global_noise(2, kind2)),
                        gray=get(24) > 0.5),
        jpeg=JpegSpec(quality=int(round(_denorm(get(28), *schema.global_quality(2)))),
                      order=_read_onehot(v, 29, JPEG_ORDERS),
                      final_resize_mode=final_mode),
    )
    return DegradationParams(level=Level.S3, stage1=stage1, stage2=stage2)


# ---------------------------------------------------------------------------
# Serialization (schema document + params JSON payloads)
# ---------------------------------------------------------------------------

def schema_to_dict(schema: DegradationSchema = DEFAULT_SCHEMA) -> dict:
    def stage_dict(sr: StageRanges) -> dict:
        return {
            "sigma": list(sr.sigma),
            "scale": list(sr.scale),
            "resize_updownkeep": list(sr.resize_updownkeep),
            "gaussian_sigma": list(sr.gaussian_sigma),
            "poisson_scale": list(sr.poisson_scale),
            "jpeg_quality": list(sr.jpeg_quality),
        }

    doc = {
        "probabilities": {
            "level": list(schema.level_probs),
            "isotropic_blur": schema.iso_prob,
            "gray_noise": schema.gray_prob,
            "gaussian_noise": schema.gaussian_prob,
            "stage2_blur_skip": schema.stage2_blur_skip_prob,
            "sinc": schema.sinc_prob,
            "jpeg_order": list(schema.order_probs),
        },
        "shared_ranges": {
            "kernel_half": list(schema.kernel_half),
            "theta": list(schema.theta),
            "omega_c": list(schema.omega_c),
        },
        "levels": {},
    }
    for lv, ranges in schema.levels.items():
        entry = {"stage1": stage_dict(ranges.stage1)}
        if ranges.stage2 is not None:
            entry["stage2"] = stage_dict(ranges.stage2)
        doc["levels"][lv.value] = entry
    return doc


def schema_from_dict(doc: dict) -> DegradationSchema:
    def stage_ranges(d: dict) -> StageRanges:
        return StageRanges(
            sigma=tuple(d["sigma"]),
            scale=tuple(d["scale"]),
            resize_updownkeep=tuple(d["resize_updownkeep"]),
            gaussian_sigma=tuple(d["gaussian_sigma"]),
            poisson_scale=tuple(d["poisson_scale"]),
            jpeg_quality=tuple(d["jpeg_quality"]),
        )

    probs = doc["probabilities"]
    shared = doc["shared_ranges"]
    levels = {}
    for name, entry in doc["levels"].items():
        levels[Level(name)] = LevelRanges(
            stage1=stage_ranges(entry["stage1"]),
            stage2=stage_ranges(entry["stage2"]) if "stage2" in entry else None,
        )
    schema = DegradationSchema(
        level_probs=tuple(probs["level"]),
        iso_prob=probs["isotropic_blur"],
        gray_prob=probs["gray_noise"],
        gaussian_prob=probs["gaussian_noise"],
        stage2_blur_skip_prob=probs["stage2_blur_skip"],
        sinc_prob=probs["sinc"],
        order_probs=tuple(probs["jpeg_order"]),
        kernel_half=tuple(shared["kernel_half"]),
        theta=tuple(shared["theta"]),
        omega_c=tuple(shared["omega_c"]),
        levels=levels,
    )
    schema.validate()
    return schema


def params_to_dict(params: DegradationParams) -> dict:
    def stage_dict(s: StageSpec) -> dict:
        blur: dict = {"active": s.blur.active}
        if s.blur.active:
            blur.update(kernel_half=s.blur.kernel_half, sigma1=s.blur.sigma1,
                        sigma2=s.blur.sigma2, theta=s.blur.theta)
        if s.blur.sinc_active:
            blur.update(sinc_active=True, sinc_kernel_half=s.blur.sinc_kernel_half,
                        omega_c=s.blur.omega_c)
        d = {
            "blur": blur,
            "resize": {"scale": s.resize.scale, "mode": s.resize.mode},
            "noise": {"kind": s.noise.kind, "level": s.noise.level, "gray": s.noise.gray},
            "jpeg": {"quality": s.jpeg.quality},
        }
        if s.jpeg.order is not None:
            d["jpeg"]["order"] = s.jpeg.order
        if s.jpeg.final_resize_mode is not None:
            d["jpeg"]["final_resize_mode"] = s.jpeg.final_resize_mode
        return d

    out = {"level": params.level.value, "rng_seed": params.rng_seed,
           "stage1": stage_dict(params.stage1)}
    if params.stage2 is not None:
        out["stage2"] = stage_dict(params.stage2)
    return out


def params_from_dict(doc: dict) -> DegradationParams:
    def stage_spec(d: dict) -> StageSpec:
        b = d["blur"]
        blur = BlurSpec(active=b.get("active", True))
        if blur.active:
            blur.kernel_half = int(b["kernel_half"])
            blur.sigma1 = float(b["sigma1"])
            blur.sigma2 = float(b["sigma2"])
            blur.theta = float(b["theta"])
        if b.get("sinc_active"):
            blur.sinc_active = True
            blur.sinc_kernel_half = int(b["sinc_kernel_half"])
            blur.omega_c = float(b["omega_c"])
        j = d["jpeg"]
        return StageSpec(
            blur=blur,
            resize=ResizeSpec(scale=float(d["resize"]["scale"]), mode=d["resize"]["mode"]),
            noise=NoiseSpec(kind=d["noise"]["kind"], level=float(d["noise"]["level"]),
                            gray=bool(d["noise"]["gray"])),
            jpeg=JpegSpec(quality=int(j["quality"]), order=j.get("order"),
                          final_resize_mode=j.get("final_resize_mode")),
        )

    return DegradationParams(
        level=Level(doc["level"]),
        stage1=stage_spec(doc["stage1"]),
        stage2=stage_spec(doc["stage2"]) if "stage2" in doc else None,
        rng_seed=int(doc.get("rng_seed", 0)),
    )


def strip_seed(params: DegradationParams) -> DegradationParams:
    """Copy with rng_seed zeroed; the codec does not carry the seed."""
    return dataclasses.replace(params, rng_seed=0)
