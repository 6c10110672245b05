"""High-to-low-resolution degradation pipeline.

Each stage applies blur -> resize -> noise -> JPEG; the image is finally
resized to 1/4 of the (cropped) original size.  Second-order parameters
additionally control a sinc ringing filter attached to the final resize and
the resize/JPEG operating order.  Everything is a pure function of
(image, params), with noise realized from the params' seed.

Conventions, fixed so results are exactly reproducible:
  * images are H x W x 3 float arrays in [0, 1] at operation boundaries;
  * convolution uses whole-sample reflect padding and cross-correlation
    orientation (irrelevant for the centrosymmetric kernels used here);
  * resize output dims are floor(H*scale) x floor(W*scale); bilinear and
    bicubic sample source coordinate (d + 0.5)/scale - 0.5 per axis with
    edge clamping, bicubic is the a = -0.5 Catmull-Rom family cubic, and
    area averages source cells with fractional-coverage weights;
  * JPEG is baseline, 4:2:0 chroma subsampling, standard tables under the
    conventional quality scaling (5000/q below 50, else 200 - 2q).
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
from PIL import Image as PILImage
from scipy import ndimage
from scipy.special import j1

from .errors import DimensionError, DomainError
from .space import DegradationParams, StageSpec

LUMA_WEIGHTS = (0.299, 0.587, 0.114)  # BT.601 full-range


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------

def gaussian_kernel(kernel_half: int, sigma1: float, sigma2: float, theta: float) -> np.ndarray:
    """Rotated anisotropic Gaussian on a (2m+1)^2 grid, normalized to sum 1.

    The density has covariance R(theta) @ diag(sigma1^2, sigma2^2) @ R(theta)^T
    evaluated at integer offsets from the center.
    """
    if sigma1 <= 0 or sigma2 <= 0:
        raise DomainError(f"sigma must be positive, got ({sigma1}, {sigma2})")
    m = int(kernel_half)
    c, s = np.cos(theta), np.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    inv_cov = rot @ np.diag([1.0 / sigma1**2, 1.0 / sigma2**2]) @ rot.T
    ax = np.arange(-m, m + 1, dtype=float)
    xx, yy = np.meshgrid(ax, ax)
    quad = inv_cov[0, 0] * xx**2 + (inv_cov[0, 1] + inv_cov[1, 0]) * xx * yy + inv_cov[1, 1] * yy**2
    k = np.exp(-0.5 * quad)
    return k / k.sum()


def sinc_kernel(kernel_half: int, omega_c: float) -> np.ndarray:
    """Circularly symmetric ideal low-pass kernel with cutoff omega_c.

    k(i, j) = omega_c * J1(omega_c * r) / (2 pi r), center value omega_c^2 / (4 pi),
    normalized to sum 1.  Low cutoffs produce the ringing/overshoot look of
    over-sharpened or resampled photographs.
    """
    if not (np.pi / 3 - 1e-12 <= omega_c <= np.pi + 1e-12):
        raise DomainError(f"omega_c={omega_c} outside [pi/3, pi]")
    m = int(kernel_half)
    ax = np.arange(-m, m + 1, dtype=float)
    xx, yy = np.meshgrid(ax, ax)
    r = np.hypot(xx, yy)
    with np.errstate(invalid="ignore", divide="ignore"):
        k = omega_c * j1(omega_c * r) / (2 * np.pi * r)
    k[m, m] = omega_c**2 / (4 * np.pi)
    return k / k.sum()


def convolve(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Same-size 2-D filtering with whole-sample reflect padding, clamped to [0, 1].

    Cross-correlation orientation (irrelevant for the centrosymmetric
    Gaussian and sinc kernels used by the pipeline).
    """
    img = np.asarray(img, dtype=float)
    k = np.asarray(kernel, dtype=float)
    kh, kw = k.shape
    h, w = img.shape[:2]
    if kh > h or kw > w:
        raise DimensionError(f"kernel {k.shape} larger than image {(h, w)}")
    # ndimage 'mirror' == np.pad 'reflect': reflection about the edge pixel.
    out = ndimage.correlate(img, k[:, :, None], mode="mirror")
    return np.clip(out, 0.0, 1.0)


# ---------------------------------------------------------------------------
# Resize
# ---------------------------------------------------------------------------

def _area_weights(n_in: int, n_out: int, scale: float) -> np.ndarray:
    w = np.zeros((n_out, n_in))
    for d in range(n_out):
        lo, hi = d / scale, (d + 1) / scale
        lo, hi = min(lo, n_in), min(hi, n_in)
        first, last = int(np.floor(lo)), int(np.ceil(hi))
        for i in range(first, min(last, n_in)):
            w[d, i] = min(hi, i + 1) - max(lo, i)
        w[d] /= max(hi - lo, 1e-12)
    return w


def _bilinear_weights(n_in: int, n_out: int, scale: float) -> np.ndarray:
    w = np.zeros((n_out, n_in))
    for d in range(n_out):
        src = (d + 0.5) / scale - 0.5
        i0 = int(np.floor(src))
        t = src - i0
        for i, wt in ((i0, 1.0 - t), (i0 + 1, t)):
            w[d, min(max(i, 0), n_in - 1)] += wt
    return w


def _cubic(t: np.ndarray, a: float = -0.5) -> np.ndarray:
    at = np.abs(t)
    return np.where(
        at <= 1,
        (a + 2) * at**3 - (a + 3) * at**2 + 1,
        np.where(at < 2, a * at**3 - 5 * a * at**2 + 8 * a * at - 4 * a, 0.0),
    )


def _bicubic_weights(n_in: int, n_out: int, scale: float) -> np.ndarray:
    w = np.zeros((n_out, n_in))
    for d in range(n_out):
        src = (d + 0.5) / scale - 0.5
        base = int(np.floor(src))
        for i in range(base - 1, base + 3):
            w[d, min(max(i, 0), n_in - 1)] += float(_cubic(np.asarray(src - i)))
    return w


_WEIGHT_BUILDERS = {"area": _area_weights, "bilinear": _bilinear_weights, "bicubic": _bicubic_weights}


def resize(img: np.ndarray, scale: float, mode: str,
           out_dims: tuple[int, int] | None = None) -> np.ndarray:
    """Separable resampling to floor(H*scale) x floor(W*scale).

    ``out_dims`` overrides the output size (the effective per-axis scale is
    then out/in), used for the exact final 1/4 resize.  Output is clamped to
    [0, 1].
    """
    img = np.asarray(img, dtype=float)
    h, w = img.shape[:2]
    if out_dims is None:
        if scale <= 0:
            raise DomainError(f"scale must be positive, got {scale}")
        out_h, out_w = int(h * scale), int(w * scale)
        scale_y = scale_x = scale
    else:
        out_h, out_w = out_dims
        scale_y, scale_x = out_h / h, out_w / w
    if out_h < 1 or out_w < 1:
        raise DimensionError(f"resize of {(h, w)} by {scale} gives empty output")
    build = _WEIGHT_BUILDERS[mode]
    wy = build(h, out_h, scale_y)
    wx = build(w, out_w, scale_x)
    out = np.tensordot(wy, img, axes=(1, 0))            # (out_h, w, c)
    out = np.tensordot(wx, out, axes=(1, 1))            # (out_w, out_h, c)
    return np.clip(out.transpose(1, 0, 2), 0.0, 1.0)


# ---------------------------------------------------------------------------
# Noise
# ---------------------------------------------------------------------------

def add_gaussian_noise(img: np.ndarray, sigma255: float, gray: bool,
                       rng: np.random.Generator) -> np.ndarray:
    """Additive i.i.d. normal noise with std sigma255/255, clamped to [0, 1].

    Gray noise draws one H x W realization shared by all channels.
    """
    img = np.asarray(img, dtype=float)
    sigma = sigma255 / 255.0
    if gray:
        noise = rng.standard_normal(img.shape[:2])[:, :, None] * sigma
    else:
        noise = rng.standard_normal(img.shape) * sigma
    return np.clip(img + noise, 0.0, 1.0)


def _luminance(img: np.ndarray) -> np.ndarray:
    r, g, b = LUMA_WEIGHTS
    return r * img[:, :, 0] + g * img[:, :, 1] + b * img[:, :, 2]


def add_poisson_noise(img: np.ndarray, scale: float, gray: bool,
                      rng: np.random.Generator) -> np.ndarray:
    """Signal-dependent shot noise: out = Poisson(in * L) / L with L = 255/scale.

    Larger ``scale`` means fewer photons per unit intensity, hence stronger
    noise.  Gray noise is driven by the luminance channel and the same delta
    is applied to all channels.
    """
    img = np.asarray(img, dtype=float)
    photon_level = 255.0 / scale
    if gray:
        y = _luminance(img)
        delta = rng.poisson(y * photon_level) / photon_level - y
        out = img + delta[:, :, None]
    else:
        out = rng.poisson(img * photon_level) / photon_level
    return np.clip(out, 0.0, 1.0)


# ---------------------------------------------------------------------------
# JPEG
# ---------------------------------------------------------------------------

def jpeg_roundtrip(img: np.ndarray, quality: int) -> np.ndarray:
    """Baseline-JPEG encode/decode at the given quality factor (deterministic)."""
    if not 30 <= quality <= 95:
        raise DomainError(f"quality={quality} outside [30, 95]")
    raw = np.clip(np.rint(np.asarray(img, dtype=float) * 255.0), 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    # subsampling=2 pins 4:2:0; libjpeg applies the standard tables with the
    # conventional 5000/q | 200-2q scaling.
    PILImage.fromarray(raw).save(buf, format="JPEG", quality=int(quality), subsampling=2)
    with PILImage.open(buf) as im:
        return np.asarray(im.convert("RGB"), dtype=float) / 255.0


# ---------------------------------------------------------------------------
# Staged pipeline
# ---------------------------------------------------------------------------

@dataclass
class TraceStep:
    op: str
    detail: dict
    out_dims: tuple[int, int]


@dataclass
class PipelineTrace:
    steps: list[TraceStep] = field(default_factory=list)

    def record(self, op: str, detail: dict, img: np.ndarray) -> None:
        self.steps.append(TraceStep(op, detail, (img.shape[0], img.shape[1])))

    def to_dict(self) -> list[dict]:
        return [{"op": s.op, "detail": s.detail, "out_dims": list(s.out_dims)} for s in self.steps]


def _apply_stage(img: np.ndarray, stage: StageSpec, tag: str, rng: np.random.Generator,
                 trace: PipelineTrace, *, jpeg_here: bool) -> np.ndarray:
    if stage.blur.active:
        k = gaussian_kernel(stage.blur.kernel_half, stage.blur.sigma1,
                            stage.blur.sigma2, stage.blur.theta)
        img = convolve(img, k)
        trace.record(f"{tag}.blur", {"kernel_size": 2 * stage.blur.kernel_half + 1,
                                     "sigma1": stage.blur.sigma1,
                                     "sigma2": stage.blur.sigma2,
                                     "theta": stage.blur.theta}, img)
    else:
        trace.record(f"{tag}.blur", {"skipped": True}, img)

    img = resize(img, stage.resize.scale, stage.resize.mode)
    trace.record(f"{tag}.resize", {"scale": stage.resize.scale, "mode": stage.resize.mode}, img)

    if stage.noise.kind == "gaussian":
        img = add_gaussian_noise(img, stage.noise.level, stage.noise.gray, rng)
    else:
        img = add_poisson_noise(img, stage.noise.level, stage.noise.gray, rng)
    trace.record(f"{tag}.noise", {"kind": stage.noise.kind, "level": stage.noise.level,
                                  "gray": stage.noise.gray}, img)

    if jpeg_here:
        img = jpeg_roundtrip(img, stage.jpeg.quality)
        trace.record(f"{tag}.jpeg", {"quality": stage.jpeg.quality}, img)
    return img


def _final_resize(img: np.ndarray, dims: tuple[int, int], mode: str, sinc: np.ndarray | None,
                  trace: PipelineTrace) -> np.ndarray:
    img = resize(img, 0.25, mode, out_dims=dims)
    trace.record("final.resize", {"mode": mode, "dims": list(dims)}, img)
    if sinc is not None:
        img = convolve(img, sinc)
        trace.record("final.sinc", {"kernel_size": sinc.shape[0]}, img)
    return img


def run_pipeline(hr: np.ndarray, params: DegradationParams) -> tuple[np.ndarray, PipelineTrace]:
    """Degrade an HR image into its (H/4) x (W/4) LR counterpart.

    Noise is realized from ``params.rng_seed``; the whole map is a pure
    function of (hr, params).  Inputs whose sides are not multiples of 4 are
    center-cropped first (recorded in the trace).
    """
    img = np.asarray(hr, dtype=float)
    trace = PipelineTrace()
    h, w = img.shape[:2]
    ch, cw = h - h % 4, w - w % 4
    if ch == 0 or cw == 0:
        raise DimensionError(f"image {(h, w)} too small for a 1/4-scale output")
    if (ch, cw) != (h, w):
        y0, x0 = (h - ch) // 2, (w - cw) // 2
        img = img[y0:y0 + ch, x0:x0 + cw]
        trace.record("crop", {"from": [h, w]}, img)
    lr_dims = (ch // 4, cw // 4)

    rng = np.random.default_rng(params.rng_seed)
    s1_final = params.stage2 is None
    img = _apply_stage(img, params.stage1, "stage1", rng, trace, jpeg_here=True)

    if s1_final:
        img = _final_resize(img, lr_dims, params.stage1.jpeg.final_resize_mode, None, trace)
    else:
        s2 = params.stage2
        img = _apply_stage(img, s2, "stage2", rng, trace, jpeg_here=False)
        sinc = (sinc_kernel(s2.blur.sinc_kernel_half, s2.blur.omega_c)
                if s2.blur.sinc_active else None)
        if s2.jpeg.order == "resize-then-jpeg":
            img = _final_resize(img, lr_dims, s2.jpeg.final_resize_mode, sinc, trace)
            img = jpeg_roundtrip(img, s2.jpeg.quality)
            trace.record("stage2.jpeg", {"quality": s2.jpeg.quality}, img)
        else:
            img = jpeg_roundtrip(img, s2.jpeg.quality)
            trace.record("stage2.jpeg", {"quality": s2.jpeg.quality}, img)
            img = _final_resize(img, lr_dims, s2.jpeg.final_resize_mode, sinc, trace)

    return np.clip(img, 0.0, 1.0), trace
