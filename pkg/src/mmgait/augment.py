"""Stochastic spectrogram augmentation.

Policy (applied in order, then clamped to [0, 1]):
  * two cutout draws, each horizontal / vertical / none with probability 1/3,
    stripe thickness uniform in [2, 8] px spanning the full other axis
  * per-pixel uniform white noise in [-0.5, 0.5] with probability 2/3
  * one center-anchored affine warp combining zoom (scale in [0.8, 1.2]),
    shear (0..5 deg counter-clockwise) and rotation (+-5 deg)

Noise-type augmentations run before the geometric warp so stripe dropouts are
warped like real dropouts would be.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import ConfigError, ContractError
from .dsp import Spectrogram


@dataclass(frozen=True)
class AugPolicy:
    p_cutout_horizontal: float = 1.0 / 3.0
    p_cutout_vertical: float = 1.0 / 3.0
    cutout_draws: int = 2
    stripe_min_px: int = 2
    stripe_max_px: int = 8
    p_white_noise: float = 2.0 / 3.0
    noise_amplitude: float = 0.5
    zoom_range: tuple[float, float] = (0.8, 1.2)
    shear_range_deg: tuple[float, float] = (0.0, 5.0)
    rotation_range_deg: tuple[float, float] = (-5.0, 5.0)

    def __post_init__(self):
        if not (0 <= self.p_cutout_horizontal and 0 <= self.p_cutout_vertical
                and self.p_cutout_horizontal + self.p_cutout_vertical <= 1.0 + 1e-9):
            raise ConfigError("cutout probabilities must be non-negative and sum to <= 1")
        if not 0 <= self.p_white_noise <= 1:
            raise ConfigError("white noise probability must be in [0, 1]")
        if self.stripe_min_px < 1 or self.stripe_max_px < self.stripe_min_px:
            raise ConfigError("invalid stripe thickness range")


IDENTITY_POLICY = AugPolicy(
    p_cutout_horizontal=0.0, p_cutout_vertical=0.0, p_white_noise=0.0,
    zoom_range=(1.0, 1.0), shear_range_deg=(0.0, 0.0), rotation_range_deg=(0.0, 0.0),
)


@dataclass
class AugTrace:
    """Record of the random draws of one augment() call."""

    cutouts: list = field(default_factory=list)  # (orientation, start, thickness) or None
    noise_applied: bool = False
    zoom: float = 1.0
    shear_deg: float = 0.0
    rotation_deg: float = 0.0


def cutout_stripe(pixels: np.ndarray, orientation: str, start: int, thickness: int) -> np.ndarray:
    """Zero a full-width stripe; out-of-bounds parts are clipped away."""
    if orientation not in ("horizontal", "vertical"):
        raise ContractError("orientation must be 'horizontal' or 'vertical'")
    out = pixels.copy()
    axis_len = out.shape[0] if orientation == "horizontal" else out.shape[1]
    lo = max(0, start)
    hi = min(axis_len, start + thickness)
    if lo >= hi:
        return out
    if orientation == "horizontal":
        out[lo:hi, :] = 0.0
    else:
        out[:, lo:hi] = 0.0
    return out


def geometric_warp(pixels: np.ndarray, scale: float, shear_deg: float, rot_deg: float) -> np.ndarray:
    """Center-anchored affine warp (zoom, then shear, then rotation).

    Bilinear sampling; samples falling outside the image read as zero.
    """
    rot = math.radians(rot_deg)
    shear = math.radians(shear_deg)
    rotation = np.array([[math.cos(rot), -math.sin(rot)], [math.sin(rot), math.cos(rot)]])
    shear_m = np.array([[1.0, math.tan(shear)], [0.0, 1.0]])
    forward = rotation @ shear_m @ (scale * np.eye(2))
    inverse = np.linalg.inv(forward)
    center = (np.asarray(pixels.shape, dtype=np.float64) - 1.0) / 2.0
    offset = center - inverse @ center
    warped = ndimage.affine_transform(
        pixels.astype(np.float64), inverse, offset=offset, order=1,
        mode="constant", cval=0.0, prefilter=False,
    )
    return warped.astype(pixels.dtype, copy=False)


def augment_pixels(pixels: np.ndarray, policy: AugPolicy, rng: np.random.Generator,
                   trace: AugTrace | None = None) -> np.ndarray:
    """Apply the full policy to a [0, 1] image; output clamped back to [0, 1]."""
    out = pixels.astype(np.float32, copy=True)
    h, w = out.shape
    for _ in range(policy.cutout_draws):
        u = rng.random()
        if u < policy.p_cutout_horizontal:
            orientation = "horizontal"
        elif u < policy.p_cutout_horizontal + policy.p_cutout_vertical:
            orientation = "vertical"
        else:
            if trace is not None:
                trace.cutouts.append(None)
            continue
        thickness = int(rng.integers(policy.stripe_min_px, policy.stripe_max_px + 1))
        axis_len = h if orientation == "horizontal" else w
        start = int(rng.integers(0, max(1, axis_len - thickness + 1)))
        out = cutout_stripe(out, orientation, start, thickness)
        if trace is not None:
            trace.cutouts.append((orientation, start, thickness))

    if rng.random() < policy.p_white_noise:
        out = out + rng.uniform(-policy.noise_amplitude, policy.noise_amplitude,
                                size=out.shape).astype(np.float32)
        if trace is not None:
            trace.noise_applied = True

    scale = float(rng.uniform(*policy.zoom_range))
    shear = float(rng.uniform(*policy.shear_range_deg))
    rot = float(rng.uniform(*policy.rotation_range_deg))
    if trace is not None:
        trace.zoom, trace.shear_deg, trace.rotation_deg = scale, shear, rot
    if not (scale == 1.0 and shear == 0.0 and rot == 0.0):
        out = geometric_warp(out, scale, shear, rot)
    return np.clip(out, 0.0, 1.0)


def augment(spec: Spectrogram, policy: AugPolicy, rng: np.random.Generator,
            trace: AugTrace | None = None) -> Spectrogram:
    """Spectrogram-level wrapper around augment_pixels; metadata is preserved."""
    return Spectrogram(pixels=augment_pixels(spec.pixels, policy, rng, trace),
                       meta=dict(spec.meta))


def augment_batch(batch: np.ndarray, policy: AugPolicy, rng: np.random.Generator) -> np.ndarray:
    """Augment a [B, H, W] stack, consuming draws sequentially from rng."""
    return np.stack([augment_pixels(img, policy, rng) for img in batch])
