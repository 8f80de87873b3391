"""Beat signal to gait spectrogram: the spectrogram acquisition chain.

Stages: range FFT -> across-chirp mean subtraction (static removal) ->
per-frame CA-CFAR detection -> per-frame Doppler map -> sliding-window
tracking -> range gating -> slow-time STFT -> enhancement (background
median subtraction, resize, min-max normalization).

All stages are pure functions; the full chain is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CfarWindowError, ConfigError, ContractError, NoTargetError, SizeError
from .scene import BeatSignal, RadarConfig


@dataclass(frozen=True)
class CfarConfig:
    """Cell-averaging CFAR window: cells per side, threshold on the mean."""

    training_cells: int = 8
    guard_cells: int = 2
    threshold_factor: float = 4.0

    def __post_init__(self):
        if self.training_cells < 1:
            raise ConfigError("CFAR needs at least one training cell per side")
        if self.guard_cells < 0:
            raise ConfigError("guard_cells must be >= 0")
        if self.threshold_factor <= 0:
            raise ConfigError("threshold_factor must be positive")


@dataclass(frozen=True)
class TrackGate:
    """Per-frame range gate: centers, half-width in bins, velocity estimates."""

    centers: np.ndarray  # [frames] int
    width: int  # half-width; gate spans [center-width, center+width]
    velocities: np.ndarray  # [frames] m/s, positive = closing


@dataclass
class Spectrogram:
    """Time-frequency gait image, rows = Doppler bins, cols = time bins.

    Enhanced spectrograms are in [0, 1]; raw STFT output is log-compressed
    magnitude and unbounded above.
    """

    pixels: np.ndarray
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class DspConfig:
    cfar: CfarConfig = field(default_factory=CfarConfig)
    track_window: int = 5
    track_max_step: int = 3
    gate_width: int = 8
    stft_window: int = 64
    stft_hop: int = 16
    out_shape: tuple[int, int] = (128, 128)


def range_fft(sig: BeatSignal) -> np.ndarray:
    """DFT along fast time; [frames][chirps][range_bins]."""
    if sig.data.size == 0:
        raise ContractError("empty beat signal")
    return np.fft.fft(sig.data, axis=-1)


def remove_static_clutter(rp: np.ndarray) -> np.ndarray:
    """Subtract the across-chirp mean per (frame, range bin)."""
    if rp.shape[1] < 2:
        raise ContractError("static removal needs >= 2 chirps per frame")
    return rp - rp.mean(axis=1, keepdims=True)


def power_profile(rp: np.ndarray) -> np.ndarray:
    """Non-coherent integration across chirps: mean |.|^2, [frames][range_bins]."""
    return np.mean(np.abs(rp) ** 2, axis=1)


def cfar_threshold_factor(pfa: float, n_training: int) -> float:
    """Mean-referenced CA-CFAR factor for a target false alarm rate.

    For i.i.d. exponential cells, P_fa = (1 + T/N)^(-N) when a cell is
    compared to T times the mean of its N training cells.
    """
    return n_training * (pfa ** (-1.0 / n_training) - 1.0)


def cfar_detect(profile: np.ndarray, cfg: CfarConfig) -> np.ndarray:
    """Cell-averaging CFAR over a 1-D power profile.

    A bin is detected iff its power exceeds threshold_factor times the mean
    of its training cells (guard cells excluded). Edge bins fall back to a
    one-sided training window.
    """
    profile = np.asarray(profile, dtype=np.float64)
    n = profile.shape[0]
    span = cfg.training_cells + cfg.guard_cells
    if n <= 2 * span:
        raise CfarWindowError(
            f"profile of {n} bins cannot host a CFAR window of {span} cells per side"
        )
    prefix = np.concatenate(([0.0], np.cumsum(profile)))

    idx = np.arange(n)
    # Left training window [i - span, i - guard), clipped at the array edge.
    lo = np.clip(idx - span, 0, n)
    hi = np.clip(idx - cfg.guard_cells, 0, n)
    left_sum = prefix[hi] - prefix[lo]
    left_cnt = hi - lo
    # Right training window (i + guard, i + span], clipped.
    lo = np.clip(idx + cfg.guard_cells + 1, 0, n)
    hi = np.clip(idx + span + 1, 0, n)
    right_sum = prefix[hi] - prefix[lo]
    right_cnt = hi - lo

    counts = left_cnt + right_cnt
    noise = (left_sum + right_sum) / counts
    return np.flatnonzero(profile > cfg.threshold_factor * noise)


def doppler_map(frame: np.ndarray) -> np.ndarray:
    """Slow-time DFT magnitude per range bin, zero Doppler centered.

    Input [chirps][range_bins]; output [chirps][range_bins] real.
    """
    if frame.shape[0] < 2:
        raise ContractError("Doppler map needs >= 2 chirps")
    return np.abs(np.fft.fftshift(np.fft.fft(frame, axis=0), axes=0))


def doppler_row_to_velocity(row: int, n_chirps: int, cfg: RadarConfig) -> float:
    """Closing velocity (m/s, positive toward the radar) of an fftshifted row.

    The beat phase convention exp(+j*2*pi*fc*2r/c) maps a closing target to a
    negative slow-time frequency, hence the sign flip.
    """
    freq = (row - n_chirps // 2) * cfg.prf_hz / n_chirps
    return -freq * cfg.wavelength_m / 2.0


def track_target(detections: list[np.ndarray], velocities: list[np.ndarray] | None = None, *,
                 n_bins: int, powers: list[np.ndarray] | None = None, window: int = 5,
                 max_step: int = 3, width: int = 8) -> TrackGate:
    """Follow the walker through range with a sliding-window predictor.

    Per frame the gate center is the detection nearest the constant-velocity
    prediction extrapolated from the previous `window` centers; frames with
    no detection inherit the prediction. Steps are clamped to max_step bins
    and centers to bounds that keep the full gate inside the profile.
    """
    frames = len(detections)
    first = next((i for i, d in enumerate(detections) if len(d) > 0), None)
    if first is None:
        raise NoTargetError("no detections in any frame")
    lo, hi = width, n_bins - 1 - width

    def clamp(value: float) -> int:
        return int(np.clip(round(value), lo, hi))

    init = detections[first]
    if powers is not None and len(powers[first]) == len(init):
        start = init[int(np.argmax(powers[first]))]
    else:
        start = int(init[int(np.argmin(np.abs(init - np.median(init))))])

    centers = np.empty(frames, dtype=np.int64)
    est_vel = np.zeros(frames, dtype=np.float64)
    history: list[int] = []
    prev = clamp(start)
    for f in range(frames):
        if len(history) >= 2:
            recent = history[-window:]
            step = (recent[-1] - recent[0]) / (len(recent) - 1)
            predicted = history[-1] + step
        elif history:
            predicted = history[-1]
        else:
            predicted = start
        dets = detections[f]
        if len(dets) > 0:
            chosen = int(dets[int(np.argmin(np.abs(dets - predicted)))])
            if velocities is not None and len(velocities[f]) == len(dets):
                est_vel[f] = velocities[f][int(np.argmin(np.abs(dets - predicted)))]
        else:
            chosen = int(round(predicted))
        chosen = int(np.clip(chosen, prev - max_step, prev + max_step)) if f > first else chosen
        center = clamp(chosen)
        centers[f] = center
        history.append(center)
        prev = center
    # Backfill leading frames that had no detections with the first center.
    centers[:first] = centers[first]
    return TrackGate(centers=centers, width=width, velocities=est_vel)


def extract_gate(rp: np.ndarray, gate: TrackGate) -> np.ndarray:
    """Coherently sum the gated range bins per chirp; [frames][chirps]."""
    frames, chirps, _ = rp.shape
    out = np.empty((frames, chirps), dtype=rp.dtype)
    for f in range(frames):
        c = int(gate.centers[f])
        out[f] = rp[f, :, c - gate.width: c + gate.width + 1].sum(axis=1)
    return out


def stft_spectrogram(gated: np.ndarray, *, window_len: int = 64, hop: int = 16) -> Spectrogram:
    """Magnitude STFT of the gated slow-time signal, log-compressed.

    Hann-windowed, zero Doppler centered (fftshift). Output rows are
    frequency bins, columns time bins; pixel value log(1 + |X|).
    """
    x = np.asarray(gated).ravel()
    if x.shape[0] < window_len:
        raise SizeError(f"need >= {window_len} slow-time samples, got {x.shape[0]}")
    win = np.hanning(window_len + 1)[:-1]  # periodic Hann
    n_cols = 1 + (x.shape[0] - window_len) // hop
    strided = np.lib.stride_tricks.sliding_window_view(x, window_len)[::hop][:n_cols]
    spec = np.fft.fftshift(np.fft.fft(strided * win, axis=1), axes=1)
    return Spectrogram(pixels=np.log1p(np.abs(spec)).T.astype(np.float32))


def stft_linear_magnitude(spec: Spectrogram) -> np.ndarray:
    """Invert the log compression; used by power-measurement oracles."""
    return np.expm1(spec.pixels.astype(np.float64))


def bilinear_resize(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Separable bilinear resize with corner-aligned sampling."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape

    def coords(n_out, n_in):
        if n_out == 1 or n_in == 1:
            return np.zeros(n_out)
        return np.arange(n_out) * (n_in - 1) / (n_out - 1)

    rows = coords(out_h, h)
    cols = coords(out_w, w)
    r0 = np.clip(np.floor(rows).astype(int), 0, h - 1)
    r1 = np.clip(r0 + 1, 0, h - 1)
    fr = (rows - r0)[:, None]
    tmp = img[r0] * (1 - fr) + img[r1] * fr
    c0 = np.clip(np.floor(cols).astype(int), 0, w - 1)
    c1 = np.clip(c0 + 1, 0, w - 1)
    fc = cols - c0
    return tmp[:, c0] * (1 - fc) + tmp[:, c1] * fc


def enhance_spectrogram(raw: Spectrogram, out_shape: tuple[int, int] = (128, 128)) -> Spectrogram:
    """Background removal and normalization of a raw spectrogram.

    Per-row median subtraction suppresses steady interference lines, the
    result is floored at zero, resized to the model input size, and min-max
    normalized so any non-constant input spans exactly [0, 1]. A constant
    input maps to all zeros.
    """
    p = raw.pixels.astype(np.float64)
    p = p - np.median(p, axis=1, keepdims=True)
    p = np.clip(p, 0.0, None)
    p = bilinear_resize(p, out_shape[0], out_shape[1])
    lo, hi = p.min(), p.max()
    if hi - lo < 1e-12:
        p = np.zeros_like(p)
    else:
        p = (p - lo) / (hi - lo)
    return Spectrogram(pixels=p.astype(np.float32), meta=dict(raw.meta))


def process_beat(sig: BeatSignal, dsp: DspConfig = DspConfig(), *, return_stages: bool = False):
    """Run the full chain from beat signal to enhanced Spectrogram."""
    cfg = sig.config
    rp = range_fft(sig)
    clean = remove_static_clutter(rp)
    power = power_profile(clean)
    frames = power.shape[0]
    detections, det_powers, det_vel = [], [], []
    for f in range(frames):
        dets = cfar_detect(power[f], dsp.cfar)
        detections.append(dets)
        det_powers.append(power[f][dets])
        if len(dets) > 0:
            dm = doppler_map(clean[f])
            rows = np.argmax(dm[:, dets], axis=0)
            det_vel.append(np.array([
                doppler_row_to_velocity(int(r), cfg.chirps_per_frame, cfg) for r in rows
            ]))
        else:
            det_vel.append(np.empty(0))
    gate = track_target(
        detections, det_vel, n_bins=cfg.samples_per_chirp, powers=det_powers,
        window=dsp.track_window, max_step=dsp.track_max_step, width=dsp.gate_width,
    )
    gated = extract_gate(clean, gate)
    raw = stft_spectrogram(gated, window_len=dsp.stft_window, hop=dsp.stft_hop)
    enhanced = enhance_spectrogram(raw, dsp.out_shape)
    if return_stages:
        return enhanced, {"range_profiles": rp, "clutter_removed": clean, "power": power,
                          "detections": detections, "gate": gate, "gated": gated, "raw": raw}
    return enhanced
