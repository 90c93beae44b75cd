"""Fast-time / slow-time FFT frontend: raw frames to per-receiver range-Doppler maps.

Both stages use unnormalized forward FFTs; thresholds downstream are
relative, so only consistency matters. The range axis keeps the lower half
of the spectrum; the Doppler axis is centered so zero velocity sits at bin
chirps_per_frame // 2. Complex phase across receivers is preserved
throughout for the later spatial processing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FrameCube, RadarConfig

_WINDOW_KINDS = ("rectangular", "hann")


@dataclass(frozen=True)
class WindowSpec:
    """Taper choice per FFT stage. Hann bounds leakage from strong static clutter."""

    fast_time_window: str = "hann"
    slow_time_window: str = "hann"

    def __post_init__(self):
        for name in (self.fast_time_window, self.slow_time_window):
            if name not in _WINDOW_KINDS:
                raise ValueError(f"unknown window {name!r}; expected one of {_WINDOW_KINDS}")


def make_window(kind: str, n: int) -> np.ndarray:
    if kind == "rectangular":
        return np.ones(n)
    return np.hanning(n)


@dataclass(frozen=True)
class RangeDopplerCube:
    """Per-receiver complex range-Doppler maps, indexed [rx][range_bin][doppler_bin]."""

    values: np.ndarray
    doppler_zero_index: int

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 3:
            raise ValueError("values must be [rx][range_bin][doppler_bin]")
        if not np.all(np.isfinite(v)):
            raise ValueError("range-Doppler values contain non-finite entries")
        if self.doppler_zero_index != v.shape[2] // 2:
            raise ValueError("doppler_zero_index must be num_doppler_bins // 2")

    @property
    def num_rx(self) -> int:
        return self.values.shape[0]

    @property
    def num_range_bins(self) -> int:
        return self.values.shape[1]

    @property
    def num_doppler_bins(self) -> int:
        return self.values.shape[2]


def range_fft(frame: FrameCube, cfg: RadarConfig, win: WindowSpec = WindowSpec()) -> np.ndarray:
    """Windowed FFT over fast time; returns [rx][chirp][range_bin] keeping the lower half.

    A pure beat tone at a bin-center frequency concentrates in that bin.
    """
    frame.check_config(cfg)
    samples = np.asarray(frame.samples, dtype=np.complex128)
    w = make_window(win.fast_time_window, cfg.samples_per_chirp)
    spectrum = np.fft.fft(samples * w, axis=2)
    return spectrum[:, :, : cfg.num_range_bins]


def doppler_fft(profiles: np.ndarray, cfg: RadarConfig, win: WindowSpec = WindowSpec()) -> RangeDopplerCube:
    """Windowed FFT across chirps, spectrum centered on zero Doppler.

    ``profiles`` is the [rx][chirp][range_bin] output of range_fft.
    """
    profiles = np.asarray(profiles, dtype=np.complex128)
    expected = (cfg.num_rx, cfg.chirps_per_frame, cfg.num_range_bins)
    if profiles.shape != expected:
        raise ValueError(f"profiles shape {profiles.shape} does not match {expected}")
    w = make_window(win.slow_time_window, cfg.chirps_per_frame)
    spectrum = np.fft.fft(profiles * w[None, :, None], axis=1)
    spectrum = np.fft.fftshift(spectrum, axes=1)
    values = np.moveaxis(spectrum, 1, 2)  # -> [rx][range_bin][doppler_bin]
    return RangeDopplerCube(values=values, doppler_zero_index=cfg.chirps_per_frame // 2)


def process_frame(frame: FrameCube, cfg: RadarConfig, win: WindowSpec = WindowSpec()) -> RangeDopplerCube:
    """Range FFT followed by Doppler FFT."""
    return doppler_fft(range_fft(frame, cfg, win), cfg, win)


def zero_doppler_window(cube: RangeDopplerCube, half_width: int = 2) -> np.ndarray:
    """Doppler bin indices centered on zero velocity, 2*half_width + 1 wide."""
    if half_width < 0:
        raise ValueError("half_width must be >= 0")
    lo = cube.doppler_zero_index - half_width
    hi = cube.doppler_zero_index + half_width
    if lo < 0 or hi >= cube.num_doppler_bins:
        raise ValueError("Doppler window exceeds cube bounds")
    return np.arange(lo, hi + 1)
