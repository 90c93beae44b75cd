"""Synthetic SIMO FMCW scene generation with ground truth.

Each scatterer contributes, per chirp, a fast-time complex tone at the beat
frequency of its (possibly micro-motion modulated) range, with the carrier
phase -4*pi*r/lambda advancing chirp to chirp, multiplied across receivers
by the arrival vector (the conjugate of the beamformer steering weights).
Per-sample complex white noise is drawn from a counter-based stream keyed
by (seed, frame index), so frames synthesize identically in any order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cfar import GroundTruthBox
from .core import (SPEED_OF_LIGHT, ArrayGeometry, FrameCube, RadarConfig,
                   chirp_slope, max_range)
from .dbf import element_phases

DEFAULT_BOX_HALF_EXTENTS = (0.45, math.radians(10.0))


@dataclass(frozen=True)
class TargetSpec:
    """Quasi-static subject: a reflector with millimetric sinusoidal range jitter."""

    range_m: float
    azimuth_rad: float
    elevation_rad: float = 0.0
    amplitude: float = 1.0
    micro_motion_amplitude_m: float = 1e-3
    micro_motion_rate_hz: float = 0.25


@dataclass(frozen=True)
class ClutterSpec:
    """Static reflector (furniture, walls, multipath stand-in)."""

    range_m: float
    azimuth_rad: float
    elevation_rad: float = 0.0
    amplitude: float = 1.0


@dataclass(frozen=True)
class SceneSpec:
    targets: tuple = ()
    clutter: tuple = ()
    noise_std: float = 0.0
    seed: int = 0
    n_frames: int = 1
    view_tag: str = ""
    location_tag: str = ""
    subject_tag: str = ""
    box_half_extents: tuple = DEFAULT_BOX_HALF_EXTENTS

    def __post_init__(self):
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        if self.n_frames < 1:
            raise ValueError("n_frames must be >= 1")
        for t in self.targets:
            if t.amplitude < 0 or t.micro_motion_amplitude_m < 0:
                raise ValueError("target amplitudes must be >= 0")
            if abs(t.azimuth_rad) > np.pi / 2:
                raise ValueError("target azimuth must satisfy |azimuth| <= pi/2")
        for c in self.clutter:
            if c.amplitude < 0:
                raise ValueError("clutter amplitude must be >= 0")
            if abs(c.azimuth_rad) > np.pi / 2:
                raise ValueError("clutter azimuth must satisfy |azimuth| <= pi/2")

    @property
    def label(self) -> str:
        return "occupied" if self.targets else "empty"


def validate_scene(scene: SceneSpec, cfg: RadarConfig) -> None:
    """Reject scatterers outside the unambiguous range span."""
    r_max = max_range(cfg)
    for t in scene.targets:
        if not 0.0 < t.range_m - t.micro_motion_amplitude_m:
            raise ValueError(f"target range {t.range_m} m reaches zero under micro-motion")
        if t.range_m + t.micro_motion_amplitude_m >= r_max:
            raise ValueError(f"target range {t.range_m} m outside unambiguous span {r_max:.2f} m")
    for c in scene.clutter:
        if not 0.0 < c.range_m < r_max:
            raise ValueError(f"clutter range {c.range_m} m outside unambiguous span {r_max:.2f} m")


def arrival_vector(theta: float, phi: float, geom: ArrayGeometry) -> np.ndarray:
    """Per-receiver arrival phases: elementwise conjugate of the steering weights."""
    return np.exp(-1j * element_phases(geom, theta, phi))


def _frame_rng(seed: int, frame_idx: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(frame_idx,)))


def synthesize_frame(scene: SceneSpec, cfg: RadarConfig, geom: ArrayGeometry,
                     frame_idx: int) -> FrameCube:
    """Deterministic frame synthesis for (scene.seed, frame_idx)."""
    validate_scene(scene, cfg)
    slope = chirp_slope(cfg)
    lam = geom.wavelength
    t_frame = frame_idx / cfg.frame_rate
    chirp_times = t_frame + np.arange(cfg.chirps_per_frame) * cfg.chirp_repetition_interval
    sample_times = np.arange(cfg.samples_per_chirp) * (cfg.chirp_duration / cfg.samples_per_chirp)

    cube = np.zeros((cfg.num_rx, cfg.chirps_per_frame, cfg.samples_per_chirp),
                    dtype=np.complex128)

    def add_scatterer(r0, az, el, amp, mm_amp, mm_rate):
        if amp == 0.0:
            return
        r = r0 + mm_amp * np.sin(2.0 * np.pi * mm_rate * chirp_times)  # (chirps,)
        f_beat = slope * 2.0 * r / SPEED_OF_LIGHT
        phase = (2.0 * np.pi * f_beat[:, None] * sample_times[None, :]
                 - (4.0 * np.pi / lam) * r[:, None])                    # (chirps, samples)
        v = arrival_vector(az, el, geom)                                # (rx,)
        cube[...] += amp * v[:, None, None] * np.exp(1j * phase)[None, :, :]

    for t in scene.targets:
        add_scatterer(t.range_m, t.azimuth_rad, t.elevation_rad, t.amplitude,
                      t.micro_motion_amplitude_m, t.micro_motion_rate_hz)
    for c in scene.clutter:
        add_scatterer(c.range_m, c.azimuth_rad, c.elevation_rad, c.amplitude, 0.0, 0.0)

    if scene.noise_std > 0:
        rng = _frame_rng(scene.seed, frame_idx)
        shape = cube.shape
        scale = scene.noise_std / np.sqrt(2.0)
        cube += scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))

    return FrameCube(samples=cube, frame_index=frame_idx, timestamp=t_frame)


@dataclass(frozen=True)
class Recording:
    """An ordered run of frames with its configuration and ground truth."""

    config: RadarConfig
    geometry: ArrayGeometry
    frames: tuple
    truth: tuple
    label: str
    seed: int = 0
    view_tag: str = ""
    location_tag: str = ""
    subject_tag: str = ""

    def __post_init__(self):
        if self.label not in ("occupied", "empty"):
            raise ValueError("label must be 'occupied' or 'empty'")
        if (self.label == "empty") != (len(self.truth) == 0):
            raise ValueError("truth boxes must be present exactly for occupied recordings")

    @property
    def n_frames(self) -> int:
        return len(self.frames)


def truth_boxes(scene: SceneSpec) -> tuple:
    return tuple(
        GroundTruthBox(center=(t.range_m, t.azimuth_rad),
                       half_extents=scene.box_half_extents,
                       view_tag=scene.view_tag, location_tag=scene.location_tag)
        for t in scene.targets
    )


def synthesize_recording(scene: SceneSpec, cfg: RadarConfig, geom: ArrayGeometry) -> Recording:
    frames = tuple(synthesize_frame(scene, cfg, geom, i) for i in range(scene.n_frames))
    return Recording(config=cfg, geometry=geom, frames=frames, truth=truth_boxes(scene),
                     label=scene.label, seed=scene.seed, view_tag=scene.view_tag,
                     location_tag=scene.location_tag, subject_tag=scene.subject_tag)


# --- JSON scene schema (angles in degrees in external files) ---

def _path_error(path: str, msg: str) -> ValueError:
    return ValueError(f"{path}: {msg}")


def _require_number(obj, path, minimum=None):
    if not isinstance(obj, (int, float)) or isinstance(obj, bool):
        raise _path_error(path, "expected a number")
    if minimum is not None and obj < minimum:
        raise _path_error(path, f"must be >= {minimum}")
    return float(obj)


def scene_from_dict(d: dict) -> SceneSpec:
    if not isinstance(d, dict):
        raise ValueError("scene: expected a JSON object")
    targets = []
    for i, t in enumerate(d.get("targets", [])):
        p = f"targets[{i}]"
        targets.append(TargetSpec(
            range_m=_require_number(t.get("range_m"), f"{p}.range_m", 0.0),
            azimuth_rad=math.radians(_require_number(t.get("azimuth_deg", 0.0), f"{p}.azimuth_deg")),
            elevation_rad=math.radians(_require_number(t.get("elevation_deg", 0.0), f"{p}.elevation_deg")),
            amplitude=_require_number(t.get("amplitude", 1.0), f"{p}.amplitude", 0.0),
            micro_motion_amplitude_m=_require_number(
                t.get("micro_motion_amplitude_m", 1e-3), f"{p}.micro_motion_amplitude_m", 0.0),
            micro_motion_rate_hz=_require_number(
                t.get("micro_motion_rate_hz", 0.25), f"{p}.micro_motion_rate_hz", 0.0),
        ))
    clutter = []
    for i, c in enumerate(d.get("clutter", [])):
        p = f"clutter[{i}]"
        clutter.append(ClutterSpec(
            range_m=_require_number(c.get("range_m"), f"{p}.range_m", 0.0),
            azimuth_rad=math.radians(_require_number(c.get("azimuth_deg", 0.0), f"{p}.azimuth_deg")),
            elevation_rad=math.radians(_require_number(c.get("elevation_deg", 0.0), f"{p}.elevation_deg")),
            amplitude=_require_number(c.get("amplitude", 1.0), f"{p}.amplitude", 0.0),
        ))
    box = d.get("box_half_extents", None)
    if box is None:
        half = DEFAULT_BOX_HALF_EXTENTS
    else:
        half = (_require_number(box.get("range_m"), "box_half_extents.range_m", 0.0),
                math.radians(_require_number(box.get("azimuth_deg"), "box_half_extents.azimuth_deg", 0.0)))
    n_frames = d.get("n_frames", 1)
    if not isinstance(n_frames, int) or n_frames < 1:
        raise _path_error("n_frames", "expected a positive integer")
    seed = d.get("seed", 0)
    if not isinstance(seed, int):
        raise _path_error("seed", "expected an integer")
    return SceneSpec(
        targets=tuple(targets), clutter=tuple(clutter),
        noise_std=_require_number(d.get("noise_std", 0.0), "noise_std", 0.0),
        seed=seed, n_frames=n_frames,
        view_tag=str(d.get("view_tag", "")), location_tag=str(d.get("location_tag", "")),
        subject_tag=str(d.get("subject_tag", "")), box_half_extents=half,
    )


def scene_to_dict(scene: SceneSpec) -> dict:
    return {
        "targets": [
            {"range_m": t.range_m, "azimuth_deg": math.degrees(t.azimuth_rad),
             "elevation_deg": math.degrees(t.elevation_rad), "amplitude": t.amplitude,
             "micro_motion_amplitude_m": t.micro_motion_amplitude_m,
             "micro_motion_rate_hz": t.micro_motion_rate_hz}
            for t in scene.targets
        ],
        "clutter": [
            {"range_m": c.range_m, "azimuth_deg": math.degrees(c.azimuth_rad),
             "elevation_deg": math.degrees(c.elevation_rad), "amplitude": c.amplitude}
            for c in scene.clutter
        ],
        "noise_std": scene.noise_std,
        "seed": scene.seed,
        "n_frames": scene.n_frames,
        "view_tag": scene.view_tag,
        "location_tag": scene.location_tag,
        "subject_tag": scene.subject_tag,
        "box_half_extents": {"range_m": scene.box_half_extents[0],
                             "azimuth_deg": math.degrees(scene.box_half_extents[1])},
    }
