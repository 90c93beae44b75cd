"""End-to-end composition: frames -> range-Doppler -> clutter filter -> RA map -> detections.

The clutter state is reset at the start of every recording and stepped
sequentially; distinct recordings are independent. Sweeping the detector
sensitivity k reuses the per-frame power and training-mean maps, since the
threshold is k times a k-independent mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import capon as capon_mod
from . import cfar as cfar_mod
from . import dbf as dbf_mod
from .cfar import CfarConfig, DetectionSet, Detection, MapAxes
from .core import RadarConfig, range_resolution
from .frontend import WindowSpec, process_frame, zero_doppler_window
from .mti import init_clutter, mti_step
from .recordings import RunManifest
from .scoring import TrialRecord
from .sim import Recording


def build_grid(manifest: RunManifest) -> dbf_mod.SteeringGrid:
    return dbf_mod.default_grid(theta_max_deg=manifest.theta_max_deg,
                                theta_step_deg=manifest.theta_step_deg,
                                elevations_deg=manifest.elevations_deg)


def build_cfar(manifest: RunManifest) -> CfarConfig:
    return CfarConfig(guard_cells=manifest.guard_cells,
                      training_cells=manifest.training_cells,
                      k=manifest.k, edge_policy=manifest.edge_policy)


def build_axes(cfg: RadarConfig, grid: dbf_mod.SteeringGrid) -> MapAxes:
    return cfar_mod.map_axes(range_resolution(cfg), grid.azimuth_angles, cfg.num_range_bins)


def normalize_map(power: np.ndarray) -> np.ndarray:
    """Scale a map to unit maximum; zero maps pass through."""
    peak = power.max()
    return power / peak if peak > 0 else power


class MapSmoother:
    """Moving average over the last F maps, a stabilizing option (off by default)."""

    def __init__(self, n_frames: int = 3):
        if n_frames < 1:
            raise ValueError("n_frames must be >= 1")
        self.n_frames = n_frames
        self._history: list[np.ndarray] = []

    def step(self, power: np.ndarray) -> np.ndarray:
        self._history.append(power)
        if len(self._history) > self.n_frames:
            self._history.pop(0)
        return np.mean(self._history, axis=0)


@dataclass(frozen=True)
class FrameOutput:
    frame_index: int
    power: np.ndarray          # RA map values
    threshold_base: np.ndarray  # training-ring mean; threshold = k * base
    evaluable: np.ndarray       # cells the detector may fire on
    detections: DetectionSet    # post-suppression detections at the manifest k


def process_recording(rec: Recording, manifest: RunManifest):
    """Yield one FrameOutput per frame, stepping the clutter filter in order."""
    cfg = rec.config
    geom = rec.geometry
    grid = build_grid(manifest)
    cfar_cfg = build_cfar(manifest)
    win = WindowSpec(fast_time_window=manifest.fast_time_window,
                     slow_time_window=manifest.slow_time_window)
    weights = dbf_mod.dbf_weights(grid, geom) if manifest.method == "dbf" else None
    if manifest.capon_channels == "pair":
        channels = np.asarray(geom.azimuth_pair, dtype=int)
    else:
        channels = np.arange(geom.num_rx)

    state = init_clutter((cfg.num_rx, cfg.num_range_bins, cfg.chirps_per_frame),
                         alpha=manifest.mti_alpha)
    smoother = MapSmoother(manifest.smooth_frames) if manifest.smooth_frames > 0 else None

    for frame in rec.frames:
        rd = process_frame(frame, cfg, win)
        state, filtered = mti_step(state, rd)
        window = zero_doppler_window(filtered, manifest.doppler_half_width)
        if manifest.method == "dbf":
            spectrum = dbf_mod.dbf_power(filtered, weights, window)
            ra = dbf_mod.dbf_range_azimuth(spectrum, frame_index=frame.frame_index)
        else:
            ra = capon_mod.capon_range_azimuth(filtered, grid, window, channels,
                                               geom=geom, frame_index=frame.frame_index)
        power = ra.power
        if manifest.normalize_map:
            power = normalize_map(power)
        if smoother is not None:
            power = smoother.step(power)
        base, evaluable, skipped = cfar_mod.training_stats(power, cfar_cfg)
        dets = detections_from_maps(power, base, evaluable, cfar_cfg.k,
                                    frame_index=frame.frame_index, skipped=skipped)
        yield FrameOutput(frame_index=frame.frame_index, power=power,
                          threshold_base=base, evaluable=evaluable, detections=dets)


def detections_from_maps(power: np.ndarray, base: np.ndarray, evaluable: np.ndarray,
                         k: float, frame_index: int = 0, skipped: int = 0,
                         suppression: str = "max_per_component") -> DetectionSet:
    """Threshold cached maps at sensitivity k and apply suppression."""
    mask = evaluable & (power > k * base)
    rs, cs = np.nonzero(mask)
    dets = tuple(Detection(int(r), int(c), float(power[r, c]), float(k * base[r, c]))
                 for r, c in zip(rs, cs))
    raw = DetectionSet(detections=dets, frame_index=frame_index,
                       map_shape=power.shape, skipped_cells=skipped)
    return cfar_mod.suppress(raw, policy=suppression)


def score_recording(rec: Recording, manifest: RunManifest,
                    candidate_boxes=None) -> TrialRecord:
    """Per-frame hit/false-positive flags for one recording.

    Occupied recordings score hits against their own truth boxes; empty
    recordings score detections inside the union of ``candidate_boxes``
    (the view's plausible subject regions).
    """
    grid = build_grid(manifest)
    axes = build_axes(rec.config, grid)
    if rec.label == "occupied":
        boxes = rec.truth
    else:
        boxes = tuple(candidate_boxes or ())
        if not boxes:
            raise ValueError("empty recordings need candidate ROI boxes to score")
    flags = [cfar_mod.hit_test(out.detections, boxes, axes)
             for out in process_recording(rec, manifest)]
    return TrialRecord(subject_id=rec.subject_tag, view_tag=rec.view_tag,
                       location_tag=rec.location_tag, method_tag=manifest.method,
                       flags=np.asarray(flags, dtype=bool), label=rec.label)


@dataclass(frozen=True)
class CachedTrial:
    """Per-frame maps of one processed recording, for cheap k re-thresholding."""

    label: str
    boxes: tuple
    axes: MapAxes
    powers: np.ndarray      # (frames, range, azimuth) float32
    bases: np.ndarray
    evaluable: np.ndarray   # (range, azimuth) bool, k-independent


def cache_recording(rec: Recording, manifest: RunManifest, candidate_boxes=None) -> CachedTrial:
    grid = build_grid(manifest)
    axes = build_axes(rec.config, grid)
    powers, bases = [], []
    evaluable = None
    for out in process_recording(rec, manifest):
        powers.append(out.power.astype(np.float32))
        bases.append(out.threshold_base.astype(np.float32))
        evaluable = out.evaluable
    boxes = rec.truth if rec.label == "occupied" else tuple(candidate_boxes or ())
    return CachedTrial(label=rec.label, boxes=boxes, axes=axes,
                       powers=np.stack(powers), bases=np.stack(bases),
                       evaluable=evaluable)


def flags_at_k(cached: CachedTrial, k: float) -> np.ndarray:
    """Recompute per-frame hit flags at sensitivity k from cached maps."""
    n = cached.powers.shape[0]
    flags = np.zeros(n, dtype=bool)
    for i in range(n):
        dets = detections_from_maps(cached.powers[i].astype(float),
                                    cached.bases[i].astype(float),
                                    cached.evaluable, k, frame_index=i)
        flags[i] = cfar_mod.hit_test(dets, cached.boxes, cached.axes)
    return flags
