"""Phase-and-sum digital beamforming over a (azimuth, elevation) look grid.

Steering weights carry one unit-modulus phase term per receiver offset:
w_m(theta, phi) = exp(j * 2*pi/lambda * (d_x,m * sin(theta) * cos(phi)
                                         + d_y,m * sin(phi))),
with azimuth theta measured from broadside so the map is one-to-one over a
symmetric look grid. The beam output sums z_m * w_m without conjugation;
the simulator generates arrivals as the elementwise conjugate of these
weights so the beam peak lands on the true direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ArrayGeometry
from .frontend import RangeDopplerCube


@dataclass(frozen=True)
class SteeringGrid:
    """Look directions in radians. Azimuth must be strictly increasing and include 0."""

    azimuth_angles: np.ndarray
    elevation_angles: np.ndarray

    def __post_init__(self):
        az = np.asarray(self.azimuth_angles, dtype=float)
        el = np.asarray(self.elevation_angles, dtype=float)
        if az.ndim != 1 or az.size < 2:
            raise ValueError("azimuth grid needs >= 2 points")
        if np.any(np.diff(az) <= 0):
            raise ValueError("azimuth grid must be strictly increasing")
        if not np.any(az == 0.0):
            raise ValueError("azimuth grid must include 0")
        if el.ndim != 1 or el.size < 1:
            raise ValueError("elevation grid needs >= 1 point")
        if el.size > 1 and np.any(np.diff(el) <= 0):
            raise ValueError("elevation grid must be strictly increasing")
        object.__setattr__(self, "azimuth_angles", az)
        object.__setattr__(self, "elevation_angles", el)

    @property
    def num_azimuth(self) -> int:
        return self.azimuth_angles.size

    @property
    def num_elevation(self) -> int:
        return self.elevation_angles.size


def default_grid(theta_max_deg: float = 60.0, theta_step_deg: float = 1.0,
                 elevations_deg: tuple = (-10.0, 0.0, 10.0)) -> SteeringGrid:
    """Azimuth +/-60 deg at 1 deg steps, three elevation cuts around boresight."""
    n = int(round(theta_max_deg / theta_step_deg))
    az = np.deg2rad(np.arange(-n, n + 1) * theta_step_deg)
    el = np.deg2rad(np.asarray(elevations_deg, dtype=float))
    return SteeringGrid(azimuth_angles=az, elevation_angles=el)


def element_phases(geom: ArrayGeometry, theta, phi) -> np.ndarray:
    """Steering phase per receiver for look direction(s) (theta, phi).

    Broadcasts over theta/phi; the receiver axis is last.
    """
    offsets = geom.offsets_array()  # (num_rx, 2)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    k = 2.0 * np.pi / geom.wavelength
    ux = (np.sin(theta) * np.cos(phi))[..., None]
    uy = np.sin(phi)[..., None]
    return k * (offsets[:, 0] * ux + offsets[:, 1] * uy)


@dataclass(frozen=True)
class DbfWeights:
    """Unit-modulus steering weights indexed [azimuth][elevation][rx]."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights)
        if w.ndim != 3:
            raise ValueError("weights must be [azimuth][elevation][rx]")
        if not np.allclose(np.abs(w), 1.0, atol=1e-12):
            raise ValueError("steering weights must be unit modulus")


def dbf_weights(grid: SteeringGrid, geom: ArrayGeometry) -> DbfWeights:
    theta = grid.azimuth_angles[:, None]
    phi = grid.elevation_angles[None, :]
    phases = element_phases(geom, theta, phi)  # (n_az, n_el, rx)
    return DbfWeights(weights=np.exp(1j * phases))


def dbf_power(rd: RangeDopplerCube, weights: DbfWeights, doppler_window: np.ndarray) -> np.ndarray:
    """Complex beam spectrum over (range, azimuth, elevation, doppler-in-window).

    P[r, t, p, d] = sum_m z_m[r, d] * w_m[t, p] on the selected Doppler bins.
    """
    dw = np.asarray(doppler_window, dtype=int)
    if dw.size == 0:
        raise ValueError("doppler_window must be non-empty")
    if dw.min() < 0 or dw.max() >= rd.num_doppler_bins:
        raise ValueError("doppler_window out of bin range")
    w = weights.weights
    if w.shape[2] != rd.num_rx:
        raise ValueError("weight receiver count does not match cube")
    z = rd.values[:, :, dw]  # (rx, range, d)
    return np.einsum("mrd,tpm->rtpd", z, w)


def dbf_range_azimuth(spectrum: np.ndarray, frame_index: int = 0) -> "RangeAzimuthMap":
    """Non-coherent integration of |P| across elevation and the Doppler window."""
    power = np.abs(spectrum).sum(axis=(2, 3))
    return RangeAzimuthMap(power=power, frame_index=frame_index, method_tag="dbf")


@dataclass(frozen=True)
class RangeAzimuthMap:
    """Real non-negative power over (range bin, azimuth bin) fed to the detector."""

    power: np.ndarray
    frame_index: int = 0
    method_tag: str = "dbf"
    clamp_count: int = 0  # adaptive-spectrum cells clamped on singular directions

    def __post_init__(self):
        p = np.asarray(self.power)
        if p.ndim != 2:
            raise ValueError("power must be [range_bin][azimuth_bin]")
        if not np.all(np.isfinite(p)):
            raise ValueError("power map contains non-finite values")
        if np.any(p < 0):
            raise ValueError("power map must be non-negative")
        if self.method_tag not in ("dbf", "capon"):
            raise ValueError("method_tag must be 'dbf' or 'capon'")
