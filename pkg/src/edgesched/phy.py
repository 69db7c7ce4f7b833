"""Wireless link model and user mobility.

Links are frequency-division multiplexed: the system bandwidth is split
evenly into one channel per server slot, so a channel's width is
``total_bandwidth / (channels_per_server * num_servers)``. Small-scale
fading is a unit-variance complex Gaussian redrawn once per time slot;
large-scale attenuation follows a power-law in distance.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, replace

from .errors import DegenerateGeometryError, UnreachableServerError

TWO_PI = 2.0 * math.pi


def noise_psd_from_dbm(dbm_per_hz: float) -> float:
    """Convert a noise power spectral density from dBm/Hz to W/Hz."""
    return 10.0 ** ((dbm_per_hz - 30.0) / 10.0)


@dataclass(frozen=True)
class RadioConfig:
    """Static radio parameters shared by every link."""

    total_bandwidth: float       # Hz
    num_servers: int
    channels_per_server: int
    tx_power: float              # W
    noise_psd: float             # W/Hz
    pathloss_exponent: float

    def __post_init__(self):
        if self.total_bandwidth <= 0:
            raise ValueError("total_bandwidth must be positive")
        if self.num_servers < 1 or self.channels_per_server < 1:
            raise ValueError("server and channel counts must be at least 1")
        if self.tx_power <= 0:
            raise ValueError("tx_power must be positive")
        if self.noise_psd <= 0:
            raise ValueError("noise_psd must be positive")
        if not 2.0 <= self.pathloss_exponent <= 4.0:
            raise ValueError("pathloss_exponent must lie in [2, 4]")

    @property
    def channel_bandwidth(self) -> float:
        return self.total_bandwidth / (self.channels_per_server * self.num_servers)


@dataclass(frozen=True)
class ChannelDraw:
    """One fading realization over one link."""

    fading: complex
    distance: float

    def __post_init__(self):
        if self.distance <= 0:
            raise DegenerateGeometryError("link distance must be positive")


def sample_fading(rng: random.Random) -> complex:
    """Unit-variance circularly symmetric complex Gaussian draw."""
    scale = math.sqrt(0.5)
    return complex(rng.gauss(0.0, scale), rng.gauss(0.0, scale))


def channel_gain(draw: ChannelDraw, pathloss_exponent: float) -> complex:
    """Composite gain: fading scaled by distance to the -p/2 power."""
    if draw.distance <= 0:
        raise DegenerateGeometryError("link distance must be positive")
    return draw.fading / draw.distance ** (pathloss_exponent / 2.0)


def achievable_rate(gain: complex, config: RadioConfig) -> float:
    """Shannon rate of one channel in bits per second."""
    bandwidth = config.channel_bandwidth
    snr = (abs(gain) ** 2) * config.tx_power / (bandwidth * config.noise_psd)
    return bandwidth * math.log2(1.0 + snr)


def transmission_delay(data_size: float, rate: float) -> float:
    """Seconds to push ``data_size`` bits through a link at ``rate`` b/s."""
    if data_size < 0:
        raise ValueError("data_size must be nonnegative")
    if rate <= 0:
        raise UnreachableServerError("link rate must be positive")
    return data_size / rate


@dataclass(frozen=True)
class UserMotionState:
    """Position and heading of one user inside a rectangular area.

    ``area`` is the (width, height) of the rectangle anchored at the
    origin; motion reflects off its edges.
    """

    position: tuple[float, float]
    heading: float               # radians in [0, 2*pi)
    speed: float                 # m/s
    turn_probability: float
    area: tuple[float, float]

    def __post_init__(self):
        if self.speed < 0:
            raise ValueError("speed must be nonnegative")
        if not 0.0 <= self.turn_probability <= 1.0:
            raise ValueError("turn_probability must lie in [0, 1]")
        if self.area[0] <= 0 or self.area[1] <= 0:
            raise ValueError("area sides must be positive")


def _fold(value: float, hi: float) -> tuple[float, bool]:
    # Mirror-fold into [0, hi]; the flag reports an odd number of bounces.
    period = 2.0 * hi
    v = value % period
    if v > hi:
        return period - v, True
    return v, False


def mobility_step(state: UserMotionState, dt: float, rng: random.Random) -> UserMotionState:
    """Advance one time slot: keep the heading with the configured
    probability, otherwise redraw it uniformly; then move ``dt * speed``
    meters, reflecting at the area boundary."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    heading = state.heading
    if rng.random() < state.turn_probability:
        heading = rng.uniform(0.0, TWO_PI)
    step = dt * state.speed
    x, flipped_x = _fold(state.position[0] + step * math.cos(heading), state.area[0])
    y, flipped_y = _fold(state.position[1] + step * math.sin(heading), state.area[1])
    if flipped_x or flipped_y:
        dx = math.cos(heading) * (-1.0 if flipped_x else 1.0)
        dy = math.sin(heading) * (-1.0 if flipped_y else 1.0)
        heading = math.atan2(dy, dx) % TWO_PI
    return replace(state, position=(x, y), heading=heading)
