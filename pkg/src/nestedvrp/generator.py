"""Seeded benchmark instance generation.

Three spatial patterns on a 100x100-unit map (1 unit = 100 m): uniform
integer coordinates, a single circular city, and two city centers 200 units
apart.  Observation times are uniform on [0, obs_max].  The depot (index 0)
is drawn by the same pattern rule as every other location.  Identical specs
and seeds produce bit-identical instances.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import Enum

from .core import Instance, Location, ParameterError


class Pattern(str, Enum):
    UNIFORM = "uniform"
    SINGLE_CENTER = "single-center"
    DOUBLE_CENTER = "double-center"


PATTERN_ALIASES = {
    "u": Pattern.UNIFORM,
    "uniform": Pattern.UNIFORM,
    "sc": Pattern.SINGLE_CENTER,
    "single-center": Pattern.SINGLE_CENTER,
    "singlecenter": Pattern.SINGLE_CENTER,
    "dc": Pattern.DOUBLE_CENTER,
    "double-center": Pattern.DOUBLE_CENTER,
    "doublecenter": Pattern.DOUBLE_CENTER,
}

_CENTER = (50.0, 50.0)
_DC_CENTERS = ((-50.0, 50.0), (150.0, 50.0))  # 200 units apart
_RADIAL_SIGMA = 25.0
_RADIAL_MAX = 50.0
_DRONE_SPEED = 30.0
_BATTERY_S = 900.0
_SWAP_S = 100.0


@dataclass(frozen=True)
class GenSpec:
    pattern: Pattern
    n: int
    alpha: float = 1.0
    seed: int = 0
    obs_max: float = 250.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ParameterError("need at least one location to observe")
        if self.alpha < 1:
            raise ParameterError("speed ratio must be at least 1")


def _radial_point(rng: random.Random, center: tuple[float, float]) -> tuple[float, float]:
    # half-normal radius, resampled past the city limit
    while True:
        r = abs(rng.gauss(0.0, _RADIAL_SIGMA))
        if r <= _RADIAL_MAX:
            break
    theta = rng.uniform(0.0, 2.0 * math.pi)
    return center[0] + r * math.cos(theta), center[1] + r * math.sin(theta)


def _draw_point(rng: random.Random, pattern: Pattern) -> tuple[float, float]:
    if pattern is Pattern.UNIFORM:
        return float(rng.randint(0, 100)), float(rng.randint(0, 100))
    if pattern is Pattern.SINGLE_CENTER:
        return _radial_point(rng, _CENTER)
    center = _DC_CENTERS[0] if rng.random() < 0.5 else _DC_CENTERS[1]
    return _radial_point(rng, center)


def generate(spec: GenSpec) -> Instance:
    """Draw an instance: depot plus n observed locations."""
    rng = random.Random(spec.seed)
    locs = []
    dx, dy = _draw_point(rng, spec.pattern)
    locs.append(Location(id=0, x=dx, y=dy, obs_s=0.0))
    for i in range(1, spec.n + 1):
        x, y = _draw_point(rng, spec.pattern)
        obs = rng.uniform(0.0, spec.obs_max)
        locs.append(Location(id=i, x=x, y=y, obs_s=obs))
    short = {"uniform": "u", "single-center": "sc", "double-center": "dc"}
    name = f"{short[spec.pattern.value]}-n{spec.n}-a{spec.alpha:g}-s{spec.seed}"
    return Instance(
        id=name,
        locations=tuple(locs),
        drone_speed=_DRONE_SPEED,
        truck_speed=_DRONE_SPEED / spec.alpha,
        battery_s=_BATTERY_S,
        swap_s=_SWAP_S,
        unit_scale=100.0,
    )
