"""Scenario definition and loading.

A scenario is a YAML key/value tree (see scenarios/default.yaml and the
README schema table); absent keys take the defaults below, which reproduce
the reference mission: 2 km x 2 km zone, 3 UAVs at 25 m/s and 100 m height,
100 m track spacing, 60-minute limit.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields, replace

import numpy as np
import yaml

from seascan.guidance import GuidanceParams
from seascan.radio import LinkParams
from seascan.sensing import CameraModel, ConfusionMatrix, RadarModel, VESSEL_CLASSES
from seascan.vehicle import PidGains, VehicleParams

STRATEGIES = ("parallel", "creeping", "spiral", "informed")


class ScenarioError(ValueError):
    """Scenario file failed validation."""


@dataclass
class VesselSpec:
    vessel_class: str
    position: tuple
    velocity: tuple = (0.0, 0.0)
    is_target: bool = False


@dataclass
class Scenario:
    seed: int = 0
    zone: tuple = (0.0, 0.0, 2000.0, 2000.0)
    mission_limit: float = 3600.0
    uav_count: int = 3
    strategy: str = "parallel"
    dt: float = 0.02

    cruise_speed: float = 25.0
    cruise_height: float = 100.0
    track_spacing: float = 100.0

    vessel_count: int = 10
    target_class: str = "E"
    target_speed: float = 0.5
    max_vessel_speed: float = 5.0
    vessel_specs: list = None  # explicit list overrides random spawning

    # south edge center: both relay configurations stay one hop from the base,
    # so neither half needs a long single-node corridor chain
    base: tuple = (1000.0, -100.0)
    runway_size: float = 50.0
    relay_spacing: float = 300.0
    relay_speed: float = 15.0
    relay_count_override: int = None
    reposition_threshold: float = 0.9

    ranging_max: float = 1200.0
    ranging_noise_frac: float = 0.01
    # relays hold commanded stations, so position inheritance is much tighter
    # than the generic (0, 5, 15) defaults of the localization module
    tier_sigmas: tuple = (0.0, 2.0, 5.0)

    stop_on_detect: bool = False
    detect_debounce: int = 1
    radar_warmup: float = 30.0
    inspect_loops: int = 2
    # process noise per (position, velocity, acceleration) channel; the
    # acceleration term must admit the several-m/s^2 swings of banked turns
    lkf_q: tuple = (0.01, 0.25, 16.0)

    vehicle: VehicleParams = field(default_factory=VehicleParams)
    # lead the U-turn reversals: the camera sweeps 125-375 m ahead, so the
    # leg ends stay observed while the turnaround sheds dead time
    guidance: GuidanceParams = field(default_factory=lambda: GuidanceParams(turn_lead=60.0))
    # TTL 8 cannot span the far half of the 2 km zone through the relay
    # corridor; 12 keeps the flood radius comfortably over the worst corner
    link: LinkParams = field(default_factory=lambda: LinkParams(ttl=12))
    camera: CameraModel = field(default_factory=CameraModel)
    radar: RadarModel = field(default_factory=RadarModel)
    confusion: ConfusionMatrix = field(default_factory=ConfusionMatrix.default)

    def __post_init__(self):
        x0, y0, x1, y1 = self.zone
        if x1 <= x0 or y1 <= y0:
            raise ScenarioError("zone extent must be positive")
        if self.mission_limit <= 0:
            raise ScenarioError("mission_limit must be positive")
        if self.uav_count not in (1, 2, 3):
            raise ScenarioError("uav_count must be 1, 2 or 3")
        if self.strategy not in STRATEGIES:
            raise ScenarioError(f"strategy must be one of {STRATEGIES}")
        if self.dt <= 0:
            raise ScenarioError("dt must be positive")
        if self.target_class not in VESSEL_CLASSES:
            raise ScenarioError(f"target class must be one of {VESSEL_CLASSES}")
        if self.vessel_specs is not None:
            targets = sum(1 for v in self.vessel_specs if v.is_target)
            if targets != 1:
                raise ScenarioError(f"exactly one target vessel required, got {targets}")
            for v in self.vessel_specs:
                vx, vy = v.velocity
                if (vx * vx + vy * vy) ** 0.5 > self.max_vessel_speed + 1e-9:
                    raise ScenarioError("vessel speed exceeds max_vessel_speed")

    @property
    def zone_mid_x(self):
        return 0.5 * (self.zone[0] + self.zone[2])

    def rng(self, stream: str):
        """Named per-subsystem generator derived from the root seed.

        Streams are independent by construction, so adding draws to one
        subsystem never perturbs another's sequence.
        """
        digest = hashlib.sha256(stream.encode()).digest()
        key = tuple(int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4))
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=key))


_SECTION_TYPES = {
    "vehicle": VehicleParams,
    "guidance": GuidanceParams,
    "link": LinkParams,
    "camera": CameraModel,
    "radar": RadarModel,
}


def load_scenario(path) -> Scenario:
    """Parse and validate a scenario file, applying defaults for absent keys."""
    try:
        with open(path) as f:
            raw = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ScenarioError(f"cannot parse scenario file {path}: {e}") from e
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ScenarioError(f"scenario file {path} must be a key/value mapping")
    return scenario_from_dict(raw)


def scenario_from_dict(raw: dict) -> Scenario:
    kwargs = {}
    known = {f.name for f in fields(Scenario)}
    for key, value in raw.items():
        if key not in known:
            raise ScenarioError(f"unknown scenario key {key!r}")
        if key in _SECTION_TYPES:
            kwargs[key] = _build_section(key, value)
        elif key == "confusion":
            kwargs[key] = _build_confusion(value)
        elif key == "vessel_specs":
            kwargs[key] = [_build_vessel_spec(v) for v in value]
        elif key in ("zone", "base", "tier_sigmas"):
            kwargs[key] = tuple(value)
        elif key == "strategy":
            kwargs[key] = str(value).lower()
        else:
            kwargs[key] = value
    return Scenario(**kwargs)


def _build_section(name, value):
    cls = _SECTION_TYPES[name]
    known = {f.name for f in fields(cls)}
    kwargs = {}
    for key, v in value.items():
        if key not in known:
            raise ScenarioError(f"unknown key {key!r} in section {name!r}")
        if key in ("roll_gains", "pitch_gains"):
            kwargs[key] = PidGains(**v)
        elif key == "prop_curve":
            kwargs[key] = tuple(v)
        else:
            kwargs[key] = v
    return cls(**kwargs)


def _build_confusion(value):
    rows = {c: dict(r) for c, r in value["rows"].items()}
    miss = dict(value["miss"])
    return ConfusionMatrix(rows, miss)


def _build_vessel_spec(value):
    return VesselSpec(
        vessel_class=value["vessel_class"],
        position=tuple(value["position"]),
        velocity=tuple(value.get("velocity", (0.0, 0.0))),
        is_target=bool(value.get("is_target", False)),
    )


def with_overrides(scn: Scenario, **overrides) -> Scenario:
    return replace(scn, **overrides)
