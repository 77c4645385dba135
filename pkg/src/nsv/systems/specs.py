"""System descriptions, state conventions, and the evaluation-variable record.

State vectors are float64 arrays with a fixed component order per system
(angles in radians, unwrapped; velocities in rad/s; spring elongation in
meters):

    circular_motion          [theta, omega]
    single_pendulum          [theta, theta_dot]
    rigid_double_pendulum    [theta1, theta2, theta1_dot, theta2_dot]
    elastic_double_pendulum  [theta1, theta2, z, theta1_dot, theta2_dot, z_dot]

Angles are measured from the downward vertical; a point at angle theta and
distance L from its pivot sits at pivot + L*(sin theta, -cos theta) in a
y-up world frame.  PhysicalVariables (the evaluation-only record) uses
degrees and degrees/second to match how such tables are conventionally
reported.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

SYSTEM_NAMES = ("circular_motion", "single_pendulum",
                "rigid_double_pendulum", "elastic_double_pendulum")

_STATE_LABELS = {
    "circular_motion": ["theta", "omega"],
    "single_pendulum": ["theta", "theta_dot"],
    "rigid_double_pendulum": ["theta1", "theta2", "theta1_dot", "theta2_dot"],
    "elastic_double_pendulum": ["theta1", "theta2", "z",
                                "theta1_dot", "theta2_dot", "z_dot"],
}

_TRUE_ID = {"circular_motion": 2, "single_pendulum": 2,
            "rigid_double_pendulum": 4, "elastic_double_pendulum": 6}


def wrap_angle(a):
    """Wrap to (-pi, pi]."""
    w = np.asarray(a, dtype=np.float64)
    out = -((-w + np.pi) % (2.0 * np.pi) - np.pi)
    return float(out) if np.isscalar(a) or out.ndim == 0 else out


@dataclass
class RenderGeometry:
    """World-unit drawing sizes; the canvas is square and centered on the pivot."""

    half_extent: float
    arm1_halfwidth: float
    arm2_halfwidth: float = 0.0
    bob_radius: float = 0.1


@dataclass
class InitDistribution:
    """Initial-condition sampling ranges (uniform per component).

    Angles in radians around 0, velocities in rad/s around 0.  A range of
    (lo, hi) samples uniformly; velocities default to exactly zero unless a
    preset configures otherwise.
    """

    angle_range: tuple = (-5 * math.pi / 6, 5 * math.pi / 6)
    velocity_range: tuple = (0.0, 0.0)
    omega_range: tuple = (0.0, 0.0)        # circular motion: |omega| range, sign random
    z_range: tuple = (0.0, 0.0)            # elastic: spring elongation
    z_dot_range: tuple = (0.0, 0.0)


@dataclass
class SystemSpec:
    name: str
    dt: float = 1e-3                      # integration step (seconds)
    gravity: float = 9.81
    m1: float = 1.0
    m2: float = 1.0
    l1: float = 1.0
    l2: float = 1.0
    radius: float = 0.75                  # circular motion only
    spring_k: float = 40.0                # elastic only (N/m)
    spring_rest: float = 0.5              # elastic only (m); equals l2
    render: RenderGeometry = None
    init: InitDistribution = field(default_factory=InitDistribution)

    def __post_init__(self):
        if self.name not in SYSTEM_NAMES:
            raise ValueError(f"unknown system {self.name!r}")
        for label, value in (("dt", self.dt), ("gravity", self.gravity),
                             ("m1", self.m1), ("m2", self.m2),
                             ("l1", self.l1), ("l2", self.l2),
                             ("radius", self.radius), ("spring_k", self.spring_k),
                             ("spring_rest", self.spring_rest)):
            if value <= 0:
                raise ValueError(f"{label} must be > 0, got {value}")
        if self.render is None:
            self.render = _default_geometry(self)

    @property
    def true_id(self) -> int:
        return _TRUE_ID[self.name]

    @property
    def state_dim(self) -> int:
        return self.true_id

    @property
    def state_labels(self) -> list:
        return list(_STATE_LABELS[self.name])

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["true_id"] = self.true_id
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "SystemSpec":
        d = dict(d)
        d.pop("true_id", None)
        render = d.pop("render", None)
        init = d.pop("init", None)
        spec = cls(**d,
                   render=RenderGeometry(**render) if render else None,
                   init=InitDistribution(**{k: tuple(v) if isinstance(v, list) else v
                                            for k, v in init.items()}) if init else InitDistribution())
        return spec


def _default_geometry(spec: SystemSpec) -> RenderGeometry:
    if spec.name == "circular_motion":
        reach = spec.radius
        return RenderGeometry(half_extent=1.18 * (reach + 0.16),
                              arm1_halfwidth=0.055, bob_radius=0.16)
    if spec.name == "single_pendulum":
        reach = spec.l1
        return RenderGeometry(half_extent=1.15 * (reach + 0.13),
                              arm1_halfwidth=0.06, bob_radius=0.13)
    if spec.name == "rigid_double_pendulum":
        reach = spec.l1 + spec.l2
        return RenderGeometry(half_extent=1.12 * (reach + 0.10),
                              arm1_halfwidth=0.07, arm2_halfwidth=0.05,
                              bob_radius=0.10)
    # elastic: leave head room for spring stretch up to half the rest length
    reach = spec.l1 + 1.5 * spec.l2
    return RenderGeometry(half_extent=1.08 * (reach + 0.11),
                          arm1_halfwidth=0.075, arm2_halfwidth=0.055,
                          bob_radius=0.11)


@dataclass
class PhysicalVariables:
    """Conventional evaluation variables; fields are None where a system lacks them."""

    theta1_deg: float
    theta1_dot_deg_s: float
    theta2_deg: float = None
    theta2_dot_deg_s: float = None
    z_m: float = None
    z_dot_m_s: float = None
    total_energy_j: float = None

    FIELD_ORDER = ("theta1_deg", "theta2_deg", "z_m",
                   "theta1_dot_deg_s", "theta2_dot_deg_s", "z_dot_m_s",
                   "total_energy_j")

    def present_fields(self) -> list:
        return [f for f in self.FIELD_ORDER if getattr(self, f) is not None]

    def as_dict(self) -> dict:
        return {f: getattr(self, f) for f in self.FIELD_ORDER if getattr(self, f) is not None}


_PRESET_DIR = Path(__file__).parent / "presets"


def preset(name: str) -> SystemSpec:
    """Load a shipped system preset by name."""
    path = _PRESET_DIR / f"{name}.json"
    if not path.exists():
        raise ValueError(f"no preset for system {name!r} (searched {path})")
    return load_spec(path)


def load_spec(path) -> SystemSpec:
    with open(path) as f:
        return SystemSpec.from_json_dict(json.load(f))


def save_spec(path, spec: SystemSpec) -> None:
    with open(path, "w") as f:
        json.dump(spec.to_json_dict(), f, indent=2, sort_keys=True)
        f.write("\n")


def sample_initial_state(spec: SystemSpec, rng: np.random.Generator) -> np.ndarray:
    """Draw an initial state from the spec's documented distribution."""
    init = spec.init
    if spec.name == "circular_motion":
        theta = rng.uniform(*init.angle_range)
        mag = rng.uniform(*init.omega_range)
        sign = 1.0 if rng.random() < 0.5 else -1.0
        return np.array([theta, sign * mag])
    if spec.name == "single_pendulum":
        return np.array([rng.uniform(*init.angle_range),
                         rng.uniform(*init.velocity_range)])
    if spec.name == "rigid_double_pendulum":
        return np.array([rng.uniform(*init.angle_range),
                         rng.uniform(*init.angle_range),
                         rng.uniform(*init.velocity_range),
                         rng.uniform(*init.velocity_range)])
    return np.array([rng.uniform(*init.angle_range),
                     rng.uniform(*init.angle_range),
                     rng.uniform(*init.z_range),
                     rng.uniform(*init.velocity_range),
                     rng.uniform(*init.velocity_range),
                     rng.uniform(*init.z_dot_range)])
