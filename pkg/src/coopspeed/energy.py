"""Per-step electric-vehicle energy accounting.

Four signed components per time step: potential energy (consumed
uphill, recuperated downhill), resistive losses (rolling plus
aerodynamic, always consumed), acceleration energy (consumed speeding
up, recuperated slowing down), and on-board device draw.  Regeneration
is perfectly symmetric by construction, and the acceleration term is
proportional to distance over speed change, so speed changes below
``dv_epsilon`` are treated as cruising to keep the term bounded.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class EnergyParams:
    eta: float = 0.9  # drivetrain efficiency, (0, 1]
    mass: float = 1500.0  # kg
    gravity: float = 9.81  # m/s^2
    rolling: float = 0.01  # rolling friction coefficient
    air_density: float = 1.2  # kg/m^3
    frontal_area: float = 2.3  # m^2
    drag: float = 0.28  # air drag coefficient
    motor_power: float = 80_000.0  # W
    devices: tuple[tuple[float, float], ...] = ()  # (watts, seconds in use)
    dv_epsilon: float = 0.05  # m/s; smaller speed changes count as cruising

    def __post_init__(self) -> None:
        if not 0 < self.eta <= 1:
            raise ValueError("eta must lie in (0, 1]")
        for name in ("mass", "gravity", "air_density", "frontal_area", "motor_power"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.rolling < 0 or self.drag < 0 or self.dv_epsilon < 0:
            raise ValueError("coefficients must be non-negative")


def potential(params: EnergyParams, elevation_delta: float) -> float:
    """Signed potential energy for a climb (+) or descent (-), joules."""
    return params.mass * params.gravity * elevation_delta / params.eta


def loss(params: EnergyParams, speed: float, dt: float) -> float:
    """Rolling and aerodynamic losses over one step of ``dt`` seconds."""
    if speed < 0:
        raise ValueError("speed must be non-negative")
    if dt < 0:
        raise ValueError("dt must be non-negative")
    power = (
        params.rolling * params.mass * params.gravity * speed
        + 0.5 * params.air_density * params.frontal_area * params.drag * speed**3
    )
    return power * dt / params.eta


def accel_energy(
    params: EnergyParams, v_prev: float, v_now: float, dist: float
) -> float:
    """Signed accel/regen energy over ``dist`` meters; 0 while cruising."""
    if dist < 0:
        raise ValueError("distance must be non-negative")
    dv = v_now - v_prev
    if abs(dv) < params.dv_epsilon:
        return 0.0
    return params.motor_power * dist / dv / params.eta


def device_energy(params: EnergyParams) -> float:
    """Total on-board device energy: sum of power times time in use."""
    return sum(watts * seconds for watts, seconds in params.devices)


def device_power(params: EnergyParams) -> float:
    return sum(watts for watts, _ in params.devices)


@dataclass(frozen=True)
class StepEnergy:
    """One step's energy components, joules; signs fixed per component."""

    potential_consumed: float = 0.0  # >= 0
    potential_gained: float = 0.0  # <= 0
    loss: float = 0.0  # >= 0
    accel: float = 0.0  # >= 0
    decel: float = 0.0  # <= 0
    devices: float = 0.0  # >= 0

    @property
    def total(self) -> float:
        return (
            self.potential_consumed
            + self.potential_gained
            + self.loss
            + self.accel
            + self.decel
            + self.devices
        )


def step_energy(
    params: EnergyParams,
    v_prev: float,
    v_now: float,
    dt: float,
    elevation_delta: float = 0.0,
) -> StepEnergy:
    """All components for one step; distance is the ground covered, v*dt."""
    pot = potential(params, elevation_delta)
    acc = accel_energy(params, v_prev, v_now, v_now * dt)
    return StepEnergy(
        potential_consumed=max(pot, 0.0),
        potential_gained=min(pot, 0.0),
        loss=loss(params, v_now, dt),
        accel=max(acc, 0.0),
        decel=min(acc, 0.0),
        devices=device_power(params) * dt,
    )


@dataclass
class EnergyLedger:
    """Running totals of every component for one vehicle."""

    potential_consumed: float = 0.0
    potential_gained: float = 0.0
    loss: float = 0.0
    accel: float = 0.0
    decel: float = 0.0
    devices: float = 0.0
    total: float = 0.0

    def add(self, step: StepEnergy) -> None:
        self.potential_consumed += step.potential_consumed
        self.potential_gained += step.potential_gained
        self.loss += step.loss
        self.accel += step.accel
        self.decel += step.decel
        self.devices += step.devices
        self.total += step.total
