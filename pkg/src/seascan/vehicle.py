"""Fixed-wing UAV model: uncoupled PID attitude loops over coordinated-turn
kinematics, plus the propeller-speed / airspeed map.

Lateral motion (and yaw) is driven by the roll command from a heading-error
PID; longitudinal motion by the pitch command from an altitude-error PID.
Airspeed equals ground speed (no wind, zero sideslip / attack angle).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from seascan import kernel

DEG = math.pi / 180.0

PHI_MAX_DEFAULT = 35.0 * DEG
THETA_MAX_DEFAULT = 20.0 * DEG
V_MIN_DEFAULT = 15.0
V_MAX_DEFAULT = 30.0


@dataclass
class FixedWingState:
    x: float = 0.0
    y: float = 0.0
    h: float = 0.0
    psi: float = 0.0    # heading, rad, (-pi, pi]
    phi: float = 0.0    # roll, rad
    theta: float = 0.0  # pitch, rad
    v: float = 25.0     # ground speed == airspeed, m/s


@dataclass
class ControlInputs:
    phi_cmd: float
    theta_cmd: float
    prop_speed: float  # rad/s


@dataclass
class PidGains:
    kp: float
    ki: float
    kd: float
    i_clamp: float

    def __post_init__(self):
        for g in (self.kp, self.ki, self.kd):
            if not math.isfinite(g):
                raise ValueError("PID gains must be finite")
        if self.i_clamp <= 0:
            raise ValueError("integrator clamp must be positive")


@dataclass
class PidState:
    i_term: float = 0.0
    prev_err: float = float("nan")

    def reset(self):
        self.i_term = 0.0
        self.prev_err = float("nan")


@dataclass
class VehicleParams:
    phi_max: float = PHI_MAX_DEFAULT
    theta_max: float = THETA_MAX_DEFAULT
    v_min: float = V_MIN_DEFAULT
    v_max: float = V_MAX_DEFAULT
    tau_phi: float = 0.3
    tau_theta: float = 0.5
    tau_v: float = 1.0
    # prop speed -> airspeed polynomial, low order first; identity by default
    # (the real curve is fitted per airframe and supplied via config).
    prop_curve: tuple = (0.0, 1.0)
    roll_gains: PidGains = field(default_factory=lambda: PidGains(1.4, 0.05, 0.45, 0.2))
    pitch_gains: PidGains = field(default_factory=lambda: PidGains(0.018, 0.002, 0.03, 0.12))


@dataclass
class AttitudeRefs:
    h_ref: float
    psi_ref: float
    v_ref: float


def prop_speed_to_velocity(p, curve, v_min=V_MIN_DEFAULT, v_max=V_MAX_DEFAULT):
    """Evaluate the prop-speed -> airspeed polynomial, clamped to [v_min, v_max]."""
    if p < 0:
        raise ValueError("propeller speed must be >= 0")
    v = 0.0
    for c in reversed(curve):
        v = v * p + c
    return min(max(v, v_min), v_max)


def velocity_to_prop_speed(v_ref, curve, p_hi=1000.0):
    """Invert the (monotone) velocity map: find P with curve(P) = v_ref.

    Affine curves invert analytically; higher orders by bisection on [0, p_hi].
    """
    if len(curve) <= 2:
        c0 = curve[0] if curve else 0.0
        c1 = curve[1] if len(curve) > 1 else 0.0
        if c1 == 0.0:
            return 0.0
        return max((v_ref - c0) / c1, 0.0)

    def poly(p):
        v = 0.0
        for c in reversed(curve):
            v = v * p + c
        return v

    lo, hi = 0.0, p_hi
    if poly(lo) >= v_ref:
        return lo
    if poly(hi) <= v_ref:
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if poly(mid) < v_ref:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def pid_step(gains: PidGains, state: PidState, error, dt, out_lo=-math.inf, out_hi=math.inf):
    """One PID step; mutates state, returns the saturated command."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    u, state.i_term, state.prev_err = kernel.pid_step(
        error, dt, gains.kp, gains.ki, gains.kd,
        state.i_term, state.prev_err, gains.i_clamp, out_lo, out_hi)
    return u


def attitude_controller(state: FixedWingState, refs: AttitudeRefs,
                        params: VehicleParams, roll_pid: PidState,
                        pitch_pid: PidState, dt) -> ControlInputs:
    """Map (altitude, heading, speed) references to (roll, pitch, prop) commands.

    Heading error is wrapped to (-pi, pi]; positive error banks right
    (positive roll raises the turn rate).
    """
    e_psi = kernel.wrap_pi(refs.psi_ref - state.psi)
    phi_cmd = pid_step(params.roll_gains, roll_pid, e_psi, dt,
                       -params.phi_max, params.phi_max)
    e_h = refs.h_ref - state.h
    theta_cmd = pid_step(params.pitch_gains, pitch_pid, e_h, dt,
                         -params.theta_max, params.theta_max)
    prop = velocity_to_prop_speed(refs.v_ref, params.prop_curve)
    return ControlInputs(phi_cmd, theta_cmd, prop)


def fixed_wing_step(state: FixedWingState, inputs: ControlInputs,
                    params: VehicleParams, dt) -> FixedWingState:
    """Advance the kinematic model one tick under the given commands."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    v_cmd = prop_speed_to_velocity(inputs.prop_speed, params.prop_curve,
                                   params.v_min, params.v_max)
    x, y, h, psi, phi, theta, v = kernel.fw_step(
        state.x, state.y, state.h, state.psi, state.phi, state.theta, state.v,
        inputs.phi_cmd, inputs.theta_cmd, v_cmd, dt,
        params.tau_phi, params.tau_theta, params.tau_v,
        params.phi_max, params.theta_max, params.v_min, params.v_max)
    return FixedWingState(x, y, h, psi, phi, theta, v)


def turn_radius(v, phi):
    """Instantaneous coordinated-turn radius at speed v and bank phi."""
    return v * v / (kernel.GRAVITY * math.tan(phi))


def min_turn_radius(v, phi_max=PHI_MAX_DEFAULT):
    return turn_radius(v, phi_max)
