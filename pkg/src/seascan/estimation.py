"""Per-UAV state estimation.

A constant-acceleration linear Kalman filter over [x, xd, xdd, y, yd, ydd]
consumes 1 Hz position fixes from the relative-localization solve; velocity
channels are differenced fixes, acceleration channels low-passed IMU data.
Altitude is estimated separately from the barometer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# ISO standard atmosphere constants for the pressure/altitude map
P0_SEA_LEVEL = 101325.0
BARO_SCALE_H = 44330.0
BARO_EXP = 5.255


def lowpass(prev, sample, alpha):
    """First-order exponential filter y' = a*x + (1-a)*y; DC gain exactly 1."""
    if not 0 < alpha <= 1:
        raise ValueError("alpha must be in (0, 1]")
    return alpha * sample + (1.0 - alpha) * prev


@dataclass
class LowPass:
    alpha: float
    value: float = None

    def step(self, sample):
        if self.value is None:
            self.value = sample
        else:
            self.value = lowpass(self.value, sample, self.alpha)
        return self.value


def _transition(dt):
    c = np.array([[1.0, dt, 0.5 * dt * dt],
                  [0.0, 1.0, dt],
                  [0.0, 0.0, 1.0]])
    f = np.zeros((6, 6))
    f[:3, :3] = c
    f[3:, 3:] = c
    return f


@dataclass
class LkfState:
    chi: np.ndarray                      # [x, xd, xdd, y, yd, ydd]
    p_cov: np.ndarray
    q: np.ndarray

    @classmethod
    def initial(cls, x=0.0, y=0.0, pos_var=100.0, vel_var=25.0, acc_var=1.0,
                q_pos=1e-4, q_vel=1e-3, q_acc=1e-2):
        chi = np.array([x, 0.0, 0.0, y, 0.0, 0.0])
        p = np.diag([pos_var, vel_var, acc_var] * 2).astype(float)
        q = np.diag([q_pos, q_vel, q_acc] * 2).astype(float)
        return cls(chi, p, q)

    @property
    def position(self):
        return self.chi[0], self.chi[3]

    @property
    def velocity(self):
        return self.chi[1], self.chi[4]

    def extrapolate_position(self, dt):
        """Mean-only constant-acceleration propagation (covariance untouched)."""
        c = self.chi
        return (c[0] + c[1] * dt + 0.5 * c[2] * dt * dt,
                c[3] + c[4] * dt + 0.5 * c[5] * dt * dt)


def lkf_predict(state: LkfState, dt) -> LkfState:
    """Constant-acceleration prediction: chi' = F chi, P' = F P F^T + Q."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    f = _transition(dt)
    chi = f @ state.chi
    p = f @ state.p_cov @ f.T + state.q
    return LkfState(chi, 0.5 * (p + p.T), state.q)


def lkf_update(state: LkfState, z, r) -> LkfState:
    """Standard correction with identity-block observation (H = I).

    z = [x_fix, vx_diff, ax_imu, y_fix, vy_diff, ay_imu]; r is the 6x6
    (diagonal) measurement covariance for this fix. Joseph form keeps the
    covariance symmetric PSD.
    """
    z = np.asarray(z, dtype=float)
    r = np.asarray(r, dtype=float)
    if r.ndim == 1:
        r = np.diag(r)
    s = state.p_cov + r
    k = np.linalg.solve(s.T, state.p_cov.T).T
    nu = z - state.chi
    chi = state.chi + k @ nu
    ikh = np.eye(6) - k
    p = ikh @ state.p_cov @ ikh.T + k @ r @ k.T
    return LkfState(chi, 0.5 * (p + p.T), state.q)


def innovation(state: LkfState, z):
    """Innovation nu and its covariance S for a pending H = I update."""
    nu = np.asarray(z, dtype=float) - state.chi
    return nu


def nis(state: LkfState, z, r):
    """Normalized innovation squared nu^T S^-1 nu (chi-square, 6 dof)."""
    r = np.asarray(r, dtype=float)
    if r.ndim == 1:
        r = np.diag(r)
    nu = innovation(state, z)
    s = state.p_cov + r
    return float(nu @ np.linalg.solve(s, nu))


def velocity_measurement(fix, prev_fix, dt, pos_var):
    """Differenced-fix velocity pseudo-measurement and its inflated variance."""
    vx = (fix[0] - prev_fix[0]) / dt
    vy = (fix[1] - prev_fix[1]) / dt
    return (vx, vy), 2.0 * pos_var / (dt * dt)


@dataclass
class BaroCalibration:
    p_ref: float = P0_SEA_LEVEL  # pressure captured at h = 0 before takeoff


def pressure_at_altitude(h, calib: BaroCalibration = None):
    """Forward barometric model, used by the sensor synthesizer."""
    p0 = calib.p_ref if calib else P0_SEA_LEVEL
    return p0 * (1.0 - h / BARO_SCALE_H) ** BARO_EXP


def baro_altitude(pressure, calib: BaroCalibration):
    """Altitude from a pressure sample against the takeoff calibration."""
    return BARO_SCALE_H * (1.0 - (pressure / calib.p_ref) ** (1.0 / BARO_EXP))


@dataclass
class AltitudeEstimator:
    """Barometric altitude channel: calibrate at h=0, low-pass the output."""
    calib: BaroCalibration
    filt: LowPass = field(default_factory=lambda: LowPass(0.3))

    def step(self, pressure):
        return self.filt.step(baro_altitude(pressure, self.calib))


def fix_noise_floor(mean_range, frac=0.01):
    """Variance floor for localization fixes: (1% of the mean range)^2."""
    return (frac * mean_range) ** 2


def measurement_covariance(pos_var, vel_var, acc_var):
    return np.diag([pos_var, vel_var, acc_var, pos_var, vel_var, acc_var])
