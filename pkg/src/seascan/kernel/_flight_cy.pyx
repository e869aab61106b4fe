# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled flight kernel. Mirrors _flight_py.py operation for operation.

Any edit here must be applied to the pure-Python twin as well; the parity
test asserts bitwise-equal results between the two backends.
"""

from libc.math cimport M_PI, atan, atan2, cos, exp, fmod, isnan, sin, sqrt, tan

cdef double GRAVITY_C = 9.81
cdef double TWO_PI = 2.0 * M_PI

GRAVITY = GRAVITY_C


cdef inline double _wrap_pi(double a) nogil:
    a = fmod(a + M_PI, TWO_PI)
    if a <= 0.0:
        a += TWO_PI
    return a - M_PI


def wrap_pi(double a):
    """Wrap an angle to (-pi, pi]."""
    return _wrap_pi(a)


cdef inline (double, double, double) _pid_step(
        double err, double dt, double kp, double ki, double kd,
        double i_term, double prev_err, double i_clamp,
        double out_lo, double out_hi) nogil:
    cdef double d, u
    i_term += ki * err * dt
    if i_term > i_clamp:
        i_term = i_clamp
    elif i_term < -i_clamp:
        i_term = -i_clamp
    if isnan(prev_err):
        d = 0.0
    else:
        d = (err - prev_err) / dt
    u = kp * err + i_term + kd * d
    if u > out_hi:
        u = out_hi
    elif u < out_lo:
        u = out_lo
    return u, i_term, err


def pid_step(double err, double dt, double kp, double ki, double kd,
             double i_term, double prev_err, double i_clamp,
             double out_lo, double out_hi):
    """One positional PID step with integral-term clamp and output saturation."""
    return _pid_step(err, dt, kp, ki, kd, i_term, prev_err, i_clamp, out_lo, out_hi)


cdef inline (double, double, double, double, double, double, double) _fw_step(
        double x, double y, double h, double psi, double phi, double theta, double v,
        double phi_cmd, double theta_cmd, double v_cmd, double dt,
        double tau_phi, double tau_theta, double tau_v,
        double phi_max, double theta_max, double v_min, double v_max) nogil:
    cdef double psi_dot, psi_mid
    if phi_cmd > phi_max:
        phi_cmd = phi_max
    elif phi_cmd < -phi_max:
        phi_cmd = -phi_max
    if theta_cmd > theta_max:
        theta_cmd = theta_max
    elif theta_cmd < -theta_max:
        theta_cmd = -theta_max
    if v_cmd > v_max:
        v_cmd = v_max
    elif v_cmd < v_min:
        v_cmd = v_min

    phi += (1.0 - exp(-dt / tau_phi)) * (phi_cmd - phi)
    theta += (1.0 - exp(-dt / tau_theta)) * (theta_cmd - theta)
    v += (1.0 - exp(-dt / tau_v)) * (v_cmd - v)

    psi_dot = (GRAVITY_C / v) * tan(phi)
    psi_mid = psi + 0.5 * psi_dot * dt
    x += v * cos(psi_mid) * dt
    y += v * sin(psi_mid) * dt
    h += v * sin(theta) * dt
    psi = _wrap_pi(psi + psi_dot * dt)
    return x, y, h, psi, phi, theta, v


def fw_step(double x, double y, double h, double psi, double phi, double theta,
            double v, double phi_cmd, double theta_cmd, double v_cmd, double dt,
            double tau_phi, double tau_theta, double tau_v,
            double phi_max, double theta_max, double v_min, double v_max):
    """Advance fixed-wing kinematics one tick (see pure twin for details)."""
    return _fw_step(x, y, h, psi, phi, theta, v, phi_cmd, theta_cmd, v_cmd, dt,
                    tau_phi, tau_theta, tau_v, phi_max, theta_max, v_min, v_max)


def heading_law(double wx0, double wy0, double wx1, double wy1,
                double px, double py, double s, double k):
    """Desired heading for straight-line following of segment w0->w1."""
    cdef double dx = wx1 - wx0
    cdef double dy = wy1 - wy0
    cdef double seg_len = sqrt(dx * dx + dy * dy)
    cdef double e = (dx * (py - wy0) - dy * (px - wx0)) / seg_len
    return _wrap_pi(atan2(dy, dx) - s * (2.0 / M_PI) * atan(e / k))


def orbit_heading(double cx, double cy, double radius, double direction,
                  double px, double py, double gain):
    """Desired heading to track a circular orbit (direction +1 = CCW)."""
    cdef double dx = px - cx
    cdef double dy = py - cy
    cdef double dist = sqrt(dx * dx + dy * dy)
    cdef double ang = atan2(dy, dx)
    return _wrap_pi(ang + direction * (0.5 * M_PI + atan(gain * (dist - radius) / radius)))


def uav_tick(double x, double y, double h, double psi, double phi, double theta,
             double v, double h_ref, double psi_ref, double v_cmd, double phi_ff,
             double kp_r, double ki_r, double kd_r, double clamp_r,
             double kp_p, double ki_p, double kd_p, double clamp_p,
             double i_roll, double pe_roll, double i_pitch, double pe_pitch,
             double phi_max, double theta_max, double v_min, double v_max,
             double tau_phi, double tau_theta, double tau_v, double dt):
    """Fused attitude control + kinematics tick (the hot path)."""
    cdef double e_psi, e_h, phi_cmd, theta_cmd
    e_psi = _wrap_pi(psi_ref - psi)
    phi_cmd, i_roll, pe_roll = _pid_step(
        e_psi, dt, kp_r, ki_r, kd_r, i_roll, pe_roll, clamp_r, -phi_max, phi_max)
    e_h = h_ref - h
    theta_cmd, i_pitch, pe_pitch = _pid_step(
        e_h, dt, kp_p, ki_p, kd_p, i_pitch, pe_pitch, clamp_p, -theta_max, theta_max)
    x, y, h, psi, phi, theta, v = _fw_step(
        x, y, h, psi, phi, theta, v, phi_cmd + phi_ff, theta_cmd, v_cmd, dt,
        tau_phi, tau_theta, tau_v, phi_max, theta_max, v_min, v_max)
    return x, y, h, psi, phi, theta, v, i_roll, pe_roll, i_pitch, pe_pitch
