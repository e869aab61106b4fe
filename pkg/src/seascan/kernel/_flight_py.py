"""Pure-Python flight kernel: the 50 Hz per-UAV math.

This module is the reference implementation of the hot per-tick kernels
(PID loops, coordinated-turn kinematics, heading laws). The compiled twin
``_flight_cy.pyx`` mirrors it operation for operation; keep both in sync.
Only scalar floats cross these call boundaries.
"""

from math import atan, atan2, cos, exp, fmod, isnan, pi, sin, sqrt, tan

GRAVITY = 9.81

TWO_PI = 2.0 * pi


def wrap_pi(a):
    """Wrap an angle to (-pi, pi]."""
    a = fmod(a + pi, TWO_PI)
    if a <= 0.0:
        a += TWO_PI
    return a - pi


def pid_step(err, dt, kp, ki, kd, i_term, prev_err, i_clamp, out_lo, out_hi):
    """One positional PID step with integral-term clamp and output saturation.

    i_term accumulates ki*err*dt directly (the clamp bounds the term, not the
    raw integral). prev_err = NaN marks the first call; derivative is 0 then.
    Returns (u, i_term, prev_err) for the next call.
    """
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


def fw_step(x, y, h, psi, phi, theta, v,
            phi_cmd, theta_cmd, v_cmd, dt,
            tau_phi, tau_theta, tau_v,
            phi_max, theta_max, v_min, v_max):
    """Advance fixed-wing kinematics one tick.

    Commands saturate, attitude and speed track them through exact first-order
    lags, then coordinated-turn kinematics integrate with a midpoint heading
    (so a constant turn traces a closed regular polygon instead of spiraling).
    """
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

    psi_dot = (GRAVITY / v) * tan(phi)
    psi_mid = psi + 0.5 * psi_dot * dt
    x += v * cos(psi_mid) * dt
    y += v * sin(psi_mid) * dt
    h += v * sin(theta) * dt
    psi = wrap_pi(psi + psi_dot * dt)
    return x, y, h, psi, phi, theta, v


def heading_law(wx0, wy0, wx1, wy1, px, py, s, k):
    """Desired heading for straight-line following of segment w0->w1.

    Cross-track error e is positive when (px, py) lies left of the segment
    direction; the correction saturates at the approach angle s.
    """
    dx = wx1 - wx0
    dy = wy1 - wy0
    seg_len = sqrt(dx * dx + dy * dy)
    e = (dx * (py - wy0) - dy * (px - wx0)) / seg_len
    return wrap_pi(atan2(dy, dx) - s * (2.0 / pi) * atan(e / k))


def orbit_heading(cx, cy, radius, direction, px, py, gain):
    """Desired heading to track a circular orbit (direction +1 = CCW)."""
    dx = px - cx
    dy = py - cy
    dist = sqrt(dx * dx + dy * dy)
    ang = atan2(dy, dx)
    return wrap_pi(ang + direction * (0.5 * pi + atan(gain * (dist - radius) / radius)))


def uav_tick(x, y, h, psi, phi, theta, v,
             h_ref, psi_ref, v_cmd, phi_ff,
             kp_r, ki_r, kd_r, clamp_r,
             kp_p, ki_p, kd_p, clamp_p,
             i_roll, pe_roll, i_pitch, pe_pitch,
             phi_max, theta_max, v_min, v_max,
             tau_phi, tau_theta, tau_v, dt):
    """Fused attitude control + kinematics tick (the hot path).

    phi_ff is a roll feedforward added to the heading PID output (nonzero
    while tracking arcs); fw_step re-saturates the sum. Equivalent to
    pid_step on heading and altitude errors followed by fw_step; the
    composition test in tests/test_kernel.py holds both twins to that
    contract.
    """
    e_psi = wrap_pi(psi_ref - psi)
    phi_cmd, i_roll, pe_roll = pid_step(
        e_psi, dt, kp_r, ki_r, kd_r, i_roll, pe_roll, clamp_r, -phi_max, phi_max)
    e_h = h_ref - h
    theta_cmd, i_pitch, pe_pitch = pid_step(
        e_h, dt, kp_p, ki_p, kd_p, i_pitch, pe_pitch, clamp_p, -theta_max, theta_max)
    x, y, h, psi, phi, theta, v = fw_step(
        x, y, h, psi, phi, theta, v, phi_cmd + phi_ff, theta_cmd, v_cmd, dt,
        tau_phi, tau_theta, tau_v, phi_max, theta_max, v_min, v_max)
    return x, y, h, psi, phi, theta, v, i_roll, pe_roll, i_pitch, pe_pitch
