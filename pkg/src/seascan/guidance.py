"""Waypoint-path following with fillet transitions.

Straight segments use the saturating cross-track heading law; corners are
smoothed by a circular fillet of radius R gated by two half-planes H1/H2.
Corners too tight for the fillet (tangent length exceeding an adjoining
segment, or near-collinear waypoints) degrade to a sharp half-plane switch
at the waypoint; the heading law then recaptures the next leg.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from seascan import kernel
from seascan.vehicle import PHI_MAX_DEFAULT

COLLINEAR_TOL = 1e-6


class DegenerateTurnError(ValueError):
    """Waypoint triple is (near-)collinear: no fillet exists."""


@dataclass
class GuidanceParams:
    approach_angle: float = math.pi / 3   # s: heading correction saturates here
    capture_scale: float = 30.0           # k: cross-track length scale, m
    radius: float = 100.0                 # fillet / loiter radius R, m
    orbit_gain: float = 2.0
    orbit_feedforward: bool = True        # bank feedforward while on fillet arcs
    turn_lead: float = 0.0                # start U-turn reversals this far
                                          # before the leg end (the forward
                                          # camera keeps the leg end swept)

    def validate_radius(self, v, phi_max=PHI_MAX_DEFAULT):
        r_min = v * v / (kernel.GRAVITY * math.tan(phi_max))
        if self.radius < r_min:
            raise ValueError(
                f"fillet radius {self.radius:.1f} m below minimum turn radius "
                f"{r_min:.1f} m at {v} m/s")


@dataclass
class WaypointPath:
    """Ordered 2-D waypoints with a fillet radius.

    strict=True enforces that every fillet's tangent points fall inside both
    adjoining segments; generated sweep patterns routinely violate this at
    tight lawnmower turns, which then fly as sharp transitions.
    """
    waypoints: list
    radius: float
    strict: bool = False
    use_fillets: bool = True  # sweep legs disable fillets: corner cutting
                              # would leave the outer corner wedge unswept

    def __post_init__(self):
        if len(self.waypoints) < 2:
            raise ValueError("path needs at least two waypoints")
        if self.radius <= 0:
            raise ValueError("fillet radius must be positive")
        for a, b in zip(self.waypoints, self.waypoints[1:]):
            if math.dist(a, b) == 0.0:
                raise ValueError("consecutive waypoints must be distinct")
        if self.strict:
            for i in range(1, len(self.waypoints) - 1):
                g = self.corner_geometry(i)
                if g is not None and not g.fits:
                    raise ValueError(f"fillet at waypoint {i} does not fit its segments")

    def corner_geometry(self, i):
        """FilletGeometry at interior waypoint i, or None if degenerate."""
        if not self.use_fillets:
            return None
        try:
            return fillet_geometry(self.waypoints[i - 1], self.waypoints[i],
                                   self.waypoints[i + 1], self.radius)
        except DegenerateTurnError:
            return None


@dataclass
class FilletGeometry:
    center: tuple          # fillet arc center
    direction: float       # +1 CCW (left turn), -1 CW
    entry: tuple           # tangent point on incoming segment (H1 plane point)
    exit: tuple            # tangent point on outgoing segment (H2 plane point)
    q_in: tuple            # unit vector w_prev -> w_i (H1 normal)
    q_out: tuple           # unit vector w_i -> w_next (H2 normal)
    tangent_len: float     # distance from w_i to each tangent point
    interior_angle: float  # rho
    fits: bool             # tangent points inside both adjoining segments


def _unit(a, b):
    dx, dy = b[0] - a[0], b[1] - a[1]
    n = math.sqrt(dx * dx + dy * dy)
    return (dx / n, dy / n), n


def fillet_geometry(w_prev, w_i, w_next, radius) -> FilletGeometry:
    """Geometry of the fillet arc replacing the corner at w_i.

    H1 sits at the entry tangent point with normal along the incoming segment;
    H2 at the exit tangent point with normal along the outgoing one. The arc
    center lies on the interior bisector at R/sin(rho/2) from w_i and the
    tangent points at R/tan(rho/2) along each segment.
    """
    q_in, len_in = _unit(w_prev, w_i)
    q_out, len_out = _unit(w_i, w_next)
    cross = q_in[0] * q_out[1] - q_in[1] * q_out[0]
    dot = q_in[0] * q_out[0] + q_in[1] * q_out[1]
    turn = abs(math.atan2(cross, dot))
    if turn < COLLINEAR_TOL:
        raise DegenerateTurnError("straight-through waypoints")
    rho = math.pi - turn  # interior angle
    if rho < COLLINEAR_TOL:
        raise DegenerateTurnError("hairpin reversal")
    tangent_len = radius / math.tan(0.5 * rho)
    entry = (w_i[0] - q_in[0] * tangent_len, w_i[1] - q_in[1] * tangent_len)
    exit_ = (w_i[0] + q_out[0] * tangent_len, w_i[1] + q_out[1] * tangent_len)
    bis = (q_out[0] - q_in[0], q_out[1] - q_in[1])
    bn = math.sqrt(bis[0] * bis[0] + bis[1] * bis[1])
    offset = radius / math.sin(0.5 * rho)
    center = (w_i[0] + bis[0] / bn * offset, w_i[1] + bis[1] / bn * offset)
    direction = 1.0 if cross > 0 else -1.0
    fits = tangent_len <= min(len_in, len_out) - 1e-9
    return FilletGeometry(center, direction, entry, exit_, q_in, q_out,
                          tangent_len, rho, fits)


def desired_heading_straight(w_prev, w_next, position, s=math.pi / 3, k=30.0):
    """Heading command for straight-line following of w_prev -> w_next.

    Cross-track error is positive left of the segment direction; the
    correction saturates at the approach angle s for large errors.
    """
    if not 0 < s <= math.pi / 2:
        raise ValueError("approach angle s must be in (0, pi/2]")
    if k <= 0:
        raise ValueError("capture scale k must be positive")
    return kernel.heading_law(w_prev[0], w_prev[1], w_next[0], w_next[1],
                              position[0], position[1], s, k)


STRAIGHT = "straight"
ORBIT = "orbit"
LOITER = "loiter"


@dataclass
class FollowerOutput:
    psi_d: float
    phi_ff: float = 0.0     # roll feedforward, nonzero only on arcs
    advanced: bool = False
    done: bool = False


@dataclass
class PathFollower:
    """Tracks progress along a WaypointPath from successive position fixes.

    Phase switches on signed-projection >= 0 half-plane crossings; the
    terminal waypoint holds a loiter orbit of radius R.
    """
    path: WaypointPath
    params: GuidanceParams = field(default_factory=GuidanceParams)
    speed_hint: float = 25.0  # sizes the arc bank feedforward
    target: int = 1           # index of the waypoint being flown toward
    phase: str = STRAIGHT
    _corner: FilletGeometry = None

    def __post_init__(self):
        self._ff = 0.0
        if self.params.orbit_feedforward:
            self._ff = math.atan(self.speed_hint * self.speed_hint
                                 / (kernel.GRAVITY * self.path.radius))

    @property
    def done(self):
        return self.phase == LOITER

    @property
    def progress(self):
        """Fraction of segments completed (loiter counts as 1.0)."""
        if self.phase == LOITER:
            return 1.0
        n_seg = len(self.path.waypoints) - 1
        return (self.target - 1) / n_seg

    def step(self, position) -> FollowerOutput:
        wps = self.path.waypoints
        s, k = self.params.approach_angle, self.params.capture_scale
        if self.phase == LOITER:
            wx, wy = wps[-1]
            psi = kernel.orbit_heading(wx, wy, self.path.radius, 1.0,
                                       position[0], position[1], self.params.orbit_gain)
            return FollowerOutput(psi, self._ff, False, True)

        if self.phase == ORBIT:
            g = self._corner
            if _crossed(position, g.exit, g.q_out):
                self.target += 1
                self.phase = STRAIGHT
                self._corner = None
                return self._straight(position, advanced=True)
            psi = kernel.orbit_heading(g.center[0], g.center[1], self.path.radius,
                                       g.direction, position[0], position[1],
                                       self.params.orbit_gain)
            return FollowerOutput(psi, g.direction * self._ff, False, False)

        return self._straight(position)

    def _straight(self, position, advanced=False):
        wps = self.path.waypoints
        i = self.target
        last = i == len(wps) - 1
        g = None if last else self.path.corner_geometry(i)
        if g is not None and g.fits:
            if _crossed(position, g.entry, g.q_in):
                self.phase = ORBIT
                self._corner = g
                psi = kernel.orbit_heading(g.center[0], g.center[1], self.path.radius,
                                           g.direction, position[0], position[1],
                                           self.params.orbit_gain)
                return FollowerOutput(psi, g.direction * self._ff, advanced, False)
        else:
            # sharp (or terminal) transition at the waypoint itself; course
            # reversals may anticipate the crossing by turn_lead
            q, _ = _unit(wps[i - 1], wps[i])
            plane_point = wps[i]
            if self.params.turn_lead > 0.0 and not last and self._reverses(i, q):
                plane_point = (wps[i][0] - q[0] * self.params.turn_lead,
                               wps[i][1] - q[1] * self.params.turn_lead)
            if _crossed(position, plane_point, q):
                if last:
                    self.phase = LOITER
                    wx, wy = wps[-1]
                    psi = kernel.orbit_heading(wx, wy, self.path.radius, 1.0,
                                               position[0], position[1],
                                               self.params.orbit_gain)
                    return FollowerOutput(psi, self._ff, True, True)
                self.target += 1
                return self._straight(position, advanced=True)
        psi = desired_heading_straight(wps[i - 1], wps[i], position,
                                       self.params.approach_angle,
                                       self.params.capture_scale)
        return FollowerOutput(psi, 0.0, advanced, False)

    def _reverses(self, i, q):
        """True when the path U-turns at waypoint i, directly or through a
        connection leg shorter than the turn diameter."""
        wps = self.path.waypoints
        q_next, len_next = _unit(wps[i], wps[i + 1])
        if _reverses_into(q, q_next):
            return True
        if len_next < 2.0 * self.path.radius and i + 2 < len(wps):
            q_after, _ = _unit(wps[i + 1], wps[i + 2])
            return _reverses_into(q, q_after)
        return False


def _crossed(position, plane_point, normal):
    return ((position[0] - plane_point[0]) * normal[0]
            + (position[1] - plane_point[1]) * normal[1]) >= 0.0


def _reverses_into(q, q_next):
    return q[0] * q_next[0] + q[1] * q_next[1] < -0.5


def planned_path_geometry(path: WaypointPath, n_arc=32):
    """Polyline of the planned geometric path (segments + fillet arcs).

    Used by the G1-continuity and coverage oracles; sharp corners contribute
    their waypoint directly.
    """
    pts = [path.waypoints[0]]
    wps = path.waypoints
    for i in range(1, len(wps) - 1):
        g = path.corner_geometry(i)
        if g is None or not g.fits:
            pts.append(wps[i])
            continue
        pts.append(g.entry)
        a0 = math.atan2(g.entry[1] - g.center[1], g.entry[0] - g.center[0])
        a1 = math.atan2(g.exit[1] - g.center[1], g.exit[0] - g.center[0])
        sweep = kernel.wrap_pi(a1 - a0)
        if g.direction > 0 and sweep < 0:
            sweep += 2 * math.pi
        elif g.direction < 0 and sweep > 0:
            sweep -= 2 * math.pi
        for j in range(1, n_arc + 1):
            a = a0 + sweep * j / n_arc
            pts.append((g.center[0] + path.radius * math.cos(a),
                        g.center[1] + path.radius * math.sin(a)))
    pts.append(wps[-1])
    return pts
