"""World state and the fixed-order simulation loop.

One MissionSim owns the clock, vessels, UAV agents, relay network and event
log, and advances everything at 50 Hz: vessels first, then each UAV's
guidance/control/kinematics, then radio + ranging at 1 Hz, camera frames at
2 Hz and radar scans on their own period. All randomness flows from named
per-subsystem streams of the scenario seed; one run is strictly
single-threaded and deterministic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from seascan import estimation, radio, rangeloc, search, sensing
from seascan import kernel
from seascan.guidance import GuidanceParams, PathFollower, WaypointPath
from seascan.scenario import Scenario, VesselSpec
from seascan.sensing import VESSEL_CLASSES
from seascan.vehicle import velocity_to_prop_speed, prop_speed_to_velocity

TICKS_PER_SECOND = 50
DETECT_DIVISOR = 25         # 2 Hz camera frames at dt = 0.02
ACCEL_NOISE = 0.3           # IMU world-frame accel noise, m/s^2
ACCEL_MEAS_VAR = 4.0        # R for accel channels; covers low-pass lag bias
BARO_PRESSURE_NOISE = 5.0   # Pa
ANCHOR_REF_SIGMA = 1.0      # alignment weight sigmas, m
RELAY_REF_SIGMA = 2.0
RELAY_MOVING_REF_SIGMA = 10.0  # repositioning relays fly a commanded line
LAST_KNOWN_REF_SIGMA = 20.0
RANGE_BUNDLE_HEADER = 16    # bytes; + 12 per measured pair
DETECT_MSG_BYTES = 64


@dataclass
class Vessel:
    id: int
    vessel_class: str
    position: tuple
    velocity: tuple
    is_target: bool = False


def spawn_random_vessels(rng, zone, n, target_class="E", target_speed=0.5):
    """Uniformly position n vessels; index 0 is the target of target_class.

    Non-target classes draw uniformly from the remaining six; the target
    moves at target_speed on a random heading, others sit still.
    """
    if n < 1:
        raise ValueError("need at least one vessel")
    x0, y0, x1, y1 = zone
    u = rng.random((n, 2))
    xs = x0 + u[:, 0] * (x1 - x0)
    ys = y0 + u[:, 1] * (y1 - y0)
    others = [c for c in VESSEL_CLASSES if c != target_class]
    class_idx = rng.integers(0, len(others), size=n)
    heading = rng.random() * 2.0 * math.pi
    vessels = []
    for i in range(n):
        if i == 0:
            vel = (target_speed * math.cos(heading), target_speed * math.sin(heading))
            vessels.append(Vessel(i, target_class, (float(xs[i]), float(ys[i])),
                                  vel, is_target=True))
        else:
            vessels.append(Vessel(i, others[class_idx[i]],
                                  (float(xs[i]), float(ys[i])), (0.0, 0.0)))
    return vessels


def step_vessels(vessels, zone, dt):
    """Linear motion with velocity reflection at the zone boundary."""
    x0, y0, x1, y1 = zone
    for v in vessels:
        px, py = v.position
        vx, vy = v.velocity
        px += vx * dt
        py += vy * dt
        if px < x0:
            px, vx = 2 * x0 - px, -vx
        elif px > x1:
            px, vx = 2 * x1 - px, -vx
        if py < y0:
            py, vy = 2 * y0 - py, -vy
        elif py > y1:
            py, vy = 2 * y1 - py, -vy
        v.position = (px, py)
        v.velocity = (vx, vy)


class EventLog:
    """Append-only (t, kind, payload) records; the single source of metrics."""

    def __init__(self):
        self.records = []

    def append(self, t, kind, **payload):
        rec = {"t": round(t, 6), "kind": kind}
        rec.update(payload)
        self.records.append(rec)

    def of_kind(self, kind):
        return [r for r in self.records if r["kind"] == kind]

    def first_of_kind(self, kind):
        for r in self.records:
            if r["kind"] == kind:
                return r
        return None

    def to_ndjson(self):
        return "".join(json.dumps(r) + "\n" for r in self.records)

    def write(self, path):
        with open(path, "w") as f:
            f.write(self.to_ndjson())


class UavAgent:
    """One fixed-wing UAV: true state, PID state, follower, and estimator."""

    def __init__(self, uav_id, start, heading, scn: Scenario):
        self.id = uav_id
        self.x, self.y = start
        self.h = scn.cruise_height
        self.psi = heading
        self.phi = 0.0
        self.theta = 0.0
        self.v = scn.cruise_speed
        self.i_roll = self.i_pitch = 0.0
        self.pe_roll = self.pe_pitch = float("nan")
        self.v_cmd = min(max(
            prop_speed_to_velocity(
                velocity_to_prop_speed(scn.cruise_speed, scn.vehicle.prop_curve),
                scn.vehicle.prop_curve, scn.vehicle.v_min, scn.vehicle.v_max),
            scn.vehicle.v_min), scn.vehicle.v_max)

        self.follower = None
        self.half = 0             # 0 = pre-plan hold, 1, 2
        self.done_all = False

        self.lkf = estimation.LkfState.initial(
            self.x, self.y, pos_var=1.0,
            q_pos=scn.lkf_q[0], q_vel=scn.lkf_q[1], q_acc=scn.lkf_q[2])
        self.fix_age = 0.0        # seconds since last predict epoch
        self.last_fix = None      # (x, y) of previous delivered fix
        self.prev_vx = self.v * math.cos(self.psi)
        self.prev_vy = self.v * math.sin(self.psi)
        self.acc_lp_x = estimation.LowPass(0.7)
        self.acc_lp_y = estimation.LowPass(0.7)
        self.baro = estimation.AltitudeEstimator(
            estimation.BaroCalibration(), estimation.LowPass(0.05))
        self.baro_noise = np.zeros(TICKS_PER_SECOND)
        self.h_est = scn.cruise_height
        self.detect_streak = 0

    @property
    def position(self):
        return (self.x, self.y)

    def estimated_position(self):
        return self.lkf.extrapolate_position(self.fix_age)

    def set_route(self, waypoints, radius, half, params: GuidanceParams,
                  speed_hint):
        pts = [self.estimated_position()] + [tuple(w) for w in waypoints]
        cleaned = [pts[0]]
        for p in pts[1:]:
            if math.dist(cleaned[-1], p) > 1e-9:
                cleaned.append(p)
        path = WaypointPath(cleaned, radius, use_fillets=False)
        self.follower = PathFollower(path, params, speed_hint=speed_hint)
        self.half = half


class MissionSim:
    """Deterministic single-mission simulator for one scenario."""

    def __init__(self, scn: Scenario):
        self.scn = scn
        self.dt = scn.dt
        self.tick = 0
        self.log = EventLog()
        self.found = False
        self.coverage_done = False
        self.pattern_started = False
        self.plan = None

        self.rng_spawn = scn.rng("spawn")
        self.rng_radio = scn.rng("radio")
        self.rng_ranging = scn.rng("ranging")
        self.rng_radar = scn.rng("radar")
        self.rng_detect = scn.rng("detect")
        self.rng_imu = scn.rng("imu")

        if scn.vessel_specs is not None:
            self.vessels = [Vessel(i, s.vessel_class, tuple(s.position),
                                   tuple(s.velocity), s.is_target)
                            for i, s in enumerate(scn.vessel_specs)]
        else:
            self.vessels = spawn_random_vessels(
                self.rng_spawn, scn.zone, scn.vessel_count,
                scn.target_class, scn.target_speed)
        self.target_id = next(v.id for v in self.vessels if v.is_target)

        self._setup_relays()
        self._setup_anchors()
        self._setup_uavs()
        self._setup_localization()
        self.budget = radio.SegmentBudget(scn.link.rate_cap_bytes)
        self.latch = radio.RepositionLatch(scn.reposition_threshold)
        self.pmap = sensing.ProbabilityMap.for_zone(scn.zone)
        self.radar_ticks = max(int(round(scn.radar.scan_period / self.dt)), 1)
        self._msg_counter = 0

        if scn.strategy != "informed":
            self.plan = search.pattern_plan(scn.strategy, scn.zone,
                                            scn.uav_count, scn.track_spacing)
            for uav in self.uavs:
                wps = [w.point for w in self.plan.half1[uav.id]]
                # enter the sweep from whichever end is closer to the runway
                if len(wps) > 1 and (math.dist(uav.position, wps[-1])
                                     < math.dist(uav.position, wps[0])):
                    wps = wps[::-1]
                if wps:
                    uav.psi = math.atan2(wps[0][1] - uav.y, wps[0][0] - uav.x)
                uav.set_route(wps, scn.guidance.radius, 1, scn.guidance,
                              scn.cruise_speed)
        else:
            for uav in self.uavs:
                hold = self._hold_point(uav.id)
                uav.set_route([hold], scn.guidance.radius, 0, scn.guidance,
                              scn.cruise_speed)

    # -- construction -----------------------------------------------------

    def _setup_relays(self):
        scn = self.scn
        x0, y0, x1, y1 = scn.zone
        mid = scn.zone_mid_x
        cfg1 = radio.relay_layout((x0, y0, mid, y1), scn.relay_spacing, scn.base)
        cfg2 = radio.relay_layout((mid, y0, x1, y1), scn.relay_spacing, scn.base)
        if scn.relay_count_override:
            cfg1 = cfg1[:scn.relay_count_override]
            cfg2 = cfg2[:scn.relay_count_override]
        n = max(len(cfg1), len(cfg2))
        cfg1 = _pad_layout(cfg1, n, scn.base)
        cfg2 = _pad_layout(cfg2, n, scn.base)
        self.relay_cfg1 = sorted(cfg1, key=lambda p: (p[1], p[0]))
        self.relay_cfg2 = sorted(cfg2, key=lambda p: (p[1], p[0]))
        self.relay_pos = [tuple(p) for p in self.relay_cfg1]
        self.relay_target = list(self.relay_pos)
        self.relay_at_station = [True] * n
        # relays cross over in two waves so half the grid keeps covering
        # while the other half flies
        self.relay_wave = [i % 2 for i in range(n)]
        self.wave2_pending = False

    def _setup_anchors(self):
        bx, by = self.scn.base
        half = 0.5 * self.scn.runway_size
        self.anchor_pos = [(bx - half, by - half), (bx - half, by + half),
                           (bx + half, by - half), (bx + half, by + half)]

    def _setup_uavs(self):
        scn = self.scn
        bx, by = scn.base
        self.uavs = []
        for u in range(scn.uav_count):
            start = (bx, by + (u - (scn.uav_count - 1) / 2) * 30.0)
            self.uavs.append(UavAgent(u, start, 0.0, scn))

    def _setup_localization(self):
        # agent order: anchors, relays, UAVs
        self.n_anchors = len(self.anchor_pos)
        self.n_relays = len(self.relay_pos)
        self.n_agents = self.n_anchors + self.n_relays + len(self.uavs)
        self.uav_agent_offset = self.n_anchors + self.n_relays
        self.last_global = np.array(
            self.anchor_pos + self.relay_pos + [u.position for u in self.uavs])

    def _hold_point(self, uav_id):
        scn = self.scn
        x0, y0, x1, y1 = scn.zone
        n = len(self.uavs)
        span = (y1 - y0) / (n + 1)
        return (x0 + 2 * scn.guidance.radius, y0 + span * (uav_id + 1))

    # -- public API -------------------------------------------------------

    @property
    def t(self):
        return self.tick * self.dt

    def true_positions(self):
        return (self.anchor_pos + [tuple(p) for p in self.relay_pos]
                + [u.position for u in self.uavs])

    def step(self):
        """Advance the world one control tick in fixed subsystem order."""
        t = self.t
        scn = self.scn
        if scn.strategy == "informed" and self.tick % self.radar_ticks == 0:
            sensing.radar_scan(self.vessels, scn.radar, self.pmap, scn.base,
                               self.rng_radar)
        if (scn.strategy == "informed" and self.plan is None
                and t >= scn.radar_warmup):
            self._build_informed_plan(t)
        if self.tick % TICKS_PER_SECOND == 0:
            self._second_jobs(t)

        step_vessels(self.vessels, scn.zone, self.dt)
        for uav in self.uavs:
            self._fly(uav)
        if self.tick % DETECT_DIVISOR == 0:
            self._detect(t)
        self._move_relays()
        self._check_completion(t)
        self.tick += 1

    def run(self):
        scn = self.scn
        max_ticks = int(scn.mission_limit / self.dt)
        while self.tick < max_ticks:
            self.step()
            if self.coverage_done:
                break
            if scn.stop_on_detect and self.found:
                break
        return self.log

    # -- per-tick pieces --------------------------------------------------

    def _fly(self, uav: UavAgent):
        scn = self.scn
        out = uav.follower.step(uav.estimated_position())
        if out.advanced and not self.pattern_started and uav.half >= 1:
            # first pattern waypoint reached: the sweep proper begins here,
            # runway-to-zone transit is not part of the coverage time
            self.pattern_started = True
            self.log.append(self.t, "pattern_start", uav=uav.id)
        # barometric altitude at control rate, noise pre-drawn per second
        idx = self.tick % TICKS_PER_SECOND
        pressure = estimation.pressure_at_altitude(uav.h) + uav.baro_noise[idx]
        uav.h_est = uav.baro.step(pressure)
        # the kernel computes e_h against true h; shifting h_ref by the baro
        # estimation error makes the pitch loop regulate the estimated altitude
        h_ref = scn.cruise_height + (uav.h - uav.h_est)
        (uav.x, uav.y, uav.h, uav.psi, uav.phi, uav.theta, uav.v,
         uav.i_roll, uav.pe_roll, uav.i_pitch, uav.pe_pitch) = kernel.uav_tick(
            uav.x, uav.y, uav.h, uav.psi, uav.phi, uav.theta, uav.v,
            h_ref, out.psi_d, uav.v_cmd,
            out.phi_ff,
            scn.vehicle.roll_gains.kp, scn.vehicle.roll_gains.ki,
            scn.vehicle.roll_gains.kd, scn.vehicle.roll_gains.i_clamp,
            scn.vehicle.pitch_gains.kp, scn.vehicle.pitch_gains.ki,
            scn.vehicle.pitch_gains.kd, scn.vehicle.pitch_gains.i_clamp,
            uav.i_roll, uav.pe_roll, uav.i_pitch, uav.pe_pitch,
            scn.vehicle.phi_max, scn.vehicle.theta_max,
            scn.vehicle.v_min, scn.vehicle.v_max,
            scn.vehicle.tau_phi, scn.vehicle.tau_theta, scn.vehicle.tau_v,
            self.dt)
        uav.fix_age += self.dt

    def _detect(self, t):
        scn = self.scn
        for uav in self.uavs:
            events = sensing.detect_frame(
                t, uav.id, uav.x, uav.y, uav.h, uav.psi, self.vessels,
                scn.camera, scn.confusion, self.rng_detect)
            saw_target = False
            for ev in events:
                self.log.append(t, "detect", uav=uav.id, vessel=ev.vessel_id,
                                true_class=ev.true_class,
                                observed=ev.observed_class or "miss",
                                x=round(ev.observed_pos[0], 3),
                                y=round(ev.observed_pos[1], 3))
                if ev.observed_class == scn.target_class:
                    saw_target = True
                    target_event = ev
            uav.detect_streak = uav.detect_streak + 1 if saw_target else 0
            if saw_target and uav.detect_streak >= scn.detect_debounce and not self.found:
                self._report_detection(t, uav, target_event)

    def _report_detection(self, t, uav, ev):
        self._msg_counter += 1
        msg = radio.RadioMessage(self._msg_counter, src=self._uav_node(uav.id),
                                 dst=0, size_bytes=DETECT_MSG_BYTES, kind="detect")
        report = radio.flood_route(msg, self._topology(uav.id), self.scn.link,
                                   self.rng_radio, self.budget)
        self.log.append(t, "report", uav=uav.id, vessel=ev.vessel_id,
                        delivered=report.delivered, hops=report.hops)
        if report.delivered:
            self.found = True
            self.log.append(t, "found", uav=uav.id, vessel=ev.vessel_id)

    def _uav_node(self, uav_id):
        return 1 + self.n_relays + uav_id

    def _topology(self, uav_id):
        nodes = {0: radio.Node(0, self.scn.base, can_relay=False)}
        for i, p in enumerate(self.relay_pos):
            nodes[1 + i] = radio.Node(1 + i, p, can_relay=True)
        nid = self._uav_node(uav_id)
        uav = self.uavs[uav_id]
        nodes[nid] = radio.Node(nid, uav.position, can_relay=False)
        return nodes

    def _dispatch_relay(self, i):
        self.relay_target[i] = self.relay_cfg2[i]
        if self.relay_pos[i] != self.relay_target[i]:
            self.relay_at_station[i] = False

    def _move_relays(self):
        step = self.scn.relay_speed * self.dt
        for i, (pos, target) in enumerate(zip(self.relay_pos, self.relay_target)):
            if pos == target:
                continue
            d = math.dist(pos, target)
            if d <= step:
                self.relay_pos[i] = target
                self.relay_at_station[i] = True
            else:
                f = step / d
                self.relay_pos[i] = (pos[0] + f * (target[0] - pos[0]),
                                     pos[1] + f * (target[1] - pos[1]))

    def _second_jobs(self, t):
        self.budget.reset()
        self._draw_baro_noise()
        self._comm_sample_and_ranging(t)
        self._progress_and_reposition(t)

    def _draw_baro_noise(self):
        for uav in self.uavs:
            uav.baro_noise = self.rng_imu.standard_normal(TICKS_PER_SECOND) \
                * BARO_PRESSURE_NOISE

    def _comm_sample_and_ranging(self, t):
        scn = self.scn
        positions = np.array(self.true_positions())
        measurements = rangeloc.measure_ranges(
            positions, self.rng_ranging, t, scn.ranging_max, scn.ranging_noise_frac)

        # which UAVs get their bundle (and the solution) through the network
        delivered = {}
        pair_count = {u.id: 0 for u in self.uavs}
        for m in measurements:
            for uav in self.uavs:
                if self.uav_agent_offset + uav.id in (m.i, m.j):
                    pair_count[uav.id] += 1
        for uav in self.uavs:
            relay_count = sum(
                1 for p in self.relay_pos
                if math.dist(p, uav.position) <= scn.link.d_max)
            self._msg_counter += 1
            msg = radio.RadioMessage(
                self._msg_counter, src=self._uav_node(uav.id), dst=0,
                size_bytes=RANGE_BUNDLE_HEADER + 12 * max(pair_count[uav.id], 1),
                kind="ranging")
            report = radio.flood_route(msg, self._topology(uav.id), scn.link,
                                       self.rng_radio, self.budget)
            delivered[uav.id] = report.delivered
            covering = uav.half >= 1 and not uav.follower.done
            self.log.append(t, "comm", uav=uav.id, relay_count=relay_count,
                            delivered=report.delivered, covering=covering)

        # message loss thins the weight matrix: drop pairs both of whose
        # endpoints are undelivered UAVs (infrastructure bundles always arrive)
        undeliv = {self.uav_agent_offset + u.id
                   for u in self.uavs if not delivered[u.id]}
        kept = [m for m in measurements if not (m.i in undeliv and m.j in undeliv)]
        if not kept:
            return
        d, lam = rangeloc.build_distance_matrix(kept, self.n_agents)
        placement = rangeloc.smacof_solve(d, lam, self.last_global, tol=1e-9,
                                          max_iter=200)
        self._align_and_fix(t, placement, d, lam, delivered)

    def _align_and_fix(self, t, placement, d, lam, delivered):
        scn = self.scn
        n_comp, comp = connected_components(lam > 0, directed=False)

        ref_ids, ref_pos, ref_w = [], [], []
        for a in range(self.n_anchors):
            ref_ids.append(a)
            ref_pos.append(self.anchor_pos[a])
            ref_w.append(1.0 / ANCHOR_REF_SIGMA ** 2)
        for i in range(self.n_relays):
            ref_ids.append(self.n_anchors + i)
            ref_pos.append(self.relay_pos[i])
            if self.relay_at_station[i]:
                ref_w.append(1.0 / RELAY_REF_SIGMA ** 2)
            else:
                # in transit: the base knows the commanded track and speed,
                # so the dead-reckoned station-to-station position still
                # anchors the gauge, just more loosely
                ref_w.append(1.0 / RELAY_MOVING_REF_SIGMA ** 2)
        for a in range(self.n_agents):
            ref_ids.append(a)
            ref_pos.append(tuple(self.last_global[a]))
            ref_w.append(1.0 / LAST_KNOWN_REF_SIGMA ** 2)

        aligned, rot, trans, rms = rangeloc.align_global(
            placement.positions, ref_ids, ref_pos, weights=ref_w,
            last_known=self.last_global)

        anchor_comps = {comp[a] for a in range(self.n_anchors)}
        anchor_comps |= {comp[self.n_anchors + i] for i in range(self.n_relays)}

        tiers, sigmas = rangeloc.tier_assign(
            self.n_agents, range(self.n_anchors), lam,
            tier_sigmas=scn.tier_sigmas)

        self.last_global = aligned.copy()
        for a in range(self.n_anchors):
            self.last_global[a] = self.anchor_pos[a]

        for uav in self.uavs:
            a = self.uav_agent_offset + uav.id
            uav.lkf = estimation.lkf_predict(uav.lkf, 1.0)
            uav.fix_age = 0.0
            ax, ay = self._imu_accel(uav)
            localized = (delivered[uav.id] and comp[a] in anchor_comps
                         and tiers[a] != rangeloc.UNLOCALIZED)
            if localized:
                self._apply_fix(t, uav, tuple(aligned[a]), d[a], lam[a],
                                sigmas[a], rms, ax, ay)
            else:
                # no usable fix: IMU dead reckoning (accel-only update keeps
                # the acceleration states honest while x-y drifts)
                chi = uav.lkf.chi
                z = [chi[0], chi[1], ax, chi[3], chi[4], ay]
                r = estimation.measurement_covariance(1e12, 1e12, ACCEL_MEAS_VAR)
                uav.lkf = estimation.lkf_update(uav.lkf, z, r)
                uav.last_fix = None
            uav.prev_vx = uav.v * math.cos(uav.psi)
            uav.prev_vy = uav.v * math.sin(uav.psi)

    def _imu_accel(self, uav):
        """Low-passed world-frame accelerometer channels for this epoch."""
        a_true_x = (uav.v * math.cos(uav.psi) - uav.prev_vx) / 1.0
        a_true_y = (uav.v * math.sin(uav.psi) - uav.prev_vy) / 1.0
        noise = self.rng_imu.standard_normal(2) * ACCEL_NOISE
        ax = uav.acc_lp_x.step(a_true_x + noise[0])
        ay = uav.acc_lp_y.step(a_true_y + noise[1])
        return ax, ay

    def _apply_fix(self, t, uav, fix, ranges_row, lam_row, tier_sig, align_rms,
                   ax, ay):
        scn = self.scn
        measured = ranges_row[lam_row > 0]
        mean_range = float(measured.mean()) if len(measured) else scn.ranging_max
        sigma = tier_sig + align_rms
        pos_var = max(sigma ** 2, estimation.fix_noise_floor(mean_range,
                                                             scn.ranging_noise_frac))
        if uav.last_fix is None:
            vel, vel_var = (0.0, 0.0), 1e6
        else:
            vel, vel_var = estimation.velocity_measurement(fix, uav.last_fix,
                                                           1.0, pos_var)
        z = [fix[0], vel[0], ax, fix[1], vel[1], ay]
        r = estimation.measurement_covariance(pos_var, vel_var, ACCEL_MEAS_VAR)
        uav.lkf = estimation.lkf_update(uav.lkf, z, r)
        uav.last_fix = fix
        err = math.dist(uav.lkf.position, uav.position)
        self.log.append(t, "fix", uav=uav.id, err=round(err, 3),
                        sigma=round(math.sqrt(pos_var), 3))

    def _progress_and_reposition(self, t):
        scn = self.scn
        if self.plan is None:
            return
        if not self.latch.latched:
            fractions = [1.0 if u.half >= 2 else
                         (u.follower.progress if u.half == 1 else 0.0)
                         for u in self.uavs]
            progress = sum(fractions) / len(fractions)
            if self.latch.update(min(progress, 1.0)):
                for i in range(self.n_relays):
                    if self.relay_wave[i] == 0:
                        self._dispatch_relay(i)
                self.wave2_pending = True
                self.log.append(t, "reposition", progress=round(progress, 4))
        if self.wave2_pending:
            wave1_arrived = all(self.relay_at_station[i]
                                for i in range(self.n_relays)
                                if self.relay_wave[i] == 0)
            if wave1_arrived:
                for i in range(self.n_relays):
                    if self.relay_wave[i] == 1:
                        self._dispatch_relay(i)
                self.wave2_pending = False
        for uav in self.uavs:
            if uav.half == 1 and uav.follower.done and self.latch.latched:
                wps = [w.point for w in self.plan.half2[uav.id]]
                if wps:
                    # enter the second-half sweep from whichever end is
                    # closer; a reversed serpentine (or spiral) covers the
                    # same cells
                    pos = uav.estimated_position()
                    if (self.scn.strategy != "informed" and len(wps) > 1
                            and math.dist(pos, wps[-1]) < math.dist(pos, wps[0])):
                        wps = wps[::-1]
                    uav.set_route(wps, scn.guidance.radius, 2, scn.guidance,
                                  scn.cruise_speed)
                else:
                    uav.half = 2
                self.log.append(t, "half2_start", uav=uav.id)

    def _build_informed_plan(self, t):
        scn = self.scn
        clusters = sensing.extract_targets(self.pmap)
        entry = [u.estimated_position() for u in self.uavs]
        plan = search.plan_informed(clusters, scn.uav_count, scn.zone, entry,
                                    scn.track_spacing,
                                    inspect_loops=scn.inspect_loops,
                                    seed=scn.seed)
        if plan is None:
            plan = search.pattern_plan("parallel", scn.zone, scn.uav_count,
                                       scn.track_spacing)
        plan = _clamp_plan(plan, scn.zone, scn.zone_mid_x)
        self.plan = plan
        for uav in self.uavs:
            wps = [w.point for w in plan.half1[uav.id]]
            if wps:
                uav.set_route(wps, scn.guidance.radius, 1, scn.guidance,
                              scn.cruise_speed)
            else:
                uav.half = 1
        self.log.append(t, "plan", strategy="informed", clusters=len(clusters))

    def _check_completion(self, t):
        if self.coverage_done or self.plan is None:
            return
        # a UAV with an empty half-2 route keeps its loitering half-1 follower
        if all(u.half == 2 and u.follower.done for u in self.uavs):
            self.coverage_done = True
            self.log.append(t, "coverage")


def _pad_layout(layout, n, base):
    out = list(layout)
    bx, by = base
    i = 0
    while len(out) < n:
        out.append((bx, by - 100.0 - 50.0 * i))
        i += 1
    return out


def _clamp_plan(plan, zone, mid):
    x0, y0, x1, y1 = zone
    def clamp_half(wps, lo, hi):
        return [search.Waypoint(min(max(w.x, lo), hi), min(max(w.y, y0), y1),
                                w.action) for w in wps]
    half1 = [clamp_half(wps, x0, mid) for wps in plan.half1]
    half2 = [clamp_half(wps, mid, x1) for wps in plan.half2]
    return search.TourPlan(half1, half2)
