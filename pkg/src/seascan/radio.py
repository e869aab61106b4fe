"""Stochastic single-hop link model and flooding relay network.

Received power is lognormal-shadowed around a log-distance mean and hard-cut
at d_max; BER follows from the SNR over a fixed noise floor, and messages
drop per-byte. Relaying is TTL-bounded flooding with per-id duplicate
suppression over hovering quadrotor relays, reconfigured per search half.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

PAPER_PLUS = "paper_plus"        # printed mean: Tx - l0 + 10 fe log10(d)
PHYSICAL_MINUS = "physical_minus"  # log-distance decay, reproduces the short range


@dataclass
class LinkParams:
    tx: float = 25.0          # dBm
    l0: float = 40.0          # dBm, reference loss constant
    fe: float = 2.5           # fading exponent
    sigma: float = 10.0       # shadowing std, dB
    nf: float = -90.0         # noise floor, dBm
    d_max: float = 500.0      # hard communication range, m
    path_loss_sign: str = PHYSICAL_MINUS
    rate_cap_bytes: float = 1e9 / 8  # per-segment bytes per second
    ttl: int = 8

    def __post_init__(self):
        if self.d_max <= 0 or self.sigma <= 0:
            raise ValueError("d_max and sigma must be positive")
        if self.path_loss_sign not in (PAPER_PLUS, PHYSICAL_MINUS):
            raise ValueError(f"unknown path_loss_sign {self.path_loss_sign!r}")


class Outcome(Enum):
    DELIVERED = "delivered"
    DROPPED = "dropped"
    OUT_OF_RANGE = "out_of_range"
    RATE_LIMITED = "rate_limited"


@dataclass
class RadioMessage:
    msg_id: int
    src: int
    dst: int
    size_bytes: int
    kind: str = "data"
    hop_count: int = 0

    def __post_init__(self):
        if self.size_bytes < 1:
            raise ValueError("message size must be >= 1 byte")


def mean_rx_power(d, params: LinkParams):
    """Mean received power in dBm; -inf beyond d_max. d < 1 m clamps to 1 m."""
    if d < 0:
        raise ValueError("distance must be >= 0")
    if d > params.d_max:
        return -math.inf
    d = max(d, 1.0)
    loss = 10.0 * params.fe * math.log10(d)
    if params.path_loss_sign == PHYSICAL_MINUS:
        return params.tx - params.l0 - loss
    return params.tx - params.l0 + loss


def rx_power(d, params: LinkParams, rng):
    """Draw the shadowed received power; no draw is consumed out of range."""
    mu = mean_rx_power(d, params)
    if mu == -math.inf:
        return -math.inf
    return mu + params.sigma * rng.standard_normal()


def bit_error_ratio(rx, nf=-90.0):
    """BER = erfc(sqrt(10^((Rx - Nf)/10))); Rx = -inf means coin-flip bits."""
    if rx == -math.inf:
        return 0.5
    snr_db = (rx - nf) / 10.0
    if snr_db > 300.0:
        return 0.0
    return math.erfc(math.sqrt(10.0 ** snr_db))


def drop_probability(ber, n_bytes):
    """P_drop = 1 - (1 - BER)^N_B for an N_B-byte message."""
    if not 0.0 <= ber <= 1.0:
        raise ValueError("BER must lie in [0, 1]")
    if n_bytes < 1:
        raise ValueError("message size must be >= 1")
    if ber == 1.0:
        return 1.0
    if n_bytes == 1:
        return ber
    return 1.0 - math.exp(n_bytes * math.log1p(-ber))


@dataclass
class SegmentBudget:
    """Per-second byte budget of one shared network segment."""
    capacity: float
    used: float = 0.0

    def reset(self):
        self.used = 0.0

    def try_debit(self, n_bytes):
        if self.used + n_bytes > self.capacity:
            return False
        self.used += n_bytes
        return True


def transmit(msg: RadioMessage, d, params: LinkParams, rng,
             budget: SegmentBudget = None) -> Outcome:
    """One single-hop attempt over distance d.

    The byte budget is debited on every attempted transmission; exhaustion
    rate-limits regardless of distance.
    """
    if budget is not None and not budget.try_debit(msg.size_bytes):
        return Outcome.RATE_LIMITED
    rx = rx_power(d, params, rng)
    if rx == -math.inf:
        return Outcome.OUT_OF_RANGE
    p_drop = drop_probability(bit_error_ratio(rx, params.nf), msg.size_bytes)
    if rng.random() < p_drop:
        return Outcome.DROPPED
    return Outcome.DELIVERED


@dataclass
class Node:
    node_id: int
    position: tuple
    can_relay: bool = False


@dataclass
class DeliveryReport:
    delivered: bool
    hops: int
    relays_used: list


def flood_route(msg: RadioMessage, nodes: dict, params: LinkParams, rng,
                budget: SegmentBudget = None) -> DeliveryReport:
    """Flood msg from src through relaying nodes until dst or TTL.

    Each relay rebroadcasts a given message id at most once; duplicate
    receptions are suppressed, so the application layer sees one copy.
    Node iteration is id-ordered for deterministic rng consumption.
    """
    if params.ttl < 1:
        raise ValueError("TTL must be >= 1")
    if msg.src not in nodes or msg.dst not in nodes:
        raise KeyError("src/dst not in topology")
    received = {msg.src}
    frontier = [msg.src]
    relays_used = []
    for hop in range(1, params.ttl + 1):
        new_frontier = []
        for sender in sorted(frontier):
            sx, sy = nodes[sender].position
            for nid in sorted(nodes):
                if nid in received or nid in new_frontier:
                    continue
                px, py = nodes[nid].position
                d = math.hypot(px - sx, py - sy)
                out = transmit(msg, d, params, rng, budget)
                if out is Outcome.DELIVERED:
                    new_frontier.append(nid)
        for nid in new_frontier:
            received.add(nid)
        if msg.dst in received:
            return DeliveryReport(True, hop, relays_used)
        frontier = [n for n in new_frontier if nodes[n].can_relay]
        relays_used.extend(frontier)
        if not frontier:
            break
    return DeliveryReport(False, params.ttl, relays_used)


def relay_layout(half_rect, spacing=300.0, base=None):
    """Relay stations covering one search half, plus a corridor to the base.

    Grid points are inset by spacing/2 from the half's edges; corridor points
    fill the base -> grid gap at <= spacing intervals when the base is farther
    than one hop of the grid.
    """
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    x0, y0, x1, y1 = half_rect
    xs = _grid_axis(x0, x1, spacing)
    ys = _grid_axis(y0, y1, spacing)
    grid = [(x, y) for x in xs for y in ys]
    positions = list(grid)
    if base is not None:
        bx, by = base
        nearest = min(grid, key=lambda p: (p[0] - bx) ** 2 + (p[1] - by) ** 2)
        dist = math.hypot(nearest[0] - bx, nearest[1] - by)
        n_extra = math.ceil(dist / spacing) - 1
        for i in range(1, n_extra + 1):
            f = i / (n_extra + 1)
            positions.append((bx + f * (nearest[0] - bx), by + f * (nearest[1] - by)))
    return positions


def _grid_axis(lo, hi, spacing):
    extent = hi - lo
    n = max(int(extent // spacing), 1)
    margin = 0.5 * (extent - (n - 1) * spacing)
    return [lo + margin + i * spacing for i in range(n)]


@dataclass
class RepositionLatch:
    """Latches once first-half progress reaches the threshold; explicit reset."""
    threshold: float = 0.9
    latched: bool = False

    def update(self, progress):
        if not 0.0 <= progress <= 1.0 + 1e-9:
            raise ValueError("progress must be in [0, 1]")
        if progress >= self.threshold:
            self.latched = True
        return self.latched

    def reset(self):
        self.latched = False


def comm_metrics(comm_records):
    """Aggregate 1 Hz comm samples into Table-style percentages.

    Records carry (uav, relay_count). in_range counts samples with >= 1 relay
    inside d_max, gt5 samples with more than 5; fractions are averaged over
    UAVs. Samples flagged covering=False (UAV loitering after finishing its
    pattern, or still in transit to it) are excluded when the flag is present.
    """
    records = [r for r in comm_records if r.get("covering", True)]
    per_uav = {}
    for rec in records:
        uav = rec["uav"]
        n_total, n_in, n_gt5 = per_uav.get(uav, (0, 0, 0))
        count = rec["relay_count"]
        per_uav[uav] = (n_total + 1, n_in + (count >= 1), n_gt5 + (count > 5))
    if not per_uav:
        raise ValueError("no comm samples in event log")
    in_range = [n_in / n for n, n_in, _ in per_uav.values()]
    gt5 = [n_gt5 / n for n, _, n_gt5 in per_uav.values()]
    return {"in_range_pct": 100.0 * sum(in_range) / len(in_range),
            "gt5_relay_pct": 100.0 * sum(gt5) / len(gt5)}
