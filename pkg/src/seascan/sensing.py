"""Vessel sensing: tilted-camera detection with a confusion-matrix classifier
standing in for the trained detector, and the base radar that accumulates a
probability map of vessel locations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

VESSEL_CLASSES = ("A", "B", "C", "D", "E", "F", "G")
MISS = None


@dataclass
class CameraModel:
    tilt_deg: float = 20.0
    ref_height: float = 100.0
    cross_track: float = 100.0   # footprint width at ref_height
    along_track: float = 250.0   # footprint length at ref_height
    rate_hz: float = 2.0
    sigma_px_ground: float = 5.0  # pixel-to-ground position noise, m
    max_center_offset: float = 250.0


@dataclass
class Footprint:
    center: tuple
    half_cross: float
    half_along: float
    heading: float

    @property
    def empty(self):
        return self.half_cross <= 0 or self.half_along <= 0

    def contains(self, point):
        if self.empty:
            return False
        dx = point[0] - self.center[0]
        dy = point[1] - self.center[1]
        c, s = math.cos(self.heading), math.sin(self.heading)
        along = dx * c + dy * s
        cross = -dx * s + dy * c
        return abs(along) <= self.half_along and abs(cross) <= self.half_cross

    def corners(self):
        c, s = math.cos(self.heading), math.sin(self.heading)
        out = []
        for a, b in ((1, 1), (1, -1), (-1, -1), (-1, 1)):
            along, cross = a * self.half_along, b * self.half_cross
            out.append((self.center[0] + along * c - cross * s,
                        self.center[1] + along * s + cross * c))
        return out


def camera_footprint(x, y, h, psi, cam: CameraModel) -> Footprint:
    """Ground rectangle imaged by the camera; scales linearly with height.

    Centered ahead of the UAV at the tilted-axis ground intersection
    h*cot(tilt), capped at max_center_offset.
    """
    if h <= 0:
        return Footprint((x, y), 0.0, 0.0, psi)
    scale = h / cam.ref_height
    offset = min(h / math.tan(math.radians(cam.tilt_deg)), cam.max_center_offset)
    cx = x + offset * math.cos(psi)
    cy = y + offset * math.sin(psi)
    return Footprint((cx, cy), 0.5 * cam.cross_track * scale,
                     0.5 * cam.along_track * scale, psi)


@dataclass
class ConfusionMatrix:
    """Row-stochastic class-confusion model with per-class miss probability.

    rows[c] maps a true class to probabilities over observed classes;
    miss[c] is the undetected probability. Each row of (miss, probs) sums
    to 1.
    """
    rows: dict
    miss: dict

    def __post_init__(self):
        for c in VESSEL_CLASSES:
            total = self.miss[c] + sum(self.rows[c].values())
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"confusion row {c} sums to {total}, not 1")

    @classmethod
    def identity(cls):
        return cls(rows={c: {c: 1.0} for c in VESSEL_CLASSES},
                   miss={c: 0.0 for c in VESSEL_CLASSES})

    @classmethod
    def default(cls):
        """Near-diagonal model: E missed 1% of the time, C leaks to B and D."""
        rows, miss = {}, {}
        for c in VESSEL_CLASSES:
            if c == "E":
                rows[c] = {"E": 0.99}
                miss[c] = 0.01
            elif c == "C":
                rows[c] = {"C": 0.91, "B": 0.02, "D": 0.02}
                miss[c] = 0.05
            else:
                rows[c] = {c: 0.95}
                miss[c] = 0.05
        return cls(rows, miss)


def classify_vessel(true_class, confmat: ConfusionMatrix, rng):
    """One categorical draw from the confusion row; returns a class or MISS."""
    u = rng.random()
    acc = 0.0
    for c in VESSEL_CLASSES:
        acc += confmat.rows[true_class].get(c, 0.0)
        if u < acc:
            return c
    return MISS


@dataclass
class DetectionEvent:
    t: float
    uav_id: int
    vessel_id: int
    true_class: str
    observed_class: str  # or MISS
    observed_pos: tuple


def detect_frame(t, uav_id, x, y, h, psi, vessels, cam: CameraModel,
                 confmat: ConfusionMatrix, rng):
    """One camera frame: classify every vessel inside the footprint.

    vessels: iterable of objects with .id, .vessel_class, .position. Observed
    positions are the truth plus per-axis pixel-to-ground noise. Misses are
    reported as events with observed_class = MISS.
    """
    fp = camera_footprint(x, y, h, psi, cam)
    events = []
    if fp.empty:
        return events
    for vessel in sorted(vessels, key=lambda v: v.id):
        if not fp.contains(vessel.position):
            continue
        observed = classify_vessel(vessel.vessel_class, confmat, rng)
        noise = rng.standard_normal(2) * cam.sigma_px_ground
        pos = (vessel.position[0] + noise[0], vessel.position[1] + noise[1])
        events.append(DetectionEvent(t, uav_id, vessel.id, vessel.vessel_class,
                                     observed, pos))
    return events


@dataclass
class RadarModel:
    range_m: float = 3500.0
    scan_period: float = 2.0
    sigma: float = 30.0        # per-detection position noise, m
    decay: float = 0.99        # map decay per scan, tracks moving targets
    landmass_gain: float = 1.0


@dataclass
class ProbabilityMap:
    origin: tuple
    cell: float
    values: np.ndarray  # [iy, ix], row-major over y

    @classmethod
    def for_zone(cls, zone, cell=10.0):
        x0, y0, x1, y1 = zone
        nx = int(round((x1 - x0) / cell))
        ny = int(round((y1 - y0) / cell))
        return cls((x0, y0), cell, np.zeros((ny, nx)))

    def cell_center(self, iy, ix):
        return (self.origin[0] + (ix + 0.5) * self.cell,
                self.origin[1] + (iy + 0.5) * self.cell)

    def export(self, path):
        """Dense grid dump: header line then row-major values."""
        with open(path, "w") as f:
            ny, nx = self.values.shape
            f.write(f"# origin {self.origin[0]} {self.origin[1]} "
                    f"cell {self.cell} nx {nx} ny {ny}\n")
            for row in self.values:
                f.write(" ".join(repr(v) for v in row) + "\n")


def radar_scan(vessels, radar: RadarModel, pmap: ProbabilityMap, radar_pos,
               rng, landmass=None):
    """One radar sweep: decay the map, splat unit-mass Gaussians per return.

    Each vessel within range contributes a truncated Gaussian (3 sigma) at
    its noisy position. An optional landmass rect accumulates constantly,
    mimicking a coastal clutter blob.
    """
    pmap.values *= radar.decay
    for vessel in sorted(vessels, key=lambda v: v.id):
        if math.dist(vessel.position, radar_pos) > radar.range_m:
            continue
        noise = rng.standard_normal(2) * radar.sigma
        _splat(pmap, (vessel.position[0] + noise[0], vessel.position[1] + noise[1]),
               radar.sigma)
    if landmass is not None:
        x0, y0, x1, y1 = landmass
        ix0, iy0 = _cell_of(pmap, x0, y0)
        ix1, iy1 = _cell_of(pmap, x1, y1)
        pmap.values[max(iy0, 0):iy1 + 1, max(ix0, 0):ix1 + 1] += radar.landmass_gain
    return pmap


def _cell_of(pmap, x, y):
    return (int((x - pmap.origin[0]) // pmap.cell),
            int((y - pmap.origin[1]) // pmap.cell))


def _splat(pmap, center, sigma, trunc=3.0):
    ny, nx = pmap.values.shape
    r = int(math.ceil(trunc * sigma / pmap.cell))
    icx, icy = _cell_of(pmap, center[0], center[1])
    x_lo, x_hi = max(icx - r, 0), min(icx + r, nx - 1)
    y_lo, y_hi = max(icy - r, 0), min(icy + r, ny - 1)
    if x_lo > x_hi or y_lo > y_hi:
        return
    xs = pmap.origin[0] + (np.arange(x_lo, x_hi + 1) + 0.5) * pmap.cell
    ys = pmap.origin[1] + (np.arange(y_lo, y_hi + 1) + 0.5) * pmap.cell
    gx = np.exp(-0.5 * ((xs - center[0]) / sigma) ** 2)
    gy = np.exp(-0.5 * ((ys - center[1]) / sigma) ** 2)
    stamp = np.outer(gy, gx)
    total = stamp.sum()
    if total > 0:
        pmap.values[y_lo:y_hi + 1, x_lo:x_hi + 1] += stamp / total


@dataclass
class Cluster:
    point: tuple
    radius: float
    mass: float


def extract_targets(pmap: ProbabilityMap, threshold_frac=0.3, merge_dist=200.0):
    """Cluster the map into likely vessel locations.

    Cells above threshold_frac * max form 8-connected components; components
    whose centroids fall within merge_dist are merged (one enlarged spiral
    covers close-positioned vessels). Returns value-weighted centroids with
    bounding radii, sorted by position.
    """
    vmax = float(pmap.values.max(initial=0.0))
    if vmax <= 0.0:
        return []
    mask = pmap.values >= threshold_frac * vmax
    labels, n = ndimage.label(mask, structure=np.ones((3, 3)))
    clusters = []
    for lab in range(1, n + 1):
        iy, ix = np.nonzero(labels == lab)
        w = pmap.values[iy, ix]
        cx = float((w * (pmap.origin[0] + (ix + 0.5) * pmap.cell)).sum() / w.sum())
        cy = float((w * (pmap.origin[1] + (iy + 0.5) * pmap.cell)).sum() / w.sum())
        px = pmap.origin[0] + (ix + 0.5) * pmap.cell
        py = pmap.origin[1] + (iy + 0.5) * pmap.cell
        radius = float(np.sqrt((px - cx) ** 2 + (py - cy) ** 2).max())
        clusters.append(Cluster((cx, cy), radius, float(w.sum())))

    clusters = _merge_close(clusters, merge_dist)
    clusters.sort(key=lambda c: (c.point[0], c.point[1]))
    return clusters


def _merge_close(clusters, merge_dist):
    merged = True
    while merged and len(clusters) > 1:
        merged = False
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                a, b = clusters[i], clusters[j]
                sep = math.dist(a.point, b.point)
                if sep < merge_dist:
                    m = a.mass + b.mass
                    point = ((a.point[0] * a.mass + b.point[0] * b.mass) / m,
                             (a.point[1] * a.mass + b.point[1] * b.mass) / m)
                    radius = max(math.dist(point, a.point) + a.radius,
                                 math.dist(point, b.point) + b.radius)
                    clusters = ([c for k, c in enumerate(clusters) if k not in (i, j)]
                                + [Cluster(point, radius, m)])
                    merged = True
                    break
            if merged:
                break
    return clusters
