"""Search-plan generation.

Non-informed sweeps (parallel lines, creeping lines, square spiral) divide
each half of the zone into equal per-UAV pieces; the informed planner turns
radar clusters into MinMax mTSP tours with square-spiral inspections at each
cluster. All generators are pure and deterministic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

TRANSIT = "transit"
SPIRAL = "spiral"


@dataclass
class Waypoint:
    x: float
    y: float
    action: str = TRANSIT

    @property
    def point(self):
        return (self.x, self.y)


@dataclass
class TourPlan:
    """Per-UAV ordered waypoints split into first- and second-half legs."""
    half1: list  # list per UAV of [Waypoint]
    half2: list

    @property
    def n_uavs(self):
        return len(self.half1)

    def records(self):
        """(uav, seq, x, y, action, half) rows for export/plotting."""
        rows = []
        for uav in range(self.n_uavs):
            seq = 0
            for half_no, half in ((1, self.half1[uav]), (2, self.half2[uav])):
                for wp in half:
                    rows.append((uav, seq, wp.x, wp.y, wp.action, half_no))
                    seq += 1
        return rows


def _long_axis(rect):
    x0, y0, x1, y1 = rect
    return "x" if (x1 - x0) >= (y1 - y0) else "y"


def _lawnmower(rect, n_uavs, spacing, legs_along, leg_inset=0.0,
               extra_to_high=False):
    """Serpentine sweep split across n_uavs.

    Tracks are laid across legs_along at the given spacing, the first inset
    spacing/2 from the rect edge, and allocated to UAVs in contiguous blocks
    of near-equal count. Remainder tracks go to the lowest ids, or to the
    highest when extra_to_high is set (the two halves alternate so per-UAV
    totals balance). leg_inset pulls leg ends in from the rect boundary; the
    camera half-width keeps the edge band covered for insets up to spacing/2.
    """
    if n_uavs < 1:
        raise ValueError("need at least one UAV")
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    x0, y0, x1, y1 = rect
    if legs_along == "y":
        across_lo, across_hi = x0, x1
        along_lo, along_hi = y0 + leg_inset, y1 - leg_inset
    else:
        across_lo, across_hi = y0, y1
        along_lo, along_hi = x0 + leg_inset, x1 - leg_inset

    tracks = []
    a = across_lo + spacing / 2
    while a <= across_hi + 1e-9:
        tracks.append(a)
        a += spacing
    if not tracks:
        tracks = [0.5 * (across_lo + across_hi)]  # spacing wider than the rect

    base, extra = divmod(len(tracks), n_uavs)
    counts = [base + (1 if u < extra else 0) for u in range(n_uavs)]
    if extra_to_high:
        counts.reverse()
    paths = []
    start = 0
    for count in counts:
        block = tracks[start:start + count]
        start += count
        wps = []
        for i, track in enumerate(block):
            ends = (along_lo, along_hi) if i % 2 == 0 else (along_hi, along_lo)
            for along in ends:
                if legs_along == "y":
                    wps.append((track, along))
                else:
                    wps.append((along, track))
        paths.append(wps)
    return paths


def generate_parallel(rect, n_uavs, spacing, track_axis=None, leg_inset=0.0,
                      extra_to_high=False):
    """Parallel-lines sweep: legs parallel to the rect's long axis."""
    legs_along = track_axis or _long_axis(rect)
    return _lawnmower(rect, n_uavs, spacing, legs_along, leg_inset, extra_to_high)


def generate_creeping(rect, n_uavs, spacing, track_axis=None, leg_inset=0.0,
                      extra_to_high=False):
    """Creeping-lines sweep: legs perpendicular to the rect's long axis."""
    if track_axis is None:
        track_axis = "x" if _long_axis(rect) == "y" else "y"
    return _lawnmower(rect, n_uavs, spacing, track_axis, leg_inset, extra_to_high)


def generate_square_spiral(rect, spacing, clockwise=True):
    """Outside-in square spiral over rect, legs inset spacing/2.

    Starts at the inset lower-left corner and peels the perimeter inward:
    legs shrink by spacing per side pair, terminating once the remaining
    core collapses. Non-square rects finish with short legs sweeping the
    leftover core strip so coverage stays complete.
    """
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    x0, y0, x1, y1 = rect
    if (x1 - x0) < spacing or (y1 - y0) < spacing:
        return [(0.5 * (x0 + x1), 0.5 * (y0 + y1))]
    lo_x, lo_y = x0 + spacing / 2, y0 + spacing / 2
    hi_x, hi_y = x1 - spacing / 2, y1 - spacing / 2
    x, y = lo_x, lo_y
    pts = [(x, y)]
    # each entry: signed leg length toward the target, the move, the bound
    # that retires after the leg (peeling one ring side per step)
    if clockwise:
        phases = ("up", "right", "down", "left")
    else:
        phases = ("right", "up", "left", "down")
    shrink_cw = {"up": "lo_x", "right": "hi_y", "down": "hi_x", "left": "lo_y"}
    shrink_ccw = {"right": "lo_y", "up": "hi_x", "left": "hi_y", "down": "lo_x"}
    shrink = shrink_cw if clockwise else shrink_ccw
    n = 0
    while True:
        move = phases[n % 4]
        if move == "up":
            length, tx, ty = hi_y - y, x, hi_y
        elif move == "right":
            length, tx, ty = hi_x - x, hi_x, y
        elif move == "down":
            length, tx, ty = y - lo_y, x, lo_y
        else:
            length, tx, ty = x - lo_x, lo_x, y
        if length <= 1e-9:
            break
        x, y = tx, ty
        pts.append((x, y))
        bound = shrink[move]
        if bound == "lo_x":
            lo_x += spacing
        elif bound == "hi_x":
            hi_x -= spacing
        elif bound == "lo_y":
            lo_y += spacing
        else:
            hi_y -= spacing
        n += 1
    return pts


def square_spiral_around(center, start_radius, spacing, n_loops):
    """Inside-out square spiral for on-site inspection of a cluster.

    East-first convention; leg lengths grow by spacing every two legs and
    every leg is lengthened by start_radius (the cluster's bounding radius),
    enlarging the swept annulus to cover close-positioned vessels. Loop count
    grows with start_radius so the covered box still spans the inflated disk.
    """
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    cx, cy = center
    pts = [(cx, cy)]
    n_pairs = 2 * n_loops + math.ceil(start_radius / spacing)
    dirs = [(1, 0), (0, 1), (-1, 0), (0, -1)]  # east, north, west, south
    x, y = cx, cy
    for leg in range(2 * n_pairs):
        k = leg // 2 + 1
        dx, dy = dirs[leg % 4]
        length = k * spacing + start_radius
        x, y = x + dx * length, y + dy * length
        pts.append((x, y))
    return pts


def open_tour_length(depot, points, order):
    """Length of depot -> points[order[0]] -> ... -> points[order[-1]]."""
    if not order:
        return 0.0
    total = math.dist(depot, points[order[0]])
    for a, b in zip(order, order[1:]):
        total += math.dist(points[a], points[b])
    return total


def minmax_mtsp(points, k, depots, seed=0, restarts=5):
    """Open-tour MinMax multiple-TSP: minimize the longest tour.

    Exact subset-DP branch-and-bound for <= 10 points, otherwise greedy
    insertion plus 2-opt and inter-tour relocate/swap local search with
    seeded restarts. Returns (tours, objective) where tours is a list of k
    point-index lists.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(depots) != k:
        raise ValueError("need one depot per tour")
    n = len(points)
    if n == 0:
        return [[] for _ in range(k)], 0.0
    if n <= 10:
        return _mtsp_exact(points, k, depots)
    return _mtsp_heuristic(points, k, depots, seed, restarts)


def _mtsp_exact(points, k, depots):
    n = len(points)
    dist = np.array([[math.dist(a, b) for b in points] for a in points])
    ddep = np.array([[math.dist(d, p) for p in points] for d in depots])

    # open-path DP per depot: best[S][j] = min cost path over S ending at j
    best = []
    for di in range(k):
        tab = np.full((1 << n, n), np.inf)
        parent = np.full((1 << n, n), -1, dtype=int)
        for j in range(n):
            tab[1 << j, j] = ddep[di, j]
        for mask in range(1, 1 << n):
            for j in range(n):
                if not mask & (1 << j) or tab[mask, j] == np.inf:
                    continue
                base = tab[mask, j]
                for m in range(n):
                    if mask & (1 << m):
                        continue
                    nm = mask | (1 << m)
                    cand = base + dist[j, m]
                    if cand < tab[nm, m]:
                        tab[nm, m] = cand
                        parent[nm, m] = j
        best.append((tab, parent))

    subset_cost = [tab.min(axis=1) for tab, _ in best]
    for di in range(k):
        subset_cost[di][0] = 0.0

    best_obj = math.inf
    best_assign = None
    for assign in itertools.product(range(k), repeat=n):
        masks = [0] * k
        for p, tour in enumerate(assign):
            masks[tour] |= 1 << p
        obj = max(subset_cost[di][masks[di]] for di in range(k))
        if obj < best_obj - 1e-12:
            best_obj = obj
            best_assign = masks
    tours = [_dp_path(best[di], best_assign[di]) for di in range(k)]
    return tours, float(best_obj)


def _dp_path(dp, mask):
    tab, parent = dp
    if mask == 0:
        return []
    j = int(np.argmin(tab[mask]))
    order = []
    while j >= 0:
        order.append(j)
        j2 = parent[mask, j]
        mask ^= 1 << j
        j = j2
    return order[::-1]


def _tour_len(tour, points, depot):
    return open_tour_length(depot, points, tour)


def _objective(tours, points, depots):
    return max(_tour_len(t, points, d) for t, d in zip(tours, depots))


def _mtsp_heuristic(points, k, depots, seed, restarts):
    rng = np.random.default_rng(seed)
    best_tours, best_obj = None, math.inf
    order0 = sorted(range(len(points)),
                    key=lambda p: -min(math.dist(d, points[p]) for d in depots))
    for r in range(restarts):
        order = list(order0)
        if r > 0:
            rng.shuffle(order)
        tours = [[] for _ in range(k)]
        for p in order:
            cand = None
            for ti in range(k):
                for pos in range(len(tours[ti]) + 1):
                    trial = tours[ti][:pos] + [p] + tours[ti][pos:]
                    lens = [_tour_len(trial if i == ti else tours[i], points, depots[i])
                            for i in range(k)]
                    key = (max(lens), sum(lens), ti, pos)
                    if cand is None or key < cand[0]:
                        cand = (key, ti, pos)
            _, ti, pos = cand
            tours[ti].insert(pos, p)
        tours = _local_search(tours, points, depots)
        obj = _objective(tours, points, depots)
        if obj < best_obj - 1e-12:
            best_obj, best_tours = obj, [list(t) for t in tours]
    return best_tours, float(best_obj)


def _local_search(tours, points, depots, max_rounds=50):
    improved = True
    rounds = 0
    while improved and rounds < max_rounds:
        improved = False
        rounds += 1
        # 2-opt within each tour
        for ti, tour in enumerate(tours):
            n = len(tour)
            for i in range(n - 1):
                for j in range(i + 1, n):
                    trial = tour[:i] + tour[i:j + 1][::-1] + tour[j + 1:]
                    if (_tour_len(trial, points, depots[ti])
                            < _tour_len(tour, points, depots[ti]) - 1e-12):
                        tours[ti] = trial
                        tour = trial
                        improved = True
        # relocate between tours
        obj = _objective(tours, points, depots)
        for ti in range(len(tours)):
            for p in list(tours[ti]):
                for tj in range(len(tours)):
                    if tj == ti:
                        continue
                    src = [q for q in tours[ti] if q != p]
                    for pos in range(len(tours[tj]) + 1):
                        dst = tours[tj][:pos] + [p] + tours[tj][pos:]
                        trial = [src if x == ti else dst if x == tj else tours[x]
                                 for x in range(len(tours))]
                        if _objective(trial, points, depots) < obj - 1e-12:
                            tours = trial
                            obj = _objective(tours, points, depots)
                            improved = True
                            break
                    if improved:
                        break
                if improved:
                    break
            if improved:
                break
    return tours


def plan_informed(clusters, n_uavs, zone, entry_points, spacing,
                  inspect_loops=1, seed=0):
    """Build per-UAV tours visiting radar clusters, a square spiral at each.

    Clusters are split by the zone's dividing line; each half is solved as a
    MinMax mTSP (half-1 depots are the UAV entry points, half-2 depots the
    boundary crossing points nearest each UAV's half-1 end). Falls back to a
    parallel sweep when no clusters exist.
    """
    x0, y0, x1, y1 = zone
    mid = 0.5 * (x0 + x1)
    if not clusters:
        return None  # caller falls back to the parallel pattern

    idx1 = [i for i, c in enumerate(clusters) if c.point[0] < mid]
    idx2 = [i for i, c in enumerate(clusters) if c.point[0] >= mid]

    pts1 = [clusters[i].point for i in idx1]
    tours1, _ = minmax_mtsp(pts1, n_uavs, entry_points, seed=seed)

    # crossing point per UAV: project its half-1 end (or entry) onto the line
    cross_depots = []
    for u in range(n_uavs):
        if tours1[u]:
            last = pts1[tours1[u][-1]]
        else:
            last = entry_points[u]
        cross_depots.append((mid, min(max(last[1], y0), y1)))

    pts2 = [clusters[i].point for i in idx2]
    tours2, _ = minmax_mtsp(pts2, n_uavs, cross_depots, seed=seed)

    half1, half2 = [], []
    for u in range(n_uavs):
        half1.append(_expand_tour(tours1[u], [clusters[i] for i in idx1],
                                  spacing, inspect_loops))
        wps2 = [Waypoint(*cross_depots[u], TRANSIT)]
        wps2 += _expand_tour(tours2[u], [clusters[i] for i in idx2],
                             spacing, inspect_loops)
        half2.append(wps2)
    return TourPlan(half1, half2)


def _expand_tour(tour, clusters, spacing, loops):
    wps = []
    for ci in tour:
        c = clusters[ci]
        spiral = square_spiral_around(c.point, c.radius, spacing, loops)
        wps.append(Waypoint(*spiral[0], SPIRAL))
        wps.extend(Waypoint(x, y, SPIRAL) for x, y in spiral[1:])
    return wps


def pattern_plan(strategy, zone, n_uavs, spacing):
    """TourPlan for a non-informed strategy over both halves of the zone."""
    x0, y0, x1, y1 = zone
    mid = 0.5 * (x0 + x1)
    halves = [(x0, y0, mid, y1), (mid, y0, x1, y1)]
    per_half = []
    for hi, half in enumerate(halves):
        if strategy == "parallel":
            paths = generate_parallel(half, n_uavs, spacing,
                                      leg_inset=spacing / 2,
                                      extra_to_high=(hi == 1))
        elif strategy == "creeping":
            paths = generate_creeping(half, n_uavs, spacing,
                                      leg_inset=spacing / 2,
                                      extra_to_high=(hi == 1))
        elif strategy == "spiral":
            paths = _spiral_half(half, n_uavs, spacing)
        else:
            raise ValueError(f"unknown pattern strategy {strategy!r}")
        per_half.append([[Waypoint(x, y) for x, y in path] for path in paths])
    return TourPlan(per_half[0], per_half[1])


def _spiral_half(half, n_uavs, spacing):
    """Interleaved square-spiral rings over the half.

    Concentric rings at spacing intervals are dealt to UAVs longest-first
    onto the least-loaded tour, so path lengths balance while the outer ring
    still hugs the area boundary (the spiral signature: long straight legs
    at the search-area edge). Each UAV flies its rings outside-in with short
    inward transits.
    """
    x0, y0, x1, y1 = half
    rings = []
    d = spacing / 2
    while (x1 - x0) - 2 * d > 1e-9 and (y1 - y0) - 2 * d > 1e-9:
        lx, ly, hx, hy = x0 + d, y0 + d, x1 - d, y1 - d
        loop = [(lx, ly), (lx, hy), (hx, hy), (hx, ly), (lx, ly)]
        rings.append((2 * ((hx - lx) + (hy - ly)), loop))
        d += spacing
    # leftover core thinner than a ring: one centerline leg
    if (x1 - x0) - 2 * d <= 1e-9 and (y1 - y0) - 2 * d > spacing:
        cx = 0.5 * (x0 + x1)
        rings.append(((y1 - y0) - 2 * d, [(cx, y0 + d), (cx, y1 - d)]))
    elif (y1 - y0) - 2 * d <= 1e-9 and (x1 - x0) - 2 * d > spacing:
        cy = 0.5 * (y0 + y1)
        rings.append(((x1 - x0) - 2 * d, [(x0 + d, cy), (x1 - d, cy)]))

    loads = [0.0] * n_uavs
    assigned = [[] for _ in range(n_uavs)]
    for i, (length, loop) in enumerate(rings):
        u = min(range(n_uavs), key=lambda k: (loads[k], k))
        loads[u] += length
        assigned[u].append(i)

    paths = []
    for u in range(n_uavs):
        wps = []
        for i in sorted(assigned[u]):
            loop = rings[i][1]
            if wps and len(loop) >= 4:
                # enter this ring at its corner nearest the current position
                start = min(range(len(loop) - 1),
                            key=lambda j: (math.dist(wps[-1], loop[j]), j))
                loop = loop[start:-1] + loop[:start] + [loop[start]]
            elif wps and math.dist(wps[-1], loop[-1]) < math.dist(wps[-1], loop[0]):
                loop = loop[::-1]
            wps.extend(loop)
        paths.append(wps if wps else [((x0 + x1) / 2, (y0 + y1) / 2)])
    return paths
