"""Range-only relative localization.

Pairwise RF ranges (1 Hz, ~1% multiplicative error, 1200 m ceiling) feed a
weighted-stress majorization solver (SMACOF / Guttman transform) for the
relative placement, which is then rigidly aligned to the world frame using
anchor stations and the last known global configuration. Anchor tiers track
how many hops of position inheritance separate an agent from the fixed
runway anchors.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

MAX_RANGE = 1200.0
RANGE_NOISE_FRAC = 0.01


@dataclass
class RangeMeasurement:
    i: int
    j: int
    d: float
    t: float = 0.0


def measure_ranges(true_positions, rng, t=0.0, max_range=MAX_RANGE,
                   noise_frac=RANGE_NOISE_FRAC):
    """Synthesize one 1 Hz ranging epoch between all agents.

    Every pair within max_range yields d = truth * (1 + eps) with
    eps ~ N(0, noise_frac^2); farther pairs are omitted. The noise draw count
    is fixed at n(n-1)/2 per epoch so the stream stays aligned regardless of
    geometry.
    """
    pos = np.asarray(true_positions, dtype=float)
    n = len(pos)
    eps = rng.standard_normal(n * (n - 1) // 2) * noise_frac
    out = []
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            truth = math.dist(pos[i], pos[j])
            if 0.0 < truth <= max_range:
                out.append(RangeMeasurement(i, j, truth * (1.0 + eps[k]), t))
            k += 1
    return out


def build_distance_matrix(measurements, n):
    """Symmetric (D, lambda) arrays from a measurement list; lambda in {0, 1}."""
    d = np.zeros((n, n))
    lam = np.zeros((n, n))
    for m in measurements:
        d[m.i, m.j] = d[m.j, m.i] = m.d
        lam[m.i, m.j] = lam[m.j, m.i] = 1.0
    return d, lam


@dataclass
class Placement:
    positions: np.ndarray
    stress: float
    converged: bool
    iterations: int
    stress_history: list = field(default_factory=list)


def stress(positions, d, lam):
    """Weighted stress: sum over measured pairs of (d_ij - |a_i - a_j|)^2."""
    x = np.asarray(positions, dtype=float)
    diff = x[:, None, :] - x[None, :, :]
    dist = np.sqrt((diff ** 2).sum(-1))
    iu = np.triu_indices(len(x), k=1)
    return float((lam[iu] * (d[iu] - dist[iu]) ** 2).sum())


def smacof_solve(d, lam, init, tol=1e-9, max_iter=500) -> Placement:
    """Minimize the weighted stress by majorization (Guttman transform).

    Stress is non-increasing across iterations (the defining SMACOF
    guarantee); stops on relative stress decrease < tol. init is typically
    the previous epoch's solution.
    """
    d = np.asarray(d, dtype=float)
    lam = np.asarray(lam, dtype=float)
    x = np.array(init, dtype=float)
    n = len(x)
    if lam.sum() == 0:
        raise ValueError("need at least one measured pair")
    n_comp, _ = connected_components(lam > 0, directed=False)
    if n_comp > 1:
        warnings.warn("measurement graph is disconnected; solution determined "
                      "only per component", stacklevel=2)
    v = np.diag(lam.sum(axis=1)) - lam
    v_pinv = np.linalg.pinv(v)

    s = stress(x, d, lam)
    history = [s]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        diff = x[:, None, :] - x[None, :, :]
        dist = np.sqrt((diff ** 2).sum(-1))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dist > 1e-12, d / np.where(dist > 1e-12, dist, 1.0), 0.0)
        b = -lam * ratio
        np.fill_diagonal(b, 0.0)
        np.fill_diagonal(b, -b.sum(axis=1))
        x = v_pinv @ (b @ x)
        s_new = stress(x, d, lam)
        history.append(s_new)
        if s > 0 and (s - s_new) / s < tol:
            converged = True
            s = s_new
            break
        s = s_new
    return Placement(x, s, converged, it, history)


def align_global(positions, ref_ids, ref_positions, weights=None,
                 last_known=None, allow_reflection=True):
    """Weighted least-squares rigid transform onto known reference positions.

    Returns (aligned_positions, rotation 2x2, translation, residual_rms).
    With >= 3 references the reflection branch is chosen by residual; with 2,
    by consistency with last_known (minimum total displacement). Fewer than
    2 references is an error.
    """
    x = np.asarray(positions, dtype=float)
    ref_ids = list(ref_ids)
    if len(ref_ids) < 2:
        raise ValueError("need at least 2 reference points for a 2-D alignment")
    src = x[ref_ids]
    dst = np.asarray(ref_positions, dtype=float)
    w = np.ones(len(ref_ids)) if weights is None else np.asarray(weights, dtype=float)
    w = w / w.sum()

    candidates = [_kabsch(src, dst, w, reflect=False)]
    if allow_reflection:
        candidates.append(_kabsch(src, dst, w, reflect=True))
    scored = []
    for rot, t in candidates:
        res = (src @ rot.T + t) - dst
        rms = math.sqrt(float((w * (res ** 2).sum(axis=1)).sum()))
        scored.append((rms, rot, t))

    if len(scored) == 1 or len(ref_ids) >= 3:
        rms, rot, t = min(scored, key=lambda c: c[0])
    else:
        if last_known is None:
            rms, rot, t = scored[0]
        else:
            lk = np.asarray(last_known, dtype=float)
            def displacement(c):
                aligned = x @ c[1].T + c[2]
                return float(((aligned - lk) ** 2).sum())
            rms, rot, t = min(scored, key=displacement)
    return x @ rot.T + t, rot, t, rms


def _kabsch(src, dst, w, reflect):
    src_c = (w[:, None] * src).sum(axis=0)
    dst_c = (w[:, None] * dst).sum(axis=0)
    h = ((src - src_c) * w[:, None]).T @ (dst - dst_c)
    u, _, vt = np.linalg.svd(h)
    sign = -1.0 if reflect else 1.0
    d = sign * np.sign(np.linalg.det(vt.T @ u.T))
    if d == 0.0:
        d = sign
    rot = vt.T @ np.diag([1.0, d]) @ u.T
    t = dst_c - rot @ src_c
    return rot, t


UNLOCALIZED = 0


def tier_assign(n_agents, anchor_ids, lam, min_links=3,
                tier_sigmas=(0.0, 5.0, 15.0)):
    """Propagate anchor tiers through the ranging graph.

    Tier 1 = fixed anchors; an agent with >= min_links range links to agents
    of tier <= n becomes tier n+1. Uncertainty grows per tier (linear
    extension beyond the configured table); agents with no chain to tier 1
    stay UNLOCALIZED with infinite uncertainty (dead reckoning only).
    """
    tiers = np.full(n_agents, UNLOCALIZED, dtype=int)
    tiers[list(anchor_ids)] = 1
    adj = np.asarray(lam) > 0
    level = 1
    while True:
        refs = (tiers >= 1) & (tiers <= level)
        candidates = np.where(tiers == UNLOCALIZED)[0]
        promoted = False
        for a in candidates:
            if adj[a, refs].sum() >= min_links:
                tiers[a] = level + 1
                promoted = True
        if not promoted:
            break
        level += 1
    sigmas = np.full(n_agents, math.inf)
    for a in range(n_agents):
        if tiers[a] >= 1:
            sigmas[a] = tier_sigma(tiers[a], tier_sigmas)
    return tiers, sigmas


def tier_sigma(tier, tier_sigmas=(0.0, 5.0, 15.0)):
    """Per-tier position uncertainty; chains deeper than the table saturate."""
    if tier <= len(tier_sigmas):
        return tier_sigmas[tier - 1]
    return tier_sigmas[-1]
