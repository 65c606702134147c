"""Multi-model VP estimation: hypothesis sampling, preference matrix,
and Jaccard-distance agglomerative clustering of edges.

Each hypothesis is the intersection of the fitted lines of a random edge
pair. An edge's preference set is the set of hypotheses it is consistent
with (RMS consistency <= phi); clusters merge bottom-up while any two
preference sets still overlap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DegenerateConfiguration, InsufficientEdges, TooFewMembers
from .geometry import Edge, HPoint, intersect, d_rms


@dataclass
class Hypothesis:
    """A candidate VP generated from a minimal set of two edges."""

    vp: HPoint
    source_pair: tuple[int, int]


@dataclass
class PreferenceMatrix:
    """Boolean consensus table: bits[i, j] = edge i consistent with hypothesis j."""

    bits: np.ndarray
    phi: float

    @property
    def n_edges(self) -> int:
        return self.bits.shape[0]

    @property
    def n_hypotheses(self) -> int:
        return self.bits.shape[1]


@dataclass
class EdgeCluster:
    """A group of edges sharing VP hypotheses.

    The preference set of a cluster is the bitwise AND of its members'
    rows. ``merged_order`` records when the cluster last changed, for
    determinism audits.
    """

    members: tuple[int, ...]
    preference_set: np.ndarray
    vp: HPoint | None = None
    merged_order: int = 0


def sample_hypotheses(edges, m: int, seed: int) -> list[Hypothesis]:
    """Draw m VP hypotheses from uniformly random distinct edge pairs.

    Pairs whose fitted lines are (numerically) identical are rejected and
    resampled, with a bounded retry budget.

    Raises:
        InsufficientEdges: fewer than 2 edges.
        DegenerateConfiguration: retries exhausted (e.g. all edges collinear).
    """
    if len(edges) < 2:
        raise InsufficientEdges("need at least 2 edges to sample pairs")
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = np.random.default_rng(seed)
    lines = [e.fitted_line for e in edges]
    hypotheses = []
    budget = 100 * m
    while len(hypotheses) < m:
        if budget <= 0:
            raise DegenerateConfiguration("could not sample non-degenerate edge pairs")
        budget -= 1
        i, j = rng.choice(len(edges), size=2, replace=False)
        cross = np.cross(lines[i].coords, lines[j].coords)
        if np.linalg.norm(cross) < 1e-8:
            continue
        hypotheses.append(Hypothesis(vp=HPoint.from_array(cross), source_pair=(int(i), int(j))))
    return hypotheses


def consistency_matrix(edges, hypotheses) -> np.ndarray:
    """D_RMS of every (edge, hypothesis) pair, finite and ideal VPs alike."""
    moments = np.array([e.moments for e in edges])
    out = np.zeros((len(edges), len(hypotheses)))
    finite = [k for k, h in enumerate(hypotheses) if not h.vp.is_ideal]
    ideal = [k for k, h in enumerate(hypotheses) if h.vp.is_ideal]
    if finite:
        vps = np.array([hypotheses[k].vp.xy for k in finite])
        out[:, finite] = kernels.drms_matrix(moments, vps)
    if ideal:
        dirs = np.array([hypotheses[k].vp.direction for k in ideal])
        out[:, ideal] = kernels.drms_matrix_ideal(moments, dirs)
    return out


def build_preference_matrix(edges, hypotheses, phi: float) -> PreferenceMatrix:
    """Threshold the consistency matrix at phi (inclusive) into bits."""
    if phi <= 0.0:
        raise ValueError("phi must be positive")
    dist = consistency_matrix(edges, hypotheses)
    return PreferenceMatrix(bits=dist <= phi, phi=float(phi))


def jaccard_distance(a, b) -> float:
    """1 - intersection/union of two boolean sets; both-empty gives 1."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    union = int(np.count_nonzero(a | b))
    if union == 0:
        return 1.0
    inter = int(np.count_nonzero(a & b))
    return (union - inter) / union


def cluster(pref: PreferenceMatrix) -> list[EdgeCluster]:
    """Agglomerate edges by Jaccard distance of their preference sets.

    Starts from singletons and repeatedly merges the pair at minimal
    distance strictly below 1; ties break on the lexicographically
    smallest (members_a, members_b) pair. Stops when all remaining
    pairwise distances are 1.
    """
    clusters = [
        EdgeCluster(members=(i,), preference_set=pref.bits[i].copy())
        for i in range(pref.n_edges)
    ]
    if not clusters:
        return []
    # Pairwise Jaccard distances, updated incrementally after each merge.
    # Set sizes are small integers, so equal fractions land on identical
    # floats and the equality-based tie handling below is exact.
    ps = np.array([c.preference_set for c in clusters], dtype=float)
    sizes = ps.sum(axis=1)
    inter = ps @ ps.T
    union = sizes[:, None] + sizes[None, :] - inter
    with np.errstate(invalid="ignore", divide="ignore"):
        dist = np.where(union > 0, (union - inter) / np.where(union > 0, union, 1), 1.0)
    np.fill_diagonal(dist, np.inf)

    order = 0
    while len(clusters) > 1:
        dmin = dist.min()
        if dmin >= 1.0:
            break
        ties = np.argwhere(dist == dmin)
        best = None
        for ai, bi in ties:
            if ai > bi:
                ai, bi = bi, ai
            key = tuple(sorted((clusters[ai].members, clusters[bi].members)))
            if best is None or key < best[0]:
                best = (key, ai, bi)
        _, ai, bi = best
        order += 1
        merged = EdgeCluster(
            members=tuple(sorted(clusters[ai].members + clusters[bi].members)),
            preference_set=clusters[ai].preference_set & clusters[bi].preference_set,
            merged_order=order,
        )
        keep = [k for k in range(len(clusters)) if k not in (ai, bi)]
        clusters = [clusters[k] for k in keep] + [merged]
        dist = dist[np.ix_(keep, keep)]
        new_ps = merged.preference_set.astype(float)
        if keep:
            others = np.array([clusters[k].preference_set for k in range(len(keep))], dtype=float)
            o_sizes = others.sum(axis=1)
            n_size = new_ps.sum()
            n_inter = others @ new_ps
            n_union = o_sizes + n_size - n_inter
            row = np.where(n_union > 0, (n_union - n_inter) / np.where(n_union > 0, n_union, 1), 1.0)
        else:
            row = np.zeros(0)
        dist = np.pad(dist, ((0, 1), (0, 1)), constant_values=np.inf)
        dist[-1, :-1] = row
        dist[:-1, -1] = row
    clusters.sort(key=lambda c: c.members)
    return clusters


def estimate_cluster_vp(clus: EdgeCluster, edges, hypotheses) -> HPoint:
    """Estimate a cluster's VP from its members.

    Initializes at the member-supported hypothesis minimizing the summed
    squared consistency, then refines by coordinate descent with step
    halving; the result never scores worse than the initialization.

    Raises:
        TooFewMembers: cluster has fewer than 2 members.
    """
    if len(clus.members) < 2:
        raise TooFewMembers("VP estimation needs at least 2 member edges")
    member_edges = [edges[i] for i in clus.members]

    def objective(p: HPoint) -> float:
        return sum(d_rms(e, p) ** 2 for e in member_edges)

    supported = np.flatnonzero(clus.preference_set)
    candidates = [hypotheses[k].vp for k in supported]
    if not candidates:
        # Degenerate preference set: fall back to the first member pair.
        candidates = [intersect(member_edges[0].fitted_line, member_edges[1].fitted_line)]
    scores = [objective(p) for p in candidates]
    best = candidates[int(np.argmin(scores))]
    if best.is_ideal:
        return best
    return _refine_vp(best, objective)


def _refine_vp(
    start: HPoint, objective, step: float = 8.0, tol: float = 1e-6, max_moves: int = 2000
) -> HPoint:
    """Gradient-free coordinate descent over the VP location.

    Near-parallel clusters have an objective that keeps improving as the
    VP recedes toward infinity, so accepted moves are budgeted.
    """
    x, y = start.xy
    f = objective(start)
    moves = 0
    while step > tol and moves < max_moves:
        moved = False
        for dx, dy in ((step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)):
            cand = HPoint.from_xy(x + dx, y + dy)
            fc = objective(cand)
            if fc < f:
                x, y, f = x + dx, y + dy, fc
                moved = True
                moves += 1
                break
        if not moved:
            step *= 0.5
    return HPoint.from_xy(x, y)


def dump_preference_matrix(pref: PreferenceMatrix, path, seed: int | None = None) -> None:
    """Write the preference matrix as a compact bit grid for audits."""
    lines = [
        f"# vpscape-prefmatrix v1 n={pref.n_edges} m={pref.n_hypotheses} "
        f"phi={pref.phi!r} seed={seed!r}"
    ]
    for row in pref.bits:
        lines.append("".join("1" if b else "0" for b in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
