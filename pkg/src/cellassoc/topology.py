"""Scenario geometry: user/SBS placement, SBS neighbor graph, similarity."""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class NetworkTopology:
    """Static geometry of one scenario.

    ``candidate_sets[u]`` lists the SBS indices user u can associate with,
    sorted ascending and never empty. ``sbs_adjacency`` is the symmetric
    neighbor graph over SBSs (no self loops; a node always counts itself as
    reachable via the closed neighborhood). ``similarity`` is the symmetric
    user-similarity indicator with a true diagonal.
    """

    user_positions: np.ndarray
    sbs_positions: np.ndarray
    sbs_adjacency: np.ndarray
    candidate_sets: list = field(default_factory=list)
    similarity: np.ndarray = None

    @property
    def num_users(self):
        return len(self.user_positions)

    @property
    def num_sbs(self):
        return len(self.sbs_positions)

    def closed_neighbors(self, s):
        """Sorted indices of SBS s plus its graph neighbors."""
        nbrs = np.flatnonzero(self.sbs_adjacency[s])
        return sorted(set(nbrs.tolist()) | {s})

    def user_sbs_distance(self, u, s):
        return float(np.linalg.norm(self.user_positions[u] - self.sbs_positions[s]))


def _pairwise_within(points, radius, include_self):
    n = len(points)
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    out = dist <= radius
    if include_self:
        np.fill_diagonal(out, True)
    else:
        np.fill_diagonal(out, False)
    return out


def compute_similarity(topology, d_sim):
    """Similarity indicator: users within ``d_sim`` meters of each other."""
    if d_sim < 0:
        raise ValueError("d_sim must be nonnegative")
    return _pairwise_within(np.asarray(topology.user_positions, dtype=float), d_sim, True)


def _is_connected(adj):
    n = adj.shape[0]
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        i = stack.pop()
        for j in np.flatnonzero(adj[i]):
            if not seen[j]:
                seen[j] = True
                stack.append(int(j))
    return bool(seen.all())


def build_sbs_graph(topology, radius):
    """Distance-threshold SBS adjacency; falls back to the complete graph.

    Edge (i, j) iff 0 < dist(i, j) <= radius. A disconnected result would
    strand probability mass in the mean-field dynamics, so it is replaced by
    the complete graph.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    pos = np.asarray(topology.sbs_positions, dtype=float)
    adj = _pairwise_within(pos, radius, False)
    n = len(pos)
    if n > 1 and not _is_connected(adj):
        adj = np.ones((n, n), dtype=bool)
        np.fill_diagonal(adj, False)
    return adj


def place_uniform(num_users, num_sbs, area_side, seed,
                  coverage_radius=None, link_radius=None, d_sim=None):
    """Drop users and SBSs i.i.d. uniform on a square and wire everything up.

    Candidate set of a user = SBSs within ``coverage_radius`` (default
    area_side/2), or the single nearest SBS (lowest index on ties) when none
    is in range. Deterministic for a fixed seed: users are drawn first, then
    SBSs.
    """
    if num_users < 1 or num_sbs < 1:
        raise ValueError("num_users and num_sbs must be >= 1")
    if area_side <= 0:
        raise ValueError("area_side must be positive")
    if coverage_radius is None:
        coverage_radius = area_side / 2.0
    if link_radius is None:
        link_radius = area_side / 2.0
    if d_sim is None:
        d_sim = area_side / 10.0
    if coverage_radius <= 0:
        raise ValueError("coverage_radius must be positive")

    rng = np.random.default_rng(seed)
    user_pos = rng.uniform(0.0, area_side, size=(num_users, 2))
    sbs_pos = rng.uniform(0.0, area_side, size=(num_sbs, 2))

    topo = NetworkTopology(
        user_positions=user_pos,
        sbs_positions=sbs_pos,
        sbs_adjacency=np.zeros((num_sbs, num_sbs), dtype=bool),
    )
    topo.sbs_adjacency = build_sbs_graph(topo, link_radius)
    topo.similarity = compute_similarity(topo, d_sim)

    dist = np.sqrt(
        ((user_pos[:, None, :] - sbs_pos[None, :, :]) ** 2).sum(axis=2)
    )
    cands = []
    for u in range(num_users):
        in_range = np.flatnonzero(dist[u] <= coverage_radius)
        if len(in_range) == 0:
            in_range = np.array([int(np.argmin(dist[u]))])  # argmin takes lowest index on ties
        cands.append(np.sort(in_range).astype(int))
    topo.candidate_sets = cands
    return topo
