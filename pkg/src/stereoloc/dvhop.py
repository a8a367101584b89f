"""DV-Hop range-free localization simulator (comparison baseline).

Nodes are scattered uniformly in the unit square and connected when within
``radio_range``. Anchors flood hop counts; the network-wide average hop
length turns hop counts into distances, and each unknown node trilaterates
from every anchor it can reach.
"""
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .exceptions import (
    CollinearAnchorsError,
    InvalidParameterError,
    NoConnectedAnchorPairError,
    TooFewAnchorsError,
)
from .geo import trilaterate

UNREACHABLE = -1


@dataclass
class DvHopNetwork:
    positions: np.ndarray  # (n, 2)
    anchor_flags: np.ndarray  # (n,) bool
    radio_range: float
    adjacency: np.ndarray  # (n, n) bool, no self loops
    seed: int = None

    @property
    def anchor_index(self):
        return np.flatnonzero(self.anchor_flags)

    @property
    def avg_degree(self):
        return float(self.adjacency.sum(axis=1).mean())


def unit_disk_adjacency(positions, radio_range):
    diff = positions[:, None, :] - positions[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    adj = dist <= radio_range
    np.fill_diagonal(adj, False)
    return adj


def make_network(positions, anchor_flags, radio_range, seed=None):
    positions = np.asarray(positions, dtype=np.float64)
    anchor_flags = np.asarray(anchor_flags, dtype=bool)
    if anchor_flags.sum() < 3:
        raise TooFewAnchorsError(f"need at least 3 anchors, got {int(anchor_flags.sum())}")
    return DvHopNetwork(
        positions, anchor_flags, float(radio_range),
        unit_disk_adjacency(positions, radio_range), seed,
    )


def generate_network(n_nodes, n_anchors, radio_range, seed):
    """Random field; the first ``n_anchors`` nodes are the anchors."""
    if n_anchors < 3:
        raise TooFewAnchorsError(f"need at least 3 anchors, got {n_anchors}")
    if n_anchors > n_nodes:
        raise InvalidParameterError(f"n_anchors={n_anchors} exceeds n_nodes={n_nodes}")
    if not 0 < radio_range <= math.sqrt(2):
        raise InvalidParameterError(f"radio_range must be in (0, sqrt(2)], got {radio_range}")
    rng = np.random.default_rng(seed)
    positions = rng.random((n_nodes, 2))
    flags = np.zeros(n_nodes, dtype=bool)
    flags[:n_anchors] = True
    return make_network(positions, flags, radio_range, seed)


def hop_counts(net):
    """Minimum hop count from each anchor (rows) to every node; -1 if unreachable."""
    graph = csr_matrix(net.adjacency.astype(np.int8))
    dist = shortest_path(graph, directed=False, unweighted=True, indices=net.anchor_index)
    table = np.full(dist.shape, UNREACHABLE, dtype=np.int64)
    finite = np.isfinite(dist)
    table[finite] = dist[finite].astype(np.int64)
    return table


def _anchor_pairs(net, table):
    idx = net.anchor_index
    pts = net.positions[idx]
    diff = pts[:, None, :] - pts[None, :, :]
    euclid = np.sqrt(np.sum(diff * diff, axis=-1))
    hops = table[:, idx]
    connected = hops > 0  # excludes i == j and unreachable
    return euclid, hops, connected


def avg_hop_distance(net, table, per_anchor=False):
    """Average distance per hop over connected anchor pairs.

    The default is one network-wide ratio. With ``per_anchor=True`` each anchor
    gets its own ratio over the anchors it reaches (NaN if it reaches none).
    """
    euclid, hops, connected = _anchor_pairs(net, table)
    if not connected.any():
        raise NoConnectedAnchorPairError("no two anchors are connected")
    if not per_anchor:
        return float(euclid[connected].sum() / hops[connected].sum())
    num = np.where(connected, euclid, 0.0).sum(axis=1)
    den = np.where(connected, hops, 0).sum(axis=1)
    out = np.full(num.shape, np.nan)
    out[den > 0] = num[den > 0] / den[den > 0]
    return out


@dataclass
class DvHopEstimate:
    hop_avg: object  # float, or per-anchor array
    est_dist: np.ndarray  # (anchors, nodes), NaN where unreachable
    est_pos: np.ndarray  # (nodes, 2), NaN where not estimated
    err: np.ndarray  # (nodes,), error / radio_range, NaN where not estimated
    localizable: np.ndarray  # (nodes,) bool, False for anchors

    @property
    def unlocalizable(self):
        return ~self.localizable


def _node_hop_avg(hop_avg, table):
    """Per-node correction: the ratio of the closest anchor that has one."""
    if np.ndim(hop_avg) == 0:
        return np.full(table.shape[1], float(hop_avg))
    ratios = np.asarray(hop_avg, dtype=np.float64)
    hops = np.where((table >= 0) & np.isfinite(ratios)[:, None], table, np.iinfo(np.int64).max)
    nearest = np.argmin(hops, axis=0)
    out = ratios[nearest]
    out[hops[nearest, np.arange(table.shape[1])] == np.iinfo(np.int64).max] = np.nan
    return out


def estimate_and_localize(net, table, hop_avg):
    n = net.positions.shape[0]
    anchors = net.positions[net.anchor_index]
    per_node = _node_hop_avg(hop_avg, table)
    est_dist = np.where(table >= 0, table * per_node[None, :], np.nan)

    est_pos = np.full((n, 2), np.nan)
    err = np.full(n, np.nan)
    localizable = np.zeros(n, dtype=bool)
    for node in np.flatnonzero(~net.anchor_flags):
        reach = np.isfinite(est_dist[:, node])
        if reach.sum() < 3:
            continue
        try:
            pos, _ = trilaterate(anchors[reach], est_dist[reach, node])
        except CollinearAnchorsError:
            continue
        est_pos[node] = pos
        err[node] = np.linalg.norm(pos - net.positions[node]) / net.radio_range
        localizable[node] = True
    return DvHopEstimate(hop_avg, est_dist, est_pos, err, localizable)


@dataclass(frozen=True)
class ExperimentParams:
    n_nodes: int = 100
    n_anchors: int = 10
    radio_range: float = 0.2
    per_anchor_correction: bool = False


def _nan_to_none(v):
    return None if v is None or not math.isfinite(v) else float(v)


def simulate(params, seed):
    """One seeded run. Returns (network, estimate or None, per-seed summary)."""
    net = generate_network(params.n_nodes, params.n_anchors, params.radio_range, seed)
    table = hop_counts(net)
    n_unknown = int((~net.anchor_flags).sum())
    try:
        hop_avg = avg_hop_distance(net, table, params.per_anchor_correction)
    except NoConnectedAnchorPairError:
        est = None
        errs = np.array([])
    else:
        est = estimate_and_localize(net, table, hop_avg)
        errs = est.err[est.localizable]
    summary = {
        "seed": seed,
        "avgDegree": net.avg_degree,
        "meanErr": _nan_to_none(errs.mean()) if errs.size else None,
        "medianErr": _nan_to_none(np.median(errs)) if errs.size else None,
        "unlocalizableFrac": 1.0 - errs.size / n_unknown if n_unknown else 0.0,
    }
    return net, est, summary, errs


def run_experiment(params, seeds):
    """Per-seed and pooled error statistics; deterministic given the seeds."""
    seeds = list(seeds)
    if not seeds:
        raise InvalidParameterError("need at least one seed")
    per_seed = []
    pooled = []
    n_unknown_total = 0
    n_localized = 0
    for seed in seeds:
        _, _, summary, errs = simulate(params, seed)
        per_seed.append(summary)
        pooled.append(errs)
        n_unknown_total += params.n_nodes - params.n_anchors
        n_localized += errs.size
    allerr = np.concatenate(pooled) if pooled else np.array([])
    aggregate = {
        "meanErr": _nan_to_none(allerr.mean()) if allerr.size else None,
        "medianErr": _nan_to_none(np.median(allerr)) if allerr.size else None,
        "unlocalizableFrac": (
            1.0 - n_localized / n_unknown_total if n_unknown_total else 0.0
        ),
        "avgDegree": float(np.mean([s["avgDegree"] for s in per_seed])),
    }
    return {"params": asdict(params), "perSeed": per_seed, "aggregate": aggregate}
