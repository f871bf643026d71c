"""Passage values, geodesics, disjoint pairs, and geodesic networks.

The operations dispatch on the environment type:

* ``LatticeField`` endpoints are cells (i, j), 0-indexed.
* ``PoissonCloud`` endpoints are space-time points (x, t).

Values are exact: integers for integer-weight models (chain counts on
clouds, integer lattice laws), plain float sums for exponential weights.
Infeasible disjoint-pair problems return None rather than a value.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from typing import List, Tuple

import numpy as np

from . import cloud as _cloud
from . import flow as _flow
from . import lattice as _lattice
from .model import (DomainError, LatticeField, Model, PoissonCloud,
                    causal_leq, _xy)


@dataclass
class Chain:
    """A geodesic: endpoints, traversed nodes, and its value.

    For lattice models nodes are the full cell list (endpoints included);
    for clouds they are the cloud points on the chain and the endpoints
    are off-cloud anchors.  The graph of the chain is the linear
    interpolation through its space-time nodes.
    """

    kind: str
    start: Tuple
    end: Tuple
    nodes: List
    value: float

    def spacetime_nodes(self) -> List[Tuple[float, float]]:
        """(x, t) node sequence including anchor endpoints."""
        if self.kind == "lattice":
            return [(j - i, i + j) for (i, j) in self.nodes]
        sx, st = _xy(self.start)
        ex, et = _xy(self.end)
        return [(sx, st)] + [(float(x), float(t)) for x, t in self.nodes] + [(ex, et)]

    def position(self, t: float) -> float:
        """Interpolated spatial position at time t."""
        pts = self.spacetime_nodes()
        ts = np.array([p[1] for p in pts], dtype=np.float64)
        xs = np.array([p[0] for p in pts], dtype=np.float64)
        if not ts[0] <= t <= ts[-1]:
            raise DomainError(f"time {t} outside chain span [{ts[0]}, {ts[-1]}]")
        return float(np.interp(t, ts, xs))

    def to_jsonable(self) -> dict:
        return {
            "kind": self.kind,
            "start": list(self.start),
            "end": list(self.end),
            "nodes": [list(n) for n in self.nodes],
            "value": self.value,
        }


@dataclass
class DisjointPair:
    left: Chain
    right: Chain
    value: float


@dataclass
class GeodesicNetwork:
    """The union of all geodesics between a point pair, as a graph.

    Vertices are the source, the sink, and every branch point of the
    on-optimal structure; each edge carries its embedded chain segment.
    """

    source: Tuple
    sink: Tuple
    vertices: List
    edges: List  # (vertex_index_from, vertex_index_to, node_segment)
    leftmost: Chain
    rightmost: Chain
    degree_violations: int = 0

    def to_jsonable(self) -> dict:
        return {
            "source": list(self.source),
            "sink": list(self.sink),
            "vertices": [list(v) for v in self.vertices],
            "edges": [[a, b, [list(n) for n in seg]] for a, b, seg in self.edges],
            "leftmost": self.leftmost.to_jsonable(),
            "rightmost": self.rightmost.to_jsonable(),
            "degree_violations": self.degree_violations,
        }


@dataclass
class OverlapInterval:
    intervals: List[Tuple[float, float]] = dataclass_field(default_factory=list)

    @property
    def total_length(self) -> float:
        return float(sum(b - a for a, b in self.intervals))


def passage_value(model: Model, start, end) -> float:
    """Exact maximum over monotone paths / causal chains."""
    if isinstance(model, LatticeField):
        v = _lattice.passage_value(model, start, end)
        return int(v) if model.integer_valued else v
    return _cloud.passage_value(model, start, end)


def passage_profile(model: Model, start, time, target_xs=None):
    """Values from one source to every endpoint at a fixed time.

    Lattice: returns {chart_x: value} for all reachable cells at chart
    time ``time``.  Cloud: requires an explicit target grid and returns
    an integer array aligned with it.
    """
    if isinstance(model, LatticeField):
        out = _lattice.profile(model, start, int(time))
        if model.integer_valued:
            out = {x: int(v) for x, v in out.items()}
        return out
    if target_xs is None:
        raise DomainError("cloud profiles need an explicit target grid")
    L, _ = _cloud.row_pass(model, start, target_xs, float(time))
    return L


def geodesic(model: Model, start, end, side: str = "left") -> Chain:
    """Extremal geodesic; 'left'/'right' take the pointwise spatial
    minimum/maximum over all optimal chains."""
    if side not in ("left", "right"):
        raise DomainError(f"side must be 'left' or 'right', got {side!r}")
    if isinstance(model, LatticeField):
        cells = _lattice.geodesic_cells(model, start, end, side)
        value = float(sum(model.weights[c] for c in cells))
        if model.integer_valued:
            value = int(round(value))
        return Chain("lattice", start, end, cells, value)
    idx = _cloud.extremal_chain(model, start, end, side)
    nodes = [(float(model.xs[m]), float(model.ts[m])) for m in idx]
    return Chain("poisson", tuple(_xy(start)), tuple(_xy(end)), nodes, len(nodes))


def disjoint2_value(model: Model, start_pair, end_pair):
    """Best summed value over interior-disjoint ordered path pairs.

    Returns None when no disjoint pair exists.  Doubled endpoints are
    shared by both paths and their weights count once per path (lattice);
    cloud anchors carry no weight and disjointness means no shared point.
    """
    _check_pair_order(model, start_pair)
    _check_pair_order(model, end_pair)
    if isinstance(model, LatticeField):
        v = _lattice.disjoint2_value(model, start_pair, end_pair)
        if v is None:
            return None
        return int(round(v)) if model.integer_valued else v
    s1, s2 = start_pair
    e1, e2 = end_pair
    if tuple(_xy(s1)) == tuple(_xy(s2)) and tuple(_xy(e1)) == tuple(_xy(e2)):
        sums = _cloud.greene_partial_sums(model, s1, e1, 2)
        return int(sums[1])
    res = _flow.disjoint_pair(model, (s1, s2), (e1, e2))
    return None if res is None else int(res[0])


def greene_values(model: Model, start, end, k: int) -> list:
    """Partial sums of the chain spectrum: the j-th entry is the largest
    total size of j disjoint chains between the anchors (cloud models)."""
    if isinstance(model, LatticeField):
        raise DomainError("greene_values applies to point models; lattice weights are not unit")
    return _cloud.greene_partial_sums(model, start, end, k)


def optimizer2(model: Model, start_pair, end_pair, side: str = "right"):
    """Extract an extremal optimal disjoint pair, or None if infeasible."""
    _check_pair_order(model, start_pair)
    _check_pair_order(model, end_pair)
    if isinstance(model, LatticeField):
        res = _lattice.optimizer_pair(model, start_pair, end_pair, side)
        if res is None:
            return None
        cells1, cells2, value = res
        if model.integer_valued:
            value = int(round(value))
        v1 = sum(model.weights[c] for c in cells1)
        v2 = sum(model.weights[c] for c in cells2)
        left = Chain("lattice", cells1[0], cells1[-1], cells1, v1)
        right = Chain("lattice", cells2[0], cells2[-1], cells2, v2)
        return DisjointPair(left, right, value)
    res = _flow.disjoint_pair(model, start_pair, end_pair)
    if res is None:
        return None
    value, c1, c2 = res
    s1, s2 = start_pair
    e1, e2 = end_pair
    mk = lambda s, e, ch: Chain("poisson", tuple(_xy(s)), tuple(_xy(e)),
                                [(float(model.xs[m]), float(model.ts[m])) for m in ch],
                                len(ch))
    return DisjointPair(mk(s1, e1, c1), mk(s2, e2, c2), value)


def on_optimal(model: Model, start, end, p) -> bool:
    """True iff p lies on some geodesic between the endpoints."""
    if isinstance(model, LatticeField):
        F = _lattice.forward_values(model, start)
        B = _lattice.backward_values(model, end)
        total = F[end]
        if not _lattice.is_reachable(total):
            raise DomainError("endpoints not connected")
        return bool(_lattice.is_reachable(F[p]) and _lattice.is_reachable(B[p])
                    and F[p] + B[p] - model.weights[p] == total)
    px, pt = _xy(p)
    if not (causal_leq(start, p) and causal_leq(p, end)):
        return False
    a = _cloud.passage_value(model, start, p)
    b = _cloud.passage_value(model, p, end)
    total = _cloud.passage_value(model, start, end)
    extra = 1 if _is_cloud_point(model, px, pt) else 0
    return a + b + extra == total


def _is_cloud_point(model: PoissonCloud, x, t) -> bool:
    return bool(np.any((model.xs == x) & (model.ts == t)))


def network(model: Model, start, end) -> GeodesicNetwork:
    """Build the geodesic network between two endpoints."""
    if isinstance(model, LatticeField):
        return _lattice_network(model, start, end)
    return _cloud_network(model, start, end)


def _lattice_network(model: LatticeField, start, end) -> GeodesicNetwork:
    F = _lattice.forward_values(model, start)
    B = _lattice.backward_values(model, end)
    total = F[end]
    if not _lattice.is_reachable(total):
        raise DomainError(f"endpoints {start}->{end} not connected")
    w = model.weights

    def successors(c):
        # both tables were computed as max(neighbors) + w, so the edge
        # tests reproduce exactly the additions the sweeps performed
        i, j = c
        out = []
        for cc in ((i + 1, j), (i, j + 1)):
            if (model.in_grid(cc) and cc[0] <= end[0] and cc[1] <= end[1]
                    and F[cc] == F[c] + w[cc] and B[c] == B[cc] + w[c]):
                out.append(cc)
        return out

    succ = {}
    stack = [start]
    while stack:
        c = stack.pop()
        if c in succ:
            continue
        succ[c] = successors(c) if c != end else []
        stack.extend(succ[c])
    pred = {c: 0 for c in succ}
    for c, outs in succ.items():
        for cc in outs:
            pred[cc] += 1
    branch = {c for c in succ
              if c not in (start, end) and (len(succ[c]) >= 2 or pred[c] >= 2)}
    vertices = [start] + sorted(branch, key=lambda c: (c[0] + c[1], c[1])) + [end]
    vindex = {c: k for k, c in enumerate(vertices)}
    edges = []
    for v in vertices:
        for s in succ.get(v, []):
            seg = [v, s]
            cur = s
            while cur not in vindex:
                cur = succ[cur][0]
                seg.append(cur)
            edges.append((vindex[v], vindex[cur], seg))
    left = geodesic(model, start, end, "left")
    right = geodesic(model, start, end, "right")
    # cell degree is structurally capped at 2 on the lattice
    violations = sum(1 for c in succ if len(succ[c]) >= 3)
    return GeodesicNetwork(start, end, vertices, edges, left, right, violations)


def _cloud_network(model: PoissonCloud, start, end) -> GeodesicNetwork:
    idx, F, B, total = _cloud.chain_tables(model, start, end)
    source = tuple(_xy(start))
    sink = tuple(_xy(end))
    left = geodesic(model, start, end, "left")
    right = geodesic(model, start, end, "right")
    if total == 0:
        return GeodesicNetwork(source, sink, [source, sink],
                               [(0, 1, [source, sink])], left, right)
    on = (F + B - 1) == total
    pts = {m: (float(model.xs[i]), float(model.ts[i]))
           for m, i in enumerate(idx) if on[m]}
    succ = {"src": [], "snk": [], **{m: [] for m in pts}}
    for m in pts:
        if F[m] == 1:
            succ["src"].append(m)
        if B[m] == 1:
            succ[m].append("snk")
    for a in pts:
        for b in pts:
            if F[b] == F[a] + 1 and B[b] == B[a] - 1 and _leq(pts[a], pts[b]):
                succ[a].append(b)
    pred = {node: [] for node in succ}
    for a, outs in succ.items():
        for b in outs:
            pred[b].append(a)
    coord = {"src": source, "snk": sink, **pts}
    branch = {m for m in pts if len(succ[m]) >= 2 or len(pred[m]) >= 2}
    vertex_nodes = (["src"]
                    + sorted(branch, key=lambda m: (pts[m][1], pts[m][0]))
                    + ["snk"])
    vindex = {node: k for k, node in enumerate(vertex_nodes)}
    vertices = [coord[node] for node in vertex_nodes]
    edges = []
    for v in vertex_nodes:
        if v == "snk":
            continue
        for s in succ[v]:
            seg = [v, s]
            cur = s
            while cur not in vindex:
                cur = succ[cur][0]
                seg.append(cur)
            edges.append((vindex[v], vindex[cur], [coord[q] for q in seg]))
    violations = sum(1 for node in succ if len(succ[node]) >= 3)
    violations += sum(1 for node in pred if len(pred[node]) >= 3)
    return GeodesicNetwork(source, sink, vertices, edges, left, right, violations)


def _leq(p, q) -> bool:
    dt = q[1] - p[1]
    return dt > 0 and abs(q[0] - p[0]) <= dt


def overlap(a: Chain, b: Chain) -> OverlapInterval:
    """Closure of the set of times where the two chains coincide."""
    pa = a.spacetime_nodes()
    pb = b.spacetime_nodes()
    ta = np.array([p[1] for p in pa])
    xa = np.array([p[0] for p in pa])
    tb = np.array([p[1] for p in pb])
    xb = np.array([p[0] for p in pb])
    lo = max(ta[0], tb[0])
    hi = min(ta[-1], tb[-1])
    if lo > hi:
        return OverlapInterval([])
    ts = sorted({float(lo), float(hi)}
                | {float(t) for t in ta if lo <= t <= hi}
                | {float(t) for t in tb if lo <= t <= hi})
    grid = []
    for u, v in zip(ts[:-1], ts[1:]):
        grid.extend((u, 0.5 * (u + v)))
    grid.append(ts[-1])
    eq = [abs(float(np.interp(t, ta, xa)) - float(np.interp(t, tb, xb))) == 0.0
          for t in grid]
    intervals = []
    k = 0
    while k < len(grid):
        if eq[k]:
            k2 = k
            while k2 + 1 < len(grid) and eq[k2 + 1]:
                k2 += 1
            intervals.append((grid[k], grid[k2]))
            k = k2 + 1
        else:
            k += 1
    return OverlapInterval(intervals)


def _check_pair_order(model, pair) -> None:
    p1, p2 = pair
    if isinstance(model, LatticeField):
        t1, t2 = p1[0] + p1[1], p2[0] + p2[1]
        if t1 != t2:
            raise DomainError("pair members must share a chart time")
        x1, x2 = p1[1] - p1[0], p2[1] - p2[0]
    else:
        (x1, t1), (x2, t2) = _xy(p1), _xy(p2)
        if t1 != t2:
            raise DomainError("pair members must share a time")
    if x1 > x2:
        raise DomainError("pair members must be weakly ordered left to right")
