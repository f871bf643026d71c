"""Dynamic programming kernels for the lattice model.

Conventions
-----------
Cells are 0-indexed (i, j).  A path from cell a to cell b moves down or
right one cell at a time, so it visits exactly one cell per chart time
t = i + j.  Path values sum the weights of all visited cells, endpoints
included.

Pair kernels track two vertex-disjoint paths.  At every chart time the
two paths occupy distinct cells on the same antidiagonal; writing j1, j2
for their column indices, interior states satisfy j1 < j2 (two disjoint
monotone paths cannot exchange sides without sharing a cell).  A doubled
endpoint means the two paths share exactly that cell and its weight is
counted once per path.

All kernels use the sentinel NEG for unreachable states.  Weights are
held in float64; integer-law values stay exact (they are far below 2^53).
"""

from __future__ import annotations

import numpy as np

from .model import DomainError, LatticeField

NEG = -1.0e18
_VALID = NEG / 2.0


def is_reachable(value: float) -> bool:
    return value > _VALID


def _diag_span(rows: int, cols: int, t: int) -> tuple:
    return max(0, t - rows + 1), min(cols - 1, t)


def forward_values(field: LatticeField, start) -> np.ndarray:
    """F[c] = best path value start -> c, both endpoint weights included.

    Swept by antidiagonals so the recurrence F = w + max(up, left) is
    evaluated literally; values are bit-exact functions of the weights,
    which the geodesic walks rely on.
    """
    w = field.weights
    rows, cols = w.shape
    ia, ja = start
    if not field.in_grid(start):
        raise DomainError(f"start cell {start} outside {rows}x{cols} grid")
    F = np.full((rows, cols), NEG)
    F[ia, ja] = w[ia, ja]
    vec = np.full(cols, NEG)
    vec[ja] = w[ia, ja]
    shifted = np.empty(cols)
    for t in range(ia + ja + 1, rows + cols - 1):
        shifted[0] = NEG
        shifted[1:] = vec[:-1]
        np.maximum(vec, shifted, out=vec)
        jlo, jhi = _diag_span(rows, cols, t)
        jj = np.arange(jlo, jhi + 1)
        new = np.full(cols, NEG)
        new[jlo:jhi + 1] = vec[jlo:jhi + 1] + w[t - jj, jj]
        np.clip(new, NEG, None, out=new)
        F[t - jj, jj] = new[jlo:jhi + 1]
        vec = new
    return F


def backward_values(field: LatticeField, end) -> np.ndarray:
    """B[c] = best path value c -> end, both endpoint weights included."""
    if not field.in_grid(end):
        raise DomainError(f"end cell {end} outside grid")
    w = field.weights[::-1, ::-1]
    rev = LatticeField(w, "explicit")
    i, j = end
    Fr = forward_values(rev, (field.rows - 1 - i, field.cols - 1 - j))
    return Fr[::-1, ::-1].copy()


def seeded_forward(field: LatticeField, seeds: np.ndarray) -> np.ndarray:
    """Best over paths that start at any seeded cell.

    seeds[c] is the value credited for starting at c (already including
    the weight of c), or NEG.  Returns A with
    A[c] = max(seeds[c], max(A[up], A[left]) + w[c]), evaluated literally.
    """
    w = field.weights
    rows, cols = w.shape
    A = np.full((rows, cols), NEG)
    vec = np.full(cols, NEG)
    shifted = np.empty(cols)
    for t in range(0, rows + cols - 1):
        shifted[0] = NEG
        shifted[1:] = vec[:-1]
        np.maximum(vec, shifted, out=vec)
        jlo, jhi = _diag_span(rows, cols, t)
        jj = np.arange(jlo, jhi + 1)
        new = np.full(cols, NEG)
        new[jlo:jhi + 1] = vec[jlo:jhi + 1] + w[t - jj, jj]
        np.clip(new, NEG, None, out=new)
        np.maximum(new[jlo:jhi + 1], seeds[t - jj, jj], out=new[jlo:jhi + 1])
        A[t - jj, jj] = new[jlo:jhi + 1]
        vec = new
    return A


def passage_value(field: LatticeField, start, end) -> float:
    ia, ja = start
    ib, jb = end
    if not (field.in_grid(start) and field.in_grid(end)):
        raise DomainError(f"endpoints {start}->{end} outside grid")
    if ib < ia or jb < ja:
        raise DomainError(f"end {end} not reachable from start {start}")
    return float(forward_values(field, start)[ib, jb])


def profile(field: LatticeField, start, chart_time: int) -> dict:
    """Values from start to every cell at the given chart time."""
    F = forward_values(field, start)
    out = {}
    for j in range(field.cols):
        i = chart_time - j
        if 0 <= i < field.rows and is_reachable(F[i, j]):
            out[field.chart_of((i, j))[0]] = float(F[i, j])
    return out


class _PairSweep:
    """Shared scaffolding for the two-path antidiagonal sweeps."""

    def __init__(self, field: LatticeField):
        self.field = field
        self.w = field.weights
        self.rows, self.cols = self.w.shape
        cols = self.cols
        jj = np.arange(cols)
        self.strict = jj[:, None] < jj[None, :]

    def wrow(self, t: int) -> np.ndarray:
        """Weights of the cells on antidiagonal t, indexed by column."""
        out = np.full(self.cols, NEG)
        jlo = max(0, t - self.rows + 1)
        jhi = min(self.cols - 1, t)
        if jlo <= jhi:
            j = np.arange(jlo, jhi + 1)
            out[jlo:jhi + 1] = self.w[t - j, j]
        return out

    def step(self, S: np.ndarray, t_new: int, forward: bool) -> np.ndarray:
        """Advance the state matrix one chart time."""
        cols = self.cols
        P = np.full((cols + 1, cols + 1), NEG)
        if forward:
            P[1:, 1:] = S
            M = np.maximum(np.maximum(P[1:, 1:], P[:-1, 1:]),
                           np.maximum(P[1:, :-1], P[:-1, :-1]))
        else:
            P[:cols, :cols] = S
            M = np.maximum(np.maximum(P[:cols, :cols], P[1:, :cols]),
                           np.maximum(P[:cols, 1:], P[1:, 1:]))
        wr = self.wrow(t_new)
        M += wr[:, None]
        M += wr[None, :]
        M[~self.strict] = NEG
        np.clip(M, NEG, None, out=M)
        return M


def pair_forward(field: LatticeField, start_pair, t_stop: int,
                 record: bool = False):
    """Sweep the two-path DP from a start pair up to chart time t_stop.

    start_pair is (a, a) for a doubled start or (a1, a2) with a1 left of
    a2 at the same chart time.  Returns (states, t) where states[j1, j2]
    is the best pair value with paths currently at columns j1 < j2 of
    antidiagonal t = t_stop, or (None, t) if no pair is feasible.  With
    record=True returns (list_of_states, times) for backtracking.
    """
    sweep = _PairSweep(field)
    a1, a2 = start_pair
    t0 = a1[0] + a1[1]
    if a2[0] + a2[1] != t0:
        raise DomainError("start pair must share a chart time")
    S = np.full((field.cols, field.cols), NEG)
    if a1 == a2:
        i, j = a1
        t_init = t0 + 1
        down, right = (i + 1, j), (i, j + 1)
        if field.in_grid(down) and field.in_grid(right):
            S[j, j + 1] = 2.0 * field.weights[i, j] + field.weights[down] + field.weights[right]
    else:
        j1, j2 = a1[1], a2[1]
        if not (j1 < j2):
            raise DomainError("start pair must be ordered left to right")
        t_init = t0
        S[j1, j2] = field.weights[a1] + field.weights[a2]
    if t_stop < t_init:
        return (None, t_stop) if not record else ([], [])
    trail = [S] if record else None
    times = [t_init] if record else None
    for t in range(t_init + 1, t_stop + 1):
        S = sweep.step(S, t, forward=True)
        if record:
            trail.append(S)
            times.append(t)
    if not is_reachable(float(S.max())):
        return (None, t_stop) if not record else ([], [])
    if record:
        return trail, times
    return S, t_stop


def pair_backward(field: LatticeField, end_pair, t_stop: int,
                  record: bool = False):
    """Mirror sweep from an end pair down to chart time t_stop."""
    sweep = _PairSweep(field)
    b1, b2 = end_pair
    t1 = b1[0] + b1[1]
    if b2[0] + b2[1] != t1:
        raise DomainError("end pair must share a chart time")
    S = np.full((field.cols, field.cols), NEG)
    if b1 == b2:
        i, j = b1
        t_init = t1 - 1
        up, left = (i - 1, j), (i, j - 1)
        if field.in_grid(up) and field.in_grid(left):
            S[j - 1, j] = 2.0 * field.weights[i, j] + field.weights[up] + field.weights[left]
    else:
        j1, j2 = b1[1], b2[1]
        if not (j1 < j2):
            raise DomainError("end pair must be ordered left to right")
        t_init = t1
        S[j1, j2] = field.weights[b1] + field.weights[b2]
    if t_stop > t_init:
        return (None, t_stop) if not record else ([], [])
    trail = [S] if record else None
    times = [t_init] if record else None
    for t in range(t_init - 1, t_stop - 1, -1):
        S = sweep.step(S, t, forward=False)
        if record:
            trail.append(S)
            times.append(t)
    if not is_reachable(float(S.max())):
        return (None, t_stop) if not record else ([], [])
    if record:
        return trail, times
    return S, t_stop


def disjoint2_value(field: LatticeField, start_pair, end_pair):
    """Best total value of two disjoint ordered paths, or None if infeasible.

    Paths may share only doubled endpoints; each path includes both of
    its endpoint weights, so a doubled endpoint weight is counted twice.
    """
    a1, a2 = start_pair
    b1, b2 = end_pair
    for c in (a1, a2, b1, b2):
        if not field.in_grid(c):
            raise DomainError(f"cell {c} outside grid")
    t_end = b1[0] + b1[1]
    if b1 == b2:
        i, j = b1
        up, left = (i - 1, j), (i, j - 1)
        if not (field.in_grid(up) and field.in_grid(left)):
            return None
        S, _ = pair_forward(field, (a1, a2), t_end - 1)
        if S is None:
            return None
        v = S[j - 1, j]
        if not is_reachable(v):
            return None
        return float(v + 2.0 * field.weights[i, j])
    S, _ = pair_forward(field, (a1, a2), t_end)
    if S is None:
        return None
    v = S[b1[1], b2[1]]
    return float(v) if is_reachable(v) else None


def doubled_row_values(field: LatticeField, start_pair, end_cells):
    """disjoint2 values from one start pair to many doubled end cells.

    All end cells must share a chart time.  One forward sweep serves the
    whole row.  Returns a float array with NaN at infeasible entries.
    """
    ts = {c[0] + c[1] for c in end_cells}
    if len(ts) > 1:
        raise DomainError("end cells must share a chart time")
    t_end = ts.pop()
    S, _ = pair_forward(field, start_pair, t_end - 1)
    out = np.full(len(end_cells), np.nan)
    if S is None:
        return out
    for k, (i, j) in enumerate(end_cells):
        if j - 1 >= 0 and i - 1 >= 0:
            v = S[j - 1, j]
            if is_reachable(v):
                out[k] = v + 2.0 * field.weights[i, j]
    return out


def doubled_col_values(field: LatticeField, end_pair, start_cells):
    """disjoint2 values from many doubled start cells to one end pair."""
    ts = {c[0] + c[1] for c in start_cells}
    if len(ts) > 1:
        raise DomainError("start cells must share a chart time")
    t0 = ts.pop()
    S, _ = pair_backward(field, end_pair, t0 + 1)
    out = np.full(len(start_cells), np.nan)
    if S is None:
        return out
    for k, (i, j) in enumerate(start_cells):
        if i + 1 < field.rows and j + 1 < field.cols:
            v = S[j, j + 1]
            if is_reachable(v):
                out[k] = v + 2.0 * field.weights[i, j]
    return out


def geodesic_cells(field: LatticeField, start, end, side: str) -> list:
    """Extremal geodesic as a cell list.

    side='left' prefers down moves (smaller chart x at every time),
    side='right' prefers right moves.  The greedy walk stays optimal by
    construction: a move to c' is allowed iff B[c'] = B[c] - w[c].
    """
    B = backward_values(field, end)
    return geodesic_cells_from_B(field, B, start, end, side)


def geodesic_cells_from_B(field: LatticeField, B: np.ndarray, start, end,
                          side: str) -> list:
    if not is_reachable(B[start]):
        raise DomainError(f"end {end} not reachable from start {start}")
    w = field.weights
    cells = [start]
    c = start
    while c != end:
        i, j = c
        # B was computed as max(children) + w, so test in the same order
        right = (i, j + 1)
        down = (i + 1, j)
        right_ok = field.in_grid(right) and B[right] + w[i, j] == B[i, j]
        down_ok = field.in_grid(down) and B[down] + w[i, j] == B[i, j]
        if not (right_ok or down_ok):
            raise AssertionError("geodesic walk lost the optimum")
        if side == "right":
            c = right if right_ok else down
        else:
            c = down if down_ok else right
        cells.append(c)
    return cells


def bridge_exists(field: LatticeField, from_cells, to_cells,
                  F: np.ndarray, B: np.ndarray, total: float) -> bool:
    """Is there an optimal connector from one geodesic to another?

    True iff some p in from_cells and q in to_cells (both interior,
    p strictly before q) satisfy
    F(p) + value(p -> q) + B(q) - w(p) - w(q) = total.
    """
    w = field.weights
    seeds = np.full(w.shape, NEG)
    for c in from_cells[1:-1]:
        seeds[c] = F[c]
    if not np.any(seeds > _VALID):
        return False
    A = seeded_forward(field, seeds)
    for q in to_cells[1:-1]:
        aq = A[q]
        if is_reachable(aq) and aq > seeds[q] and aq + B[q] - w[q] == total:
            return True
    return False


def optimizer_pair(field: LatticeField, start_pair, end_pair, side: str):
    """Extract an extremal optimal disjoint pair as two cell lists.

    Walks forward through the recorded backward pair tables, taking the
    componentwise extremal valid move at every step (optimal pairs form
    a lattice under the componentwise order, so the greedy join/meet
    stays optimal).  Returns (cells1, cells2, value) or None.
    """
    a1, a2 = start_pair
    b1, b2 = end_pair
    t0 = a1[0] + a1[1]
    w = field.weights
    trail, times = pair_backward(field, end_pair, t0 + (1 if a1 == a2 else 0),
                                 record=True)
    if not trail:
        return None
    states = dict(zip(times, trail))
    t_first = min(times)
    t_last = max(times)
    if a1 == a2:
        i, j = a1
        down, right = (i + 1, j), (i, j + 1)
        if not (field.in_grid(down) and field.in_grid(right)):
            return None
        if t_first > t0 + 1 or not is_reachable(states[t0 + 1][j, j + 1]):
            return None
        value = float(states[t0 + 1][j, j + 1] + 2.0 * w[i, j])
        cells1, cells2 = [a1, down], [a2, right]
        j1, j2, t = j, j + 1, t0 + 1
    else:
        j1, j2 = a1[1], a2[1]
        if t_first > t0 or not is_reachable(states[t0][j1, j2]):
            return None
        value = float(states[t0][j1, j2])
        cells1, cells2 = [a1], [a2]
        t = t0
    order = ([(1, 1), (0, 1), (1, 0), (0, 0)] if side == "right"
             else [(0, 0), (1, 0), (0, 1), (1, 1)])
    while t < t_last:
        S_now = states[t]
        S_next = states[t + 1]
        rest = S_now[j1, j2] - w[t - j1, j1] - w[t - j2, j2]
        moved = False
        for d1, d2 in order:
            n1, n2 = j1 + d1, j2 + d2
            if n1 < n2 and n1 < field.cols and n2 < field.cols \
                    and is_reachable(S_next[n1, n2]) and S_next[n1, n2] == rest:
                j1, j2, t = n1, n2, t + 1
                cells1.append((t - j1, j1))
                cells2.append((t - j2, j2))
                moved = True
                break
        if not moved:
            raise AssertionError("pair backtracking lost the optimum")
    if b1 == b2:
        cells1.append(b1)
        cells2.append(b2)
    return cells1, cells2, value
