"""Max-product belief propagation for the alignment problem.

Messages live on the candidate pairs and on the links between them:

* f[c] and g[c] carry matching pressure along the row and column of
  candidate c (one-to-one constraints on each side);
* h_uv[l] / h_vu[l] carry square support across link l in each direction.

All updates read the previous iteration's messages (Jacobi schedule).  A
candidate's belief combines its weight, penalties for not being the best in
its row and column, and clamped support from incident links; the mode keeps
candidates with positive belief, made one-to-one by a small exact matching.

Row/column maxima excluding the candidate itself are computed per segment
with a top-2 trick, so one iteration costs O(candidates + links); nothing
here depends on dict ordering or threading, which keeps runs bit-identical.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .nap import Mapping, NapProblem, mapping_from_candidates, nap_objective

MESSAGE_TOL = 1e-9  # max-norm change that counts as convergence
TIE_TOL = 1e-12     # message differences below this are treated as ties


@dataclass(frozen=True)
class BpConfig:
    epsilon: float = 0.5          # penalty for candidates beaten in their row/column
    max_iterations: int = 1000
    convergence_window: int = 20  # stop after this many iterations of a stable mode
    damping: float = 0.0          # blend factor toward the previous messages
    threads: int = 1              # chunked elementwise updates; results are identical

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")
        if self.convergence_window < 1:
            raise ValueError("convergence_window must be positive")
        if not 0.0 <= self.damping < 1.0:
            raise ValueError("damping must lie in [0, 1)")
        if self.threads < 1:
            raise ValueError("threads must be positive")


@dataclass
class _Workspace:
    """Problem-derived arrays reused by every iteration."""

    wn: np.ndarray        # alpha-scaled node weights
    wl: np.ndarray        # (1 - alpha)-scaled link weights
    starts_r: np.ndarray  # segment starts over candidates sorted by row
    seg_r: np.ndarray     # segment id per candidate (row order = storage order)
    perm_c: np.ndarray    # permutation sorting candidates by column
    starts_c: np.ndarray
    seg_c: np.ndarray     # segment id per *permuted* position
    problem: Optional["NapProblem"] = None
    epsilon: float = 0.5
    threads: int = 1
    pool: Optional[ThreadPoolExecutor] = None


@dataclass
class BpState:
    """Message state after `iteration` updates.

    f, g and the h arrays always hold the latest messages; phi, gamma and
    p_hat are derived from them on demand (and cached, so an estimate_mode
    call followed by bp_iterate computes them only once).  best_mapping and
    best_objective are maintained by solve_nap.
    """

    f: np.ndarray
    g: np.ndarray
    h_uv: np.ndarray   # link message u -> v
    h_vu: np.ndarray   # link message v -> u
    iteration: int = 0
    delta: float = float("inf")
    ops_last: int = 0
    best_mapping: Mapping = field(default_factory=Mapping.empty)
    best_objective: float = 0.0
    ws: Optional[_Workspace] = field(default=None, repr=False, compare=False)
    _cache: Optional[tuple] = field(default=None, repr=False, compare=False)

    def _derived_now(self) -> tuple:
        if self._cache is None:
            if self.ws is None or self.ws.problem is None:
                raise RuntimeError("state has no workspace; use init_state")
            self._cache = _derived(self.ws.problem, self.ws, self,
                                   self.ws.epsilon)
        return self._cache

    @property
    def phi(self) -> np.ndarray:
        return self._derived_now()[0]

    @property
    def gamma(self) -> np.ndarray:
        return self._derived_now()[1]

    @property
    def p_hat(self) -> np.ndarray:
        """Belief of the current messages."""
        return self._derived_now()[7]

    def message_memory_bytes(self) -> int:
        return self.f.nbytes + self.g.nbytes + self.h_uv.nbytes + self.h_vu.nbytes


@dataclass
class BpDiagnostics:
    iterations: int
    converged: bool
    stop_reason: str
    best_objective: float
    objective_trace: List[float]
    ops_per_iteration: int
    ops_total: int
    message_memory_bytes: int
    seconds: float


def _segments(sorted_ids: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Starts and per-element segment ids of equal runs in a sorted array."""
    if len(sorted_ids) == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    boundary = np.empty(len(sorted_ids), dtype=bool)
    boundary[0] = True
    boundary[1:] = sorted_ids[1:] != sorted_ids[:-1]
    return np.flatnonzero(boundary), np.cumsum(boundary) - 1


def _make_workspace(problem: NapProblem, config: "BpConfig") -> _Workspace:
    wn = problem.alpha * problem.node_weights
    wl = (1.0 - problem.alpha) * problem.link_w
    starts_r, seg_r = _segments(problem.cand_rows)
    perm_c = np.lexsort((problem.cand_rows, problem.cand_cols))
    starts_c, seg_c = _segments(problem.cand_cols[perm_c])
    threads = config.threads
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    return _Workspace(wn=wn, wl=wl, starts_r=starts_r, seg_r=seg_r,
                      perm_c=perm_c, starts_c=starts_c, seg_c=seg_c,
                      problem=problem, epsilon=config.epsilon,
                      threads=threads, pool=pool)


def _run_chunks(n: int, ws: _Workspace, fn):
    """Apply fn(lo, hi) over [0, n); chunks write disjoint slices."""
    if ws.pool is None or n < 1024:
        fn(0, n)
        return
    bounds = np.linspace(0, n, ws.threads + 1).astype(np.int64)
    jobs = [ws.pool.submit(fn, int(bounds[k]), int(bounds[k + 1]))
            for k in range(ws.threads)]
    for job in jobs:
        job.result()


def _segment_stats(values: np.ndarray, starts: np.ndarray,
                   seg: np.ndarray) -> Tuple[np.ndarray, np.ndarray, int]:
    """Per element: max of its segment, and max of the segment excluding it.

    The exclusive max removes one occurrence of the maximum, so duplicated
    maxima still see the duplicate.  Empty exclusions come out as -inf.
    """
    m1 = np.maximum.reduceat(values, starts)
    full = m1[seg]
    pos = np.arange(len(values), dtype=np.int64)
    at_max = values == full
    first = np.minimum.reduceat(np.where(at_max, pos, len(values)), starts)
    trimmed = values.copy()
    trimmed[first] = -np.inf
    m2 = np.maximum.reduceat(trimmed, starts)
    excl = np.where(pos == first[seg], m2[seg], full)
    ops = 7 * len(values)
    return full, excl, ops


def _support(problem: NapProblem, ws: _Workspace, h_uv: np.ndarray,
             h_vu: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Clamped incoming link terms and their per-candidate sums."""
    n_cand = problem.n_candidates
    n_link = len(ws.wl)
    if n_link == 0:
        zero = np.zeros(0)
        return np.zeros(n_cand), zero, zero.copy(), 0
    in_u = np.empty(n_link)
    in_v = np.empty(n_link)

    def fill(lo, hi):
        np.clip(ws.wl[lo:hi] + h_vu[lo:hi], 0.0, ws.wl[lo:hi], out=in_u[lo:hi])
        np.clip(ws.wl[lo:hi] + h_uv[lo:hi], 0.0, ws.wl[lo:hi], out=in_v[lo:hi])

    _run_chunks(n_link, ws, fill)
    support = (np.bincount(problem.link_u, weights=in_u, minlength=n_cand)
               + np.bincount(problem.link_v, weights=in_v, minlength=n_cand))
    return support, in_u, in_v, 6 * n_link + n_cand


def _derived(problem: NapProblem, ws: _Workspace, state: BpState, epsilon: float):
    """Belief and penalty terms of the state's current messages."""
    if problem.n_candidates == 0:
        zero = np.zeros(0)
        return (zero,) * 8 + (0,)
    ops = 0
    full_f, excl_f, o = _segment_stats(state.f, ws.starts_r, ws.seg_r)
    ops += o
    g_c = state.g[ws.perm_c]
    full_g_c, excl_g_c, o = _segment_stats(g_c, ws.starts_c, ws.seg_c)
    ops += o + len(g_c)
    full_g = np.empty_like(full_g_c)
    excl_g = np.empty_like(excl_g_c)
    full_g[ws.perm_c] = full_g_c
    excl_g[ws.perm_c] = excl_g_c

    phi = np.where(full_f - state.f < TIE_TOL, 0.0, epsilon)
    gamma = np.where(full_g - state.g < TIE_TOL, 0.0, epsilon)
    rexf = np.maximum(excl_f, 0.0)
    cexg = np.maximum(excl_g, 0.0)
    support, in_u, in_v, o = _support(problem, ws, state.h_uv, state.h_vu)
    ops += o + 6 * problem.n_candidates

    belief = np.empty(problem.n_candidates)

    def fill(lo, hi):
        belief[lo:hi] = (ws.wn[lo:hi] - rexf[lo:hi] - phi[lo:hi]
                         - cexg[lo:hi] - gamma[lo:hi] + support[lo:hi])

    _run_chunks(problem.n_candidates, ws, fill)
    ops += 5 * problem.n_candidates
    return phi, gamma, rexf, cexg, support, in_u, in_v, belief, ops


def init_state(problem: NapProblem, config: Optional[BpConfig] = None) -> BpState:
    """All-zero messages; the initial belief is weight plus full link support."""
    config = config or BpConfig()
    ws = _make_workspace(problem, config)
    n_cand, n_link = problem.n_candidates, len(ws.wl)
    return BpState(f=np.zeros(n_cand), g=np.zeros(n_cand),
                   h_uv=np.zeros(n_link), h_vu=np.zeros(n_link), ws=ws)


def bp_iterate(problem: NapProblem, state: BpState,
               config: Optional[BpConfig] = None) -> BpState:
    """One Jacobi update of all messages."""
    config = config or BpConfig()
    if state.ws is None:
        state.ws = _make_workspace(problem, config)
    ws = state.ws
    if config.epsilon != ws.epsilon:
        ws.epsilon = config.epsilon
        state._cache = None
    n_cand, n_link = problem.n_candidates, len(ws.wl)

    phi, gamma, rexf, cexg, support, in_u, in_v, belief, ops = state._derived_now()

    f_new = np.empty(n_cand)
    g_new = np.empty(n_cand)

    def fill_fg(lo, hi):
        f_new[lo:hi] = ws.wn[lo:hi] - cexg[lo:hi] - gamma[lo:hi] + support[lo:hi]
        g_new[lo:hi] = ws.wn[lo:hi] - rexf[lo:hi] - phi[lo:hi] + support[lo:hi]

    _run_chunks(n_cand, ws, fill_fg)
    ops += 6 * n_cand

    if n_link:
        h_uv_new = np.empty(n_link)
        h_vu_new = np.empty(n_link)

        def fill_h(lo, hi):
            h_uv_new[lo:hi] = belief[problem.link_u[lo:hi]] - in_u[lo:hi]
            h_vu_new[lo:hi] = belief[problem.link_v[lo:hi]] - in_v[lo:hi]

        _run_chunks(n_link, ws, fill_h)
        ops += 4 * n_link
    else:
        h_uv_new, h_vu_new = state.h_uv, state.h_vu

    d = config.damping
    if d > 0.0:
        f_new = (1.0 - d) * f_new + d * state.f
        g_new = (1.0 - d) * g_new + d * state.g
        if n_link:
            h_uv_new = (1.0 - d) * h_uv_new + d * state.h_uv
            h_vu_new = (1.0 - d) * h_vu_new + d * state.h_vu
        ops += 4 * n_cand + 4 * n_link

    delta = 0.0
    if n_cand:
        delta = max(float(np.max(np.abs(f_new - state.f))),
                    float(np.max(np.abs(g_new - state.g))))
    if n_link:
        delta = max(delta, float(np.max(np.abs(h_uv_new - state.h_uv))),
                    float(np.max(np.abs(h_vu_new - state.h_vu))))
    ops += 4 * n_cand + 4 * n_link

    state.f, state.g = f_new, g_new
    state.h_uv, state.h_vu = h_uv_new, h_vu_new
    state._cache = None
    state.iteration += 1
    state.delta = delta
    state.ops_last = ops
    return state


def estimate_mode(problem: NapProblem, state: BpState) -> Mapping:
    """One-to-one mapping over candidates with positive belief.

    Candidates with p_hat <= 0 are dropped; the rest are resolved by an
    exact matching restricted to the rows and columns they touch, and only
    positive-belief cells can be selected.
    """
    positive = np.flatnonzero(state.p_hat > 0.0)
    if len(positive) == 0:
        return Mapping.empty()
    rows = problem.cand_rows[positive]
    cols = problem.cand_cols[positive]
    row_ids, row_pos = np.unique(rows, return_inverse=True)
    col_ids, col_pos = np.unique(cols, return_inverse=True)
    dense = np.zeros((len(row_ids), len(col_ids)))
    dense[row_pos, col_pos] = state.p_hat[positive]
    sel_r, sel_c = linear_sum_assignment(dense, maximize=True)
    chosen = dense[sel_r, sel_c] > 0.0
    return Mapping.from_pairs(zip(row_ids[sel_r[chosen]].tolist(),
                                  col_ids[sel_c[chosen]].tolist()))


def solve_nap(problem: NapProblem,
              config: Optional[BpConfig] = None) -> Tuple[Mapping, BpDiagnostics]:
    """Run belief propagation, keeping the best mode seen at any iteration.

    The empty mapping (objective 0) is the initial incumbent, so the result
    never has a negative objective.  Stops early when messages change by
    less than MESSAGE_TOL in max-norm or the mode stays identical for
    convergence_window consecutive iterations.
    """
    config = config or BpConfig()
    started = time.perf_counter()
    state = init_state(problem, config)
    trace: List[float] = []
    ops_total = 0
    stop_reason = "iteration_limit"
    converged = False
    previous_mode = None
    stable = 0

    iteration_budget = config.max_iterations if problem.n_candidates else 0
    if iteration_budget:
        # The zero-message belief (weights plus optimistic link support) is a
        # strong matching on its own; score it before the first update.
        mode = estimate_mode(problem, state)
        objective = nap_objective(problem, mode)
        trace.append(objective)
        if objective > state.best_objective:
            state.best_objective = objective
            state.best_mapping = mode
        previous_mode = mode
    for _ in range(iteration_budget):
        bp_iterate(problem, state, config)
        ops_total += state.ops_last
        mode = estimate_mode(problem, state)
        objective = nap_objective(problem, mode)
        trace.append(objective)
        if objective > state.best_objective:
            state.best_objective = objective
            state.best_mapping = mode
        if state.delta < MESSAGE_TOL:
            stop_reason = "message_tolerance"
            converged = True
            break
        if mode == previous_mode:
            stable += 1
            if stable >= config.convergence_window:
                stop_reason = "mode_stable"
                converged = True
                break
        else:
            stable = 0
            previous_mode = mode

    if problem.n_candidates == 0:
        converged = True
        stop_reason = "empty"

    diagnostics = BpDiagnostics(
        iterations=state.iteration,
        converged=converged,
        stop_reason=stop_reason,
        best_objective=state.best_objective,
        objective_trace=trace,
        ops_per_iteration=state.ops_last,
        ops_total=ops_total,
        message_memory_bytes=state.message_memory_bytes(),
        seconds=time.perf_counter() - started,
    )
    return state.best_mapping, diagnostics
