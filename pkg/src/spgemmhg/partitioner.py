"""Balanced p-way hypergraph partitioning.

``partition_multilevel`` is the workhorse: greedy matching coarsens the
hypergraph, recursive bisection with randomized region growth seeds a
partition on the coarsest graph, and move-based refinement with rollback
cleans up on the way back down.  ``partition_bruteforce`` is the exhaustive
oracle for small instances, ``refine_fm`` exposes the refinement engine,
and ``geometric_partition`` produces the grid-based baselines for the
stencil model problem.
"""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass

from . import metrics
from .errors import BalanceError, ConfigError, GuardError
from .hypergraph import Hypergraph, Partition, format_label

_NEG_MOVE_STREAK = 60      # non-improving moves tolerated inside one pass
_MATCH_NET_SIZE_CAP = 64   # nets wider than this are ignored while matching


@dataclass(frozen=True)
class PartitionConfig:
    """Partitioning parameters.

    ``epsilon`` bounds computation imbalance, ``delta`` memory imbalance
    (``None`` leaves memory unconstrained, the default).  A part may carry
    at most ``floor((1 + tol) * total / p)`` of the respective weight.
    """

    p: int
    epsilon: float = 0.01
    delta: float | None = None
    objective: str = metrics.CONNECTIVITY
    seed: int = 0
    refinement_passes: int = 4

    def __post_init__(self):
        if self.p < 1:
            raise ConfigError("part count must be at least 1")
        if self.epsilon < 0:
            raise ConfigError("epsilon must be nonnegative")
        if self.delta is not None and self.delta < 0:
            raise ConfigError("delta must be nonnegative")
        if self.objective not in metrics.OBJECTIVES:
            raise ConfigError(f"unknown objective {self.objective!r}")


def part_weight_cap(total: int, p: int, tol: float) -> int:
    """Largest integer part weight within tolerance ``tol`` of the average."""
    return math.floor((1.0 + tol) * total / p + 1e-9)


class _Level:
    """Array view of a hypergraph, the unit the engine and coarsener use."""

    __slots__ = ("n", "pins", "cost", "wc", "wm", "vnets", "max_wc")

    def __init__(self, n, pins, cost, wc, wm):
        self.n = n
        self.pins = pins
        self.cost = cost
        self.wc = wc
        self.wm = wm
        vnets: list[list[int]] = [[] for _ in range(n)]
        for nid, net_pins in enumerate(pins):
            for pin in net_pins:
                vnets[pin].append(nid)
        self.vnets = vnets
        self.max_wc = max(wc, default=0)

    @classmethod
    def from_hypergraph(cls, h: Hypergraph) -> "_Level":
        return cls(len(h.vertices),
                   [list(net.pins) for net in h.nets],
                   [net.cost for net in h.nets],
                   [v.w_comp for v in h.vertices],
                   [v.w_mem for v in h.vertices])


class _Engine:
    """Incremental cut bookkeeping plus move-based refinement."""

    def __init__(self, level: _Level, p: int, assignment: list[int],
                 comp_cap: int, mem_cap: int | None, objective: str):
        self.level = level
        self.p = p
        self.parts = list(assignment)
        self.comp_cap = comp_cap
        self.mem_cap = mem_cap
        self.objective = objective
        self.part_wc = [0] * p
        self.part_wm = [0] * p
        for v in range(level.n):
            self.part_wc[self.parts[v]] += level.wc[v]
            self.part_wm[self.parts[v]] += level.wm[v]
        self.counts: list[dict[int, int]] = []
        self.pc = [0] * p  # per-part cost of nets crossing its boundary
        self.conn = 0
        for nid, pins in enumerate(level.pins):
            d: dict[int, int] = {}
            for pin in pins:
                q = self.parts[pin]
                d[q] = d.get(q, 0) + 1
            self.counts.append(d)
            if len(d) >= 2:
                self.conn += level.cost[nid] * (len(d) - 1)
                for q in d:
                    self.pc[q] += level.cost[nid]

    # -- state queries ----------------------------------------------------

    def objective_value(self) -> int:
        if self.objective == metrics.CONNECTIVITY:
            return self.conn
        return max(self.pc)

    def excess(self) -> int:
        over = sum(max(0, w - self.comp_cap) for w in self.part_wc)
        if self.mem_cap is not None:
            over += sum(max(0, w - self.mem_cap) for w in self.part_wm)
        return over

    def feasible(self) -> bool:
        return self.excess() == 0

    def score(self) -> tuple[int, int]:
        return (self.excess(), self.objective_value())

    def is_boundary(self, v: int) -> bool:
        return any(len(self.counts[nid]) >= 2 for nid in self.level.vnets[v])

    # -- moves ------------------------------------------------------------

    def _deltas(self, v: int, t: int) -> tuple[int, int, int]:
        """Deltas for moving v to t: (connectivity, source boundary cost,
        target boundary cost)."""
        s = self.parts[v]
        conn_d = ds = dt = 0
        for nid in self.level.vnets[v]:
            d = self.counts[nid]
            c = self.level.cost[nid]
            size = len(self.level.pins[nid])
            cs = d[s]
            ct = d.get(t, 0)
            if ct == 0:
                conn_d += c
            if cs == 1:
                conn_d -= c
            ds += c * ((1 if cs >= 2 else 0) - (1 if cs < size else 0))
            dt += c * ((1 if ct + 1 < size else 0) - (1 if ct >= 1 else 0))
        return conn_d, ds, dt

    def gain(self, v: int, t: int) -> int:
        s = self.parts[v]
        conn_d, ds, dt = self._deltas(v, t)
        if self.objective == metrics.CONNECTIVITY:
            return -conn_d
        cur = max(self.pc)
        other = 0
        for q in range(self.p):
            if q != s and q != t and self.pc[q] > other:
                other = self.pc[q]
        return cur - max(other, self.pc[s] + ds, self.pc[t] + dt)

    def move(self, v: int, t: int) -> None:
        s = self.parts[v]
        if s == t:
            return
        conn_d, ds, dt = self._deltas(v, t)
        for nid in self.level.vnets[v]:
            d = self.counts[nid]
            if d[s] == 1:
                del d[s]
            else:
                d[s] -= 1
            d[t] = d.get(t, 0) + 1
        self.conn += conn_d
        self.pc[s] += ds
        self.pc[t] += dt
        self.parts[v] = t
        self.part_wc[s] -= self.level.wc[v]
        self.part_wc[t] += self.level.wc[v]
        self.part_wm[s] -= self.level.wm[v]
        self.part_wm[t] += self.level.wm[v]

    def _fits(self, v: int, t: int, comp_cap: int) -> bool:
        if self.part_wc[t] + self.level.wc[v] > comp_cap:
            return False
        if self.mem_cap is not None:
            if self.part_wm[t] + self.level.wm[v] > self.mem_cap:
                return False
        return True

    def adjacent_parts(self, v: int) -> list[int]:
        s = self.parts[v]
        seen: set[int] = set()
        for nid in self.level.vnets[v]:
            seen.update(self.counts[nid])
        seen.discard(s)
        return sorted(seen)

    def _gain_profile(self, v: int) -> tuple[int, dict[int, int]]:
        """One pass over v's nets giving every connectivity gain at once:
        gain(v -> t) = base + by_part[t], with by_part keyed by the parts
        adjacent to v."""
        s = self.parts[v]
        base = 0
        by_part: dict[int, int] = {}
        for nid in self.level.vnets[v]:
            d = self.counts[nid]
            c = self.level.cost[nid]
            if d[s] == 1:
                base += c
            base -= c
            for q in d:
                if q != s:
                    by_part[q] = by_part.get(q, 0) + c
        return base, by_part

    def best_move(self, v: int, comp_cap: int) -> tuple[int, int] | None:
        """Highest-gain admissible move of v as (gain, target); ties go to
        the lowest target part."""
        best: tuple[int, int] | None = None
        if self.objective == metrics.CONNECTIVITY:
            base, by_part = self._gain_profile(v)
            for t in sorted(by_part):
                if not self._fits(v, t, comp_cap):
                    continue
                g = base + by_part[t]
                if best is None or g > best[0]:
                    best = (g, t)
            return best
        for t in self.adjacent_parts(v):
            if not self._fits(v, t, comp_cap):
                continue
            g = self.gain(v, t)
            if best is None or g > best[0]:
                best = (g, t)
        return best

    # -- balance repair ---------------------------------------------------

    def repair(self) -> bool:
        """Drain overloaded parts until the caps hold.

        Every step strictly lowers the heaviest end of the load vector, so
        the loop terminates; among admissible steps the ones that keep the
        target under the cap and hurt the objective least win.  When no
        single move helps, a pairwise exchange is tried before giving up.
        """
        limit = 4 * self.level.n + 16
        for _ in range(limit):
            over = [q for q in range(self.p) if self.part_wc[q] > self.comp_cap]
            if not over:
                if self.mem_cap is None or all(
                        w <= self.mem_cap for w in self.part_wm):
                    return True
                return False  # memory overload is not repaired heuristically
            s = max(over, key=lambda q: (self.part_wc[q], -q))
            best = None
            fast = self.objective == metrics.CONNECTIVITY
            for v in range(self.level.n):
                if self.parts[v] != s:
                    continue
                w = self.level.wc[v]
                if w == 0:
                    continue
                if fast:
                    base, by_part = self._gain_profile(v)
                for t in range(self.p):
                    if t == s or self.part_wc[t] + w >= self.part_wc[s]:
                        continue
                    fits = self.part_wc[t] + w <= self.comp_cap
                    g = (base + by_part.get(t, 0)) if fast else self.gain(v, t)
                    key = (fits, g, -v, -t)
                    if best is None or key > best[0]:
                        best = (key, v, t)
            if best is not None:
                self.move(best[1], best[2])
                continue
            if not self._swap_out_of(s):
                return False
        return self.excess() == 0

    def _swap_out_of(self, s: int) -> bool:
        """Exchange a vertex of the overloaded part s with a lighter one
        elsewhere so that max(load(s), load(t)) strictly drops."""
        if self.level.n > 4096:
            return False
        fast = self.objective == metrics.CONNECTIVITY
        profiles: dict[int, tuple[int, dict[int, int]]] = {}

        def gain_of(v, t):
            if not fast:
                return self.gain(v, t)
            if v not in profiles:
                profiles[v] = self._gain_profile(v)
            base, by_part = profiles[v]
            return base + by_part.get(t, 0)

        ws = self.part_wc[s]
        best = None
        for v in range(self.level.n):
            if self.parts[v] != s:
                continue
            wv = self.level.wc[v]
            if wv == 0:
                continue
            for u in range(self.level.n):
                t = self.parts[u]
                if t == s:
                    continue
                wu = self.level.wc[u]
                if wu >= wv:
                    continue
                new_s = ws - wv + wu
                new_t = self.part_wc[t] + wv - wu
                if max(new_s, new_t) >= ws:
                    continue
                fits = new_s <= self.comp_cap and new_t <= self.comp_cap
                key = (fits, gain_of(v, t) + gain_of(u, s), -v, -u)
                if best is None or key > best[0]:
                    best = (key, v, u, t)
        if best is None:
            return False
        _, v, u, t = best
        self.move(v, t)
        self.move(u, s)
        return True

    # -- refinement -------------------------------------------------------

    def refine(self, max_passes: int, max_moves: int | None = None) -> bool:
        improved_any = False
        for _ in range(max_passes):
            if not self._pass(max_moves):
                break
            improved_any = True
        return improved_any

    def _pass(self, max_moves: int | None) -> bool:
        """One locked move sequence, then rollback to the best state seen.

        Moves may transiently exceed the computation cap by one heaviest
        vertex; states are ranked balance-first, so the pass never returns
        a partition worse than its input.
        """
        n = self.level.n
        loose_cap = self.comp_cap + self.level.max_wc
        start = self.score()
        best = start
        trail: list[tuple[int, int]] = []  # (vertex, part it came from)
        best_len = 0
        locked = bytearray(n)
        if max_moves is None:
            max_moves = n

        heap: list[tuple[int, int, int]] = []
        for v in range(n):
            if self.is_boundary(v):
                mv = self.best_move(v, loose_cap)
                if mv is not None:
                    heapq.heappush(heap, (-mv[0], v, mv[1]))

        neg_streak = 0
        moves = 0
        while heap and moves < max_moves and neg_streak <= _NEG_MOVE_STREAK:
            neg_gain, v, t = heapq.heappop(heap)
            if locked[v]:
                continue
            mv = self.best_move(v, loose_cap)
            if mv is None:
                continue
            if (-mv[0], mv[1]) != (neg_gain, t):
                heapq.heappush(heap, (-mv[0], v, mv[1]))
                continue
            touched: set[int] = set()
            for nid in self.level.vnets[v]:
                touched.update(self.level.pins[nid])
            source = self.parts[v]
            self.move(v, t)
            locked[v] = 1
            moves += 1
            trail.append((v, source))
            score = self.score()
            if score < best:
                best = score
                best_len = len(trail)
                neg_streak = 0
            else:
                neg_streak += 1
            for u in touched:
                if not locked[u]:
                    mv_u = self.best_move(u, loose_cap)
                    if mv_u is not None:
                        heapq.heappush(heap, (-mv_u[0], u, mv_u[1]))
        for v, source in reversed(trail[best_len:]):
            self.move(v, source)
        return best < start


# ---------------------------------------------------------------------------
# Coarsening.
# ---------------------------------------------------------------------------

def _greedy_matching(level: _Level, rng: random.Random) -> list[list[int]]:
    """Pair each vertex with its most strongly connected unmatched neighbor,
    visiting vertices in random order.  Connection strength is cost divided
    by net degree, summed over shared nets."""
    n = level.n
    order = list(range(n))
    rng.shuffle(order)
    mate = [-1] * n
    for v in order:
        if mate[v] != -1:
            continue
        scores: dict[int, float] = {}
        for nid in level.vnets[v]:
            pins = level.pins[nid]
            if len(pins) > _MATCH_NET_SIZE_CAP or len(pins) < 2:
                continue
            w = level.cost[nid] / (len(pins) - 1)
            for u in pins:
                if u != v and mate[u] == -1:
                    scores[u] = scores.get(u, 0.0) + w
        if scores:
            best_u = -1
            best_s = -1.0
            for u, sc in scores.items():
                if sc > best_s or (sc == best_s and u < best_u):
                    best_u, best_s = u, sc
            mate[v] = best_u
            mate[best_u] = v
    groups = []
    for v in range(n):
        if mate[v] == -1:
            groups.append([v])
        elif v < mate[v]:
            groups.append([v, mate[v]])
    return groups


def _coarsen_level(level: _Level, groups: list[list[int]]
                   ) -> tuple[_Level, list[int]]:
    n = level.n
    gmap = [0] * n
    for g, group in enumerate(groups):
        for v in group:
            gmap[v] = g
    wc = [sum(level.wc[v] for v in group) for group in groups]
    wm = [sum(level.wm[v] for v in group) for group in groups]
    merged: dict[tuple[int, ...], int] = {}
    pins_out: list[list[int]] = []
    cost_out: list[int] = []
    for nid, pins in enumerate(level.pins):
        seen: set[int] = set()
        mapped = []
        for pin in pins:
            g = gmap[pin]
            if g not in seen:
                seen.add(g)
                mapped.append(g)
        if len(mapped) < 2:
            continue
        key = tuple(sorted(mapped))
        pos = merged.get(key)
        if pos is None:
            merged[key] = len(pins_out)
            pins_out.append(mapped)
            cost_out.append(level.cost[nid])
        else:
            cost_out[pos] += level.cost[nid]
    return _Level(len(groups), pins_out, cost_out, wc, wm), gmap


# ---------------------------------------------------------------------------
# Initial partitioning on the coarsest level.
# ---------------------------------------------------------------------------

def _grow_side(level: _Level, verts: list[int], target_w: int,
               rng: random.Random) -> list[int]:
    """Randomized greedy region growth over a vertex subset until the grown
    side reaches the target computation weight."""
    member = set(verts)
    unassigned = set(verts)
    side: list[int] = []
    weight = 0
    gains: dict[int, float] = {}
    while unassigned and weight < target_w:
        if gains:
            pick = max(gains.items(), key=lambda kv: (kv[1], -kv[0]))[0]
            del gains[pick]
        else:
            pick = rng.choice(sorted(unassigned))
        unassigned.discard(pick)
        side.append(pick)
        weight += level.wc[pick]
        for nid in level.vnets[pick]:
            pins = level.pins[nid]
            if len(pins) < 2:
                continue
            w = level.cost[nid] / (len(pins) - 1)
            for u in pins:
                if u in unassigned and u in member:
                    gains[u] = gains.get(u, 0.0) + w
    return side


def _recursive_bisect(level: _Level, verts: list[int], lo: int, hi: int,
                      rng: random.Random, out: list[int]) -> None:
    if hi - lo == 1:
        for v in verts:
            out[v] = lo
        return
    p0 = (hi - lo + 1) // 2
    p1 = (hi - lo) - p0
    total = sum(level.wc[v] for v in verts)
    target = round(total * p0 / (hi - lo))
    side = _grow_side(level, verts, target, rng)
    side_set = set(side)
    rest = [v for v in verts if v not in side_set]
    # each half must be able to host its share of parts; the last-grown
    # vertices are the least attached, so they migrate first
    while len(side) < p0:
        side.append(rest.pop())
    while len(rest) < p1:
        rest.append(side.pop())
    _recursive_bisect(level, side, lo, lo + p0, rng, out)
    _recursive_bisect(level, rest, lo + p0, hi, rng, out)


def _lpt_assignment(level: _Level, p: int) -> list[int]:
    """Largest weights first onto the lightest part: ignores the cut but is
    very good at tight packings of few chunky vertices."""
    order = sorted(range(level.n), key=lambda v: (-level.wc[v], v))
    loads = [0] * p
    asg = [0] * level.n
    for v in order:
        t = min(range(p), key=lambda q: (loads[q], q))
        asg[v] = t
        loads[t] += level.wc[v]
    return asg


def _initial_assignment(level: _Level, p: int, comp_cap: int,
                        mem_cap: int | None, objective: str,
                        rng: random.Random, passes: int) -> list[int]:
    restarts = 16 if level.n <= 192 else 4
    candidates = [_lpt_assignment(level, p)]
    for _ in range(restarts):
        asg = [0] * level.n
        _recursive_bisect(level, list(range(level.n)), 0, p, rng, asg)
        candidates.append(asg)
    best_asg: list[int] | None = None
    best_score = None
    for asg in candidates:
        eng = _Engine(level, p, asg, comp_cap, mem_cap, objective)
        eng.repair()
        eng.refine(passes)
        score = eng.score()
        if best_score is None or score < best_score:
            best_score = score
            best_asg = eng.parts[:]
    assert best_asg is not None
    return best_asg


# ---------------------------------------------------------------------------
# Public entry points.
# ---------------------------------------------------------------------------

def _feasibility_check(h: Hypergraph, cfg: PartitionConfig) -> tuple[int, int | None]:
    comp_cap = part_weight_cap(h.total_comp, cfg.p, cfg.epsilon)
    for idx, v in enumerate(h.vertices):
        if v.w_comp > comp_cap:
            raise BalanceError(
                f"vertex {idx} ({format_label(v.label)}) has w_comp="
                f"{v.w_comp}, above the per-part cap {comp_cap}; no balanced "
                f"partition exists")
    mem_cap = None
    if cfg.delta is not None:
        mem_cap = part_weight_cap(h.total_mem, cfg.p, cfg.delta)
        for idx, v in enumerate(h.vertices):
            if v.w_mem > mem_cap:
                raise BalanceError(
                    f"vertex {idx} ({format_label(v.label)}) has w_mem="
                    f"{v.w_mem}, above the per-part cap {mem_cap}")
    return comp_cap, mem_cap


def partition_multilevel(h: Hypergraph, cfg: PartitionConfig) -> Partition:
    """Deterministic multilevel partition satisfying the balance tolerance.

    Raises :class:`BalanceError` when no balanced partition can exist (a
    single vertex above the cap, or more parts than vertices) or when the
    heuristic cannot reach the cap.
    """
    n = len(h.vertices)
    if cfg.p > n:
        raise BalanceError(f"p={cfg.p} exceeds the vertex count {n}")
    comp_cap, mem_cap = _feasibility_check(h, cfg)
    if cfg.p == 1:
        return Partition(1, (0,) * n)

    rng = random.Random(cfg.seed)
    levels = [_Level.from_hypergraph(h)]
    gmaps: list[list[int]] = []
    threshold = max(4 * cfg.p, 80)
    while levels[-1].n > threshold:
        groups = _greedy_matching(levels[-1], rng)
        if len(groups) > 0.95 * levels[-1].n:
            break
        nxt, gmap = _coarsen_level(levels[-1], groups)
        levels.append(nxt)
        gmaps.append(gmap)

    asg = _initial_assignment(levels[-1], cfg.p, comp_cap, mem_cap,
                              cfg.objective, rng, cfg.refinement_passes)
    for li in range(len(levels) - 1, 0, -1):
        gmap = gmaps[li - 1]
        fine_asg = [asg[g] for g in gmap]
        eng = _Engine(levels[li - 1], cfg.p, fine_asg, comp_cap, mem_cap,
                      cfg.objective)
        eng.repair()
        cap_moves = None if levels[li - 1].n <= 20000 else max(
            4000, levels[li - 1].n // 8)
        eng.refine(cfg.refinement_passes, cap_moves)
        asg = eng.parts

    final = _Engine(levels[0], cfg.p, asg, comp_cap, mem_cap, cfg.objective)
    if not final.feasible():
        final.repair()
    if not final.feasible():
        raise BalanceError(
            "heuristic could not satisfy the balance tolerance "
            f"(epsilon={cfg.epsilon}, cap={comp_cap})")
    return Partition(cfg.p, tuple(final.parts))


def refine_fm(h: Hypergraph, partition: Partition,
              cfg: PartitionConfig) -> Partition:
    """Move-based local refinement of an existing partition.

    From a partition within tolerance the result never has a worse
    objective and stays within tolerance; from one outside tolerance the
    balance is repaired first, at whatever objective cost that takes.
    Deterministic: ties break on the lowest vertex index, then lowest part.
    """
    if cfg.p != partition.p:
        raise ConfigError(f"config p={cfg.p} but partition has p={partition.p}")
    if len(partition.parts) != len(h.vertices):
        raise ConfigError("partition does not cover the hypergraph")
    comp_cap = part_weight_cap(h.total_comp, cfg.p, cfg.epsilon)
    mem_cap = (part_weight_cap(h.total_mem, cfg.p, cfg.delta)
               if cfg.delta is not None else None)
    level = _Level.from_hypergraph(h)
    eng = _Engine(level, cfg.p, list(partition.parts), comp_cap, mem_cap,
                  cfg.objective)
    if not eng.feasible():
        eng.repair()
    eng.refine(cfg.refinement_passes)
    return Partition(cfg.p, tuple(eng.parts))


def partition_bruteforce(h: Hypergraph, cfg: PartitionConfig, *,
                         max_vertices: int = 16,
                         max_parts: int = 3) -> Partition:
    """Globally optimal balanced partition by exhaustive enumeration.

    All parts must be used.  Assignments are enumerated in canonical
    first-occurrence order (vertex 0 is always in part 0), so the optimum
    returned is deterministic.
    """
    n = len(h.vertices)
    if n > max_vertices:
        raise GuardError(f"{n} vertices exceed the oracle guard {max_vertices}")
    if cfg.p > max_parts:
        raise GuardError(f"p={cfg.p} exceeds the oracle guard {max_parts}")
    if cfg.p > n:
        raise BalanceError(f"p={cfg.p} exceeds the vertex count {n}")
    comp_cap, mem_cap = _feasibility_check(h, cfg)
    if cfg.p == 1:
        return Partition(1, (0,) * n)

    wc = [v.w_comp for v in h.vertices]
    wm = [v.w_mem for v in h.vertices]
    assignment = [0] * n
    part_wc = [0] * cfg.p
    part_wm = [0] * cfg.p
    best: tuple[int, tuple[int, ...]] | None = None

    def dfs(idx: int, used: int) -> None:
        nonlocal best
        if idx == n:
            if used < cfg.p:
                return
            obj = metrics.evaluate_objective(h, Partition(cfg.p, tuple(assignment)),
                                             cfg.objective)
            if best is None or obj < best[0]:
                best = (obj, tuple(assignment))
            return
        if used + (n - idx) < cfg.p:
            return  # not enough vertices left to populate every part
        limit = min(used + 1, cfg.p)
        for q in range(limit):
            if part_wc[q] + wc[idx] > comp_cap:
                continue
            if mem_cap is not None and part_wm[q] + wm[idx] > mem_cap:
                continue
            assignment[idx] = q
            part_wc[q] += wc[idx]
            part_wm[q] += wm[idx]
            dfs(idx + 1, max(used, q + 1))
            part_wc[q] -= wc[idx]
            part_wm[q] -= wm[idx]

    dfs(0, 0)
    if best is None:
        raise BalanceError("no balanced partition exists for this tolerance")
    return Partition(cfg.p, best[1])


# ---------------------------------------------------------------------------
# Geometric baselines for the stencil model problem.  Grid points linearize
# x-fastest (see sparse.grid_index); processor subcubes linearize the same
# way, so part = sx + c*sy + c*c*sz with c the cube root of p.
# ---------------------------------------------------------------------------

def _cube_root(p: int) -> int:
    c = round(p ** (1.0 / 3.0))
    for cand in (c - 1, c, c + 1):
        if cand > 0 and cand ** 3 == p:
            return cand
    raise ConfigError(f"p={p} is not a perfect cube")


def _subcube_part(idx: int, grid_n: int, side: int, c: int) -> int:
    x = idx % grid_n
    y = (idx // grid_n) % grid_n
    z = idx // (grid_n * grid_n)
    return (x // side) + c * (y // side) + c * c * (z // side)


def geometric_partition(h: Hypergraph, scheme: str, grid_n: int,
                        p: int) -> Partition:
    """Grid-based assignment of a stencil-problem model hypergraph.

    ``row``: the row-wise model of (stencil * prolongator); row vertex i and
    B-row vertex k go to the owner of the fine-grid subcube containing that
    grid point.  ``outer``: the outer-product model of the coarse triple
    product; work vertex k goes to the owner of the coarse subcube holding
    k's aggregate, output vertex (i, j) to the owner of coarse point i.
    """
    c = _cube_root(p)
    parts = []
    if scheme == "row":
        if grid_n % c != 0:
            raise ConfigError(f"cube side {c} does not divide N={grid_n}")
        side = grid_n // c
        for v in h.vertices:
            if v.label[:2] == ("coarse", "row"):
                parts.append(_subcube_part(v.label[2], grid_n, side, c))
            elif v.label[:2] == ("coarse", "nzBrow"):
                parts.append(_subcube_part(v.label[2], grid_n, side, c))
            else:
                raise ConfigError(
                    f"vertex {format_label(v.label)} does not belong to a "
                    f"row-wise model")
    elif scheme == "outer":
        if grid_n % 3 != 0:
            raise ConfigError(f"N={grid_n} is not divisible by 3")
        coarse_n = grid_n // 3
        if coarse_n % c != 0:
            raise ConfigError(
                f"cube side {c} does not divide the coarse grid {coarse_n}")
        side = coarse_n // c
        for v in h.vertices:
            if v.label[:2] == ("coarse", "k"):
                k = v.label[2]
                x = (k % grid_n) // 3
                y = ((k // grid_n) % grid_n) // 3
                z = (k // (grid_n * grid_n)) // 3
                agg = x + coarse_n * (y + coarse_n * z)
                parts.append(_subcube_part(agg, coarse_n, side, c))
            elif v.label[0] == "nzC":
                parts.append(_subcube_part(v.label[1], coarse_n, side, c))
            else:
                raise ConfigError(
                    f"vertex {format_label(v.label)} does not belong to an "
                    f"outer-product model")
    else:
        raise ConfigError(f"unknown geometric scheme {scheme!r}")
    return Partition(p, tuple(parts))
