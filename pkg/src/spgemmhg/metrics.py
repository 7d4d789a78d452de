"""Cut evaluation, balance measurement, schedule/I-O simulators, and the
two-level-memory lower-bound search."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, GuardError
from .hypergraph import Hypergraph, Partition
from .models import build_fine_grained, require_no_empty
from .sparse import NonzeroStructure, symbolic_multiply

CONNECTIVITY = "connectivity"
MAX_CUT = "max-cut"
OBJECTIVES = (CONNECTIVITY, MAX_CUT)


def _check_partition(h: Hypergraph, partition: Partition) -> None:
    if len(partition.parts) != len(h.vertices):
        raise ValueError(
            f"partition covers {len(partition.parts)} vertices, "
            f"hypergraph has {len(h.vertices)}")


def cut_sets(h: Hypergraph, partition: Partition) -> list[list[int]]:
    """Per part, the net indices with a pin inside and a pin outside it."""
    _check_partition(h, partition)
    parts = partition.parts
    out: list[list[int]] = [[] for _ in range(partition.p)]
    for nid, net in enumerate(h.nets):
        incident = {parts[p] for p in net.pins}
        if len(incident) < 2:
            continue
        for q in sorted(incident):
            out[q].append(nid)
    return out


@dataclass(frozen=True)
class CommReport:
    """Communication and balance summary of one partition."""

    per_part_cut_cost: tuple[int, ...]
    max_cut_cost: int
    connectivity_total: int
    achieved_epsilon: float
    achieved_delta: float


def comm_report(h: Hypergraph, partition: Partition) -> CommReport:
    _check_partition(h, partition)
    parts = partition.parts
    p = partition.p
    per_part = [0] * p
    conn = 0
    for net in h.nets:
        incident = {parts[pin] for pin in net.pins}
        if len(incident) < 2:
            continue
        conn += net.cost * (len(incident) - 1)
        for q in incident:
            per_part[q] += net.cost

    wc = [0] * p
    wm = [0] * p
    for vid, v in enumerate(h.vertices):
        wc[parts[vid]] += v.w_comp
        wm[parts[vid]] += v.w_mem
    eps = (max(wc) * p / h.total_comp - 1.0) if h.total_comp > 0 else 0.0
    # with no memory-weighted vertices there is nothing to balance
    delta = (max(wm) * p / h.total_mem - 1.0) if h.total_mem > 0 else math.inf
    return CommReport(tuple(per_part), max(per_part) if per_part else 0,
                      conn, eps, delta)


def evaluate_objective(h: Hypergraph, partition: Partition,
                       objective: str) -> int:
    report = comm_report(h, partition)
    if objective == CONNECTIVITY:
        return report.connectivity_total
    if objective == MAX_CUT:
        return report.max_cut_cost
    raise ConfigError(f"unknown objective {objective!r}")


# ---------------------------------------------------------------------------
# Parallel schedule simulator: synchronized binary-tree broadcasts of input
# nonzeros whose nets are cut, then binary-tree reductions of output partial
# sums.  Tree shape is fixed for determinism: participants sorted by part
# index, owner first, complete binary layering (children of slot q sit at
# 2q+1 and 2q+2); every tree edge moves one word.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScheduleTrace:
    per_proc_sends: tuple[int, ...]
    per_proc_recvs: tuple[int, ...]
    steps: int
    expand_steps: int
    fold_steps: int
    expand_words: int
    fold_words: int


def simulate_parallel(s_a: NonzeroStructure, s_b: NonzeroStructure,
                      partition: Partition) -> ScheduleTrace:
    """Run the attaining schedule for a partition of the full model (data
    vertices included; the partition indexes ``build_fine_grained`` order)."""
    h = build_fine_grained(s_a, s_b, with_data_vertices=True)
    _check_partition(h, partition)
    parts = partition.parts
    p = partition.p
    sends = [0] * p
    recvs = [0] * p
    expand_steps = fold_steps = 0
    expand_words = fold_words = 0
    for net in h.nets:
        owner = parts[net.pins[-1]]  # builder keeps the nonzero vertex last
        incident = {parts[pin] for pin in net.pins}
        if len(incident) < 2:
            continue
        order = [owner] + sorted(q for q in incident if q != owner)
        depth = len(order).bit_length() - 1
        is_fold = net.label[0] == "C"
        for slot in range(1, len(order)):
            parent = order[(slot - 1) // 2]
            child = order[slot]
            if is_fold:
                sends[child] += 1
                recvs[parent] += 1
            else:
                sends[parent] += 1
                recvs[child] += 1
        if is_fold:
            fold_steps = max(fold_steps, depth)
            fold_words += len(order) - 1
        else:
            expand_steps = max(expand_steps, depth)
            expand_words += len(order) - 1
    return ScheduleTrace(tuple(sends), tuple(recvs),
                         expand_steps + fold_steps, expand_steps, fold_steps,
                         expand_words, fold_words)


# ---------------------------------------------------------------------------
# Two-level-memory blocked simulator.  Each part's touched input/output nets
# are split into chunks of m = floor(M/3); each (A-chunk, B-chunk, C-chunk)
# combination is one block: load both input chunks plus any previously
# written partials of the C chunk, multiply, store the C entries updated.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IoTrace:
    loads: int
    stores: int
    block_count: int
    fast_memory: int


def simulate_sequential_blocked(s_a: NonzeroStructure, s_b: NonzeroStructure,
                                partition: Partition,
                                m_words: int) -> IoTrace:
    if m_words < 3:
        raise ConfigError("fast memory must hold at least 3 words")
    h = build_fine_grained(s_a, s_b, with_data_vertices=True)
    _check_partition(h, partition)
    parts = partition.parts
    chunk = m_words // 3

    net_kind = [net.label[0] for net in h.nets]
    vnets: list[list[int]] = [[] for _ in h.vertices]
    for nid, net in enumerate(h.nets):
        for pin in net.pins:
            vnets[pin].append(nid)

    touched: list[dict[str, set[int]]] = [
        {"A": set(), "B": set(), "C": set()} for _ in range(partition.p)]
    part_mults: list[list[int]] = [[] for _ in range(partition.p)]
    for vid, v in enumerate(h.vertices):
        q = parts[vid]
        for nid in vnets[vid]:
            touched[q][net_kind[nid]].add(nid)
        if v.label[0] == "m":
            part_mults[q].append(vid)

    loads = stores = blocks = 0
    updated: set[int] = set()
    for q in range(partition.p):
        if not part_mults[q]:
            continue
        w_a = sorted(touched[q]["A"])
        w_b = sorted(touched[q]["B"])
        w_c = sorted(touched[q]["C"])
        chunks_a = [w_a[x:x + chunk] for x in range(0, len(w_a), chunk)]
        chunks_b = [w_b[x:x + chunk] for x in range(0, len(w_b), chunk)]
        chunks_c = [w_c[x:x + chunk] for x in range(0, len(w_c), chunk)]
        pos_a = {nid: x // chunk for x, nid in enumerate(w_a)}
        pos_b = {nid: x // chunk for x, nid in enumerate(w_b)}
        pos_c = {nid: x // chunk for x, nid in enumerate(w_c)}
        block_updates: dict[tuple[int, int, int], set[int]] = {}
        for vid in part_mults[q]:
            a_nid, b_nid, c_nid = vnets[vid]  # net ids ascend: A block, B, C
            key = (pos_a[a_nid], pos_b[b_nid], pos_c[c_nid])
            block_updates.setdefault(key, set()).add(c_nid)
        for ca in range(len(chunks_a)):
            for cb in range(len(chunks_b)):
                for cc in range(len(chunks_c)):
                    blocks += 1
                    loads += len(chunks_a[ca]) + len(chunks_b[cb])
                    loads += sum(1 for nid in chunks_c[cc] if nid in updated)
                    ups = block_updates.get((ca, cb, cc), ())
                    stores += len(ups)
                    updated.update(ups)
    return IoTrace(loads, stores, blocks, m_words)


# ---------------------------------------------------------------------------
# Sequential lower bound: the smallest number of parts h such that the full
# model's vertices split into parts each touching at most 2M input-A nets,
# input-B nets, and output nets.  Any execution then moves at least M(h-1)
# words.  Nonzero vertices can always join a part that already touches their
# net without enlarging anything, so the search ranges over multiplication
# vertices only.
# ---------------------------------------------------------------------------

def sequential_lb(s_a: NonzeroStructure, s_b: NonzeroStructure, m_words: int,
                  *, max_vertices: int = 14) -> tuple[int, int]:
    if m_words < 3:
        raise ConfigError("fast memory must hold at least 3 words")
    s_c, mult_set = symbolic_multiply(s_a, s_b)
    cap = 2 * m_words
    if s_a.nnz <= cap and s_b.nnz <= cap and s_c.nnz <= cap:
        return 1, 0

    # past the one-part case every net must be touched by a multiplication,
    # otherwise its nonzero vertex would consume capacity the search ignores
    require_no_empty(s_a, s_b)
    n_vertices = mult_set.count + s_a.nnz + s_b.nnz + s_c.nnz
    if n_vertices > max_vertices:
        raise GuardError(
            f"instance has {n_vertices} vertices, brute-force guard is "
            f"{max_vertices}")

    a_bit = {coord: 1 << pos for pos, coord in enumerate(s_a.coords())}
    b_bit = {coord: 1 << pos for pos, coord in enumerate(s_b.coords())}
    c_bit = {coord: 1 << pos for pos, coord in enumerate(s_c.coords())}
    masks = [(a_bit[(i, k)], b_bit[(k, j)], c_bit[(i, j)])
             for i, k, j in mult_set.triples]
    n = len(masks)
    # a part whose three projections are capped holds at most cap^(3/2) points
    max_per_part = math.isqrt(cap ** 3)
    lower = max(
        2,
        -(-s_a.nnz // cap), -(-s_b.nnz // cap), -(-s_c.nnz // cap),
        -(-n // max_per_part),
    )

    def feasible(h: int) -> bool:
        parts: list[list[int]] = []  # [maskA, maskB, maskC, count]
        memo: set = set()

        def dfs(idx: int) -> bool:
            if idx == n:
                return True
            room = sum(max_per_part - part[3] for part in parts)
            room += (h - len(parts)) * max_per_part
            if room < n - idx:
                return False
            state = (idx, tuple(sorted((pa, pb, pc)
                                       for pa, pb, pc, _ in parts)))
            if state in memo:
                return False
            va, vb, vc = masks[idx]
            for part in parts:
                if part[3] >= max_per_part:
                    continue
                na, nb, nc = part[0] | va, part[1] | vb, part[2] | vc
                if (na.bit_count() <= cap and nb.bit_count() <= cap
                        and nc.bit_count() <= cap):
                    old = part[:]
                    part[0], part[1], part[2], part[3] = na, nb, nc, part[3] + 1
                    if dfs(idx + 1):
                        return True
                    part[0], part[1], part[2], part[3] = old
            if len(parts) < h:
                parts.append([va, vb, vc, 1])
                if dfs(idx + 1):
                    return True
                parts.pop()
            memo.add(state)
            return False

        return dfs(0)

    for h in range(lower, n + 1):
        if feasible(h):
            return h, m_words * (h - 1)
    return n, m_words * (n - 1)
