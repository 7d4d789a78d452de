"""Acceptance suite: one test per criterion, one printed line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as the
criteria complete.  The slowest item is the grid-problem trend study
(criterion 8), which partitions a ~140k-vertex hypergraph five times.
"""

import functools
import math
import random
import statistics

from spgemmhg import (MAX_CUT, NonzeroStructure, Partition, PartitionConfig,
                      build_fine_grained, build_masked, build_restricted,
                      classify_parallelization, coarsen, comm_report,
                      cut_sets, evaluate_objective, gen_sa_prolongator,
                      gen_stencil27, geometric_partition,
                      partition_bruteforce, partition_multilevel,
                      restriction_map, sequential_lb, simulate_parallel,
                      simulate_sequential_blocked, symbolic_multiply,
                      transpose)
from spgemmhg.models import ModelSpec

from conftest import (SAMPLE_A_COORDS, SAMPLE_B_COORDS,
                      assert_isomorphic_by_labels, random_structure)


def criterion(number, title):
    def wrap(fn):
        @functools.wraps(fn)
        def run():
            try:
                fn()
            except BaseException:
                print(f"[criterion {number:2d}] FAIL  {title}")
                raise
            print(f"[criterion {number:2d}] PASS  {title}")
        return run
    return wrap


def _sample_pair():
    s_a = NonzeroStructure.from_coords(3, 4, SAMPLE_A_COORDS)
    s_b = NonzeroStructure.from_coords(4, 2, SAMPLE_B_COORDS)
    return s_a, s_b


def _instances_for_counts():
    """100 seeded instances with dimensions up to 12, stripped of empties."""
    rng = random.Random(1234)
    out = []
    while len(out) < 100:
        i = rng.randint(1, 12)
        k = rng.randint(1, 12)
        j = rng.randint(1, 12)
        density = rng.uniform(0.1, 0.5)
        s_a = random_structure(rng, i, k, density)
        s_b = random_structure(rng, k, j, density)
        from spgemmhg import strip_empty
        s_a, s_b, _, _ = strip_empty(s_a, s_b)
        if s_a.nnz and s_b.nnz:
            out.append((s_a, s_b))
    return out


# ---------------------------------------------------------------------------
# 1. structural check of the worked example
# ---------------------------------------------------------------------------

@criterion(1, "full model of the worked example: 20/14/32 and exact pins")
def test_c01_full_model_structure():
    s_a, s_b = _sample_pair()
    h = build_fine_grained(s_a, s_b)
    assert (len(h.vertices), len(h.nets), h.n_pins) == (20, 14, 32)

    expected_pins = {
        ("A", 0, 0): [("m", 0, 0, 1), ("nzA", 0, 0)],
        ("A", 0, 2): [("m", 0, 2, 0), ("m", 0, 2, 1), ("nzA", 0, 2)],
        ("A", 1, 0): [("m", 1, 0, 1), ("nzA", 1, 0)],
        ("A", 1, 3): [("m", 1, 3, 1), ("nzA", 1, 3)],
        ("A", 2, 1): [("m", 2, 1, 0), ("nzA", 2, 1)],
        ("B", 0, 1): [("m", 0, 0, 1), ("m", 1, 0, 1), ("nzB", 0, 1)],
        ("B", 1, 0): [("m", 2, 1, 0), ("nzB", 1, 0)],
        ("B", 2, 0): [("m", 0, 2, 0), ("nzB", 2, 0)],
        ("B", 2, 1): [("m", 0, 2, 1), ("nzB", 2, 1)],
        ("B", 3, 1): [("m", 1, 3, 1), ("nzB", 3, 1)],
        ("C", 0, 0): [("m", 0, 2, 0), ("nzC", 0, 0)],
        ("C", 0, 1): [("m", 0, 0, 1), ("m", 0, 2, 1), ("nzC", 0, 1)],
        ("C", 1, 1): [("m", 1, 0, 1), ("m", 1, 3, 1), ("nzC", 1, 1)],
        ("C", 2, 0): [("m", 2, 1, 0), ("nzC", 2, 0)],
    }
    actual = {net.label: [h.vertices[p].label for p in net.pins]
              for net in h.nets}
    assert actual == expected_pins
    assert all(net.cost == 1 for net in h.nets)


# ---------------------------------------------------------------------------
# 2. closed-form vertex and net counts of the coarsened models
# ---------------------------------------------------------------------------

@criterion(2, "model size formulas hold on 100 random instances")
def test_c02_count_formulas():
    for s_a, s_b in _instances_for_counts():
        s_c, _ = symbolic_multiply(s_a, s_b)
        i, k, j = s_a.n_rows, s_a.n_cols, s_b.n_cols
        expected = {
            "row": (i + k, k),
            "col": (j + k, k),
            "outer": (k + s_c.nnz, s_c.nnz),
            "mono-a": (s_a.nnz + k + s_c.nnz, k + s_c.nnz),
            "mono-b": (s_b.nnz + k + s_c.nnz, k + s_c.nnz),
            "mono-c": (s_c.nnz + s_a.nnz + s_b.nnz, s_a.nnz + s_b.nnz),
        }
        for kind, (nv, nn) in expected.items():
            h = build_restricted(s_a, s_b, ModelSpec(kind))
            assert (len(h.vertices), len(h.nets)) == (nv, nn), kind


# ---------------------------------------------------------------------------
# 3. coarsening the full model reproduces every restricted builder
# ---------------------------------------------------------------------------

@criterion(3, "restricted builders equal coarsened full models (100 instances)")
def test_c03_coarsening_equivalence():
    kinds = ("row", "col", "outer", "mono-a", "mono-b", "mono-c")
    for s_a, s_b in _instances_for_counts():
        fine = build_fine_grained(s_a, s_b)
        for kind in kinds:
            built = build_restricted(s_a, s_b, ModelSpec(kind))
            grouped = coarsen(fine, restriction_map(fine, kind))
            assert_isomorphic_by_labels(built, grouped)


# ---------------------------------------------------------------------------
# 4. classifier: thirteen named constructions plus the outer-flag identity
# ---------------------------------------------------------------------------

def _mult_triples(s_a, s_b):
    return symbolic_multiply(s_a, s_b)[1]


@criterion(4, "13 named assignments classify correctly; U = A and B (1000x)")
def test_c04_classification_families():
    dense = NonzeroStructure.from_coords(2, 2, [(0, 0), (0, 1), (1, 0), (1, 1)])
    diag = NonzeroStructure.from_coords(2, 2, [(0, 0), (1, 1)])
    blk_a = NonzeroStructure.from_coords(2, 4, [(0, 0), (0, 2), (1, 1), (1, 3)])
    blk_b = NonzeroStructure.from_coords(4, 2, [(0, 0), (1, 0), (2, 1), (3, 1)])

    finest = lambda t: t
    by_ik = lambda t: (t[0], t[1])
    by_kj = lambda t: (t[1], t[2])
    by_ij = lambda t: (t[0], t[2])
    by_i = lambda t: t[0]
    by_k = lambda t: t[1]
    by_j = lambda t: t[2]
    coarsest = lambda t: 0

    cases = [
        (dense, dense, finest, ""),
        (dense, dense, by_ik, "A"),
        (dense, dense, by_kj, "B"),
        (dense, dense, by_ij, "C"),
        (dense, dense, by_j, "BCL"),
        (dense, dense, by_i, "ACR"),
        (dense, dense, by_k, "ABU"),
        (dense, dense, coarsest, "ABCRLU"),
        (diag, dense, finest, "BC"),
        (diag, dense, by_ik, "ABCRU"),
        (dense, diag, finest, "AC"),
        (dense, diag, by_kj, "ABCLU"),
        (blk_a, blk_b, finest, "ABCU"),
    ]
    for s_a, s_b, grouping, expected in cases:
        m = _mult_triples(s_a, s_b)
        flags = classify_parallelization(m, {t: grouping(t) for t in m.triples})
        assert flags == frozenset(expected), (expected, sorted(flags))

    rng = random.Random(4321)
    checked = 0
    while checked < 1000:
        s_a = random_structure(rng, rng.randint(1, 4), rng.randint(1, 4), 0.5)
        s_b = random_structure(rng, s_a.n_cols, rng.randint(1, 4), 0.5)
        m = _mult_triples(s_a, s_b)
        if not m.count:
            continue
        checked += 1
        p = rng.randint(1, 4)
        flags = classify_parallelization(
            m, {t: rng.randrange(p) for t in m.triples})
        assert ("U" in flags) == ("A" in flags and "B" in flags)


# ---------------------------------------------------------------------------
# 5. the schedule simulator sits between the cut bounds
# ---------------------------------------------------------------------------

@criterion(5, "per-processor words within [|Q_i|, 3*cost(Q_i)] on 200 cases")
def test_c05_parallel_bounds():
    rng = random.Random(555)
    cases = 0
    while cases < 200:
        i = rng.randint(1, 8)
        k = rng.randint(1, 8)
        j = rng.randint(1, 8)
        s_a = random_structure(rng, i, k, 0.4)
        s_b = random_structure(rng, k, j, 0.4)
        from spgemmhg import strip_empty
        s_a, s_b, _, _ = strip_empty(s_a, s_b)
        if not (s_a.nnz and s_b.nnz):
            continue
        cases += 1
        h = build_fine_grained(s_a, s_b)
        p = rng.randint(1, 8)
        part = Partition(p, tuple(rng.randrange(p)
                                  for _ in range(len(h.vertices))))
        trace = simulate_parallel(s_a, s_b, part)
        q = cut_sets(h, part)
        for proc in range(p):
            moved = trace.per_proc_sends[proc] + trace.per_proc_recvs[proc]
            cost = sum(h.nets[nid].cost for nid in q[proc])
            assert len(q[proc]) <= moved <= 3 * cost
        if p > 1:
            assert trace.steps <= 2 * (math.ceil(math.log2(p)) + 1)
        else:
            assert trace.steps == 0


# ---------------------------------------------------------------------------
# 6. two-level-memory bounds
# ---------------------------------------------------------------------------

@criterion(6, "M(h-1) <= blocked traffic <= 4*floor(M/3)*g for M in {3,4,6}")
def test_c06_sequential_bounds():
    rng = random.Random(666)
    instances = []
    while len(instances) < 15:
        s_a = random_structure(rng, rng.randint(1, 3), rng.randint(1, 3), 0.6)
        s_b = random_structure(rng, s_a.n_cols, rng.randint(1, 3), 0.6)
        from spgemmhg import strip_empty
        s_a, s_b, _, _ = strip_empty(s_a, s_b)
        if not (s_a.nnz and s_b.nnz):
            continue
        s_c, mults = symbolic_multiply(s_a, s_b)
        if mults.count + s_a.nnz + s_b.nnz + s_c.nnz > 14:
            continue
        instances.append((s_a, s_b))
    for s_a, s_b in instances:
        h = build_fine_grained(s_a, s_b)
        n = len(h.vertices)
        for m_words in (3, 4, 6):
            h_parts, bound = sequential_lb(s_a, s_b, m_words)
            assert h_parts >= 1 and bound == m_words * (h_parts - 1)
            trial_partitions = [Partition(1, (0,) * n)]
            for _ in range(5):
                p = rng.randint(1, 4)
                trial_partitions.append(
                    Partition(p, tuple(rng.randrange(p) for _ in range(n))))
            for part in trial_partitions:
                io = simulate_sequential_blocked(s_a, s_b, part, m_words)
                assert bound <= io.loads + io.stores
                assert io.loads + io.stores <= 4 * (m_words // 3) * io.block_count


# ---------------------------------------------------------------------------
# 7. heuristic quality against the exhaustive oracle
# ---------------------------------------------------------------------------

@criterion(7, "multilevel within 2x of the exhaustive optimum (50 instances)")
def test_c07_oracle_quality_gate():
    # epsilon 0.5 keeps every instance feasible at p=2 without letting the
    # whole graph collapse onto one part
    rng = random.Random(777)
    cases = 0
    while cases < 50:
        i = rng.randint(2, 5)
        k = rng.randint(1, 4)
        j = rng.randint(1, 5)
        s_a = random_structure(rng, i, k, 0.5)
        s_b = random_structure(rng, k, j, 0.5)
        from spgemmhg import strip_empty
        s_a, s_b, _, _ = strip_empty(s_a, s_b)
        if not (s_a.nnz and s_b.nnz):
            continue
        h = build_fine_grained(s_a, s_b, with_data_vertices=False)
        if not 2 <= len(h.vertices) <= 12:
            continue
        cases += 1
        cfg = PartitionConfig(p=2, epsilon=0.5, objective=MAX_CUT, seed=cases)
        optimum = evaluate_objective(
            h, partition_bruteforce(h, cfg), MAX_CUT)
        achieved = evaluate_objective(
            h, partition_multilevel(h, cfg), MAX_CUT)
        assert achieved <= 2 * optimum, (achieved, optimum)


# ---------------------------------------------------------------------------
# 8. grid-problem trends at desk scale
# ---------------------------------------------------------------------------

@criterion(8, "N=12, p=8 trends: outer <= row on the coarse product; "
              "row <= 2x fine on the first product")
def test_c08_amg_trends():
    n = 12
    seeds = range(5)
    stencil = gen_stencil27(n)
    prolong = gen_sa_prolongator(n)
    ap, _ = symbolic_multiply(stencil, prolong)
    pt = transpose(prolong)

    def median_cut(h):
        cuts = []
        for seed in seeds:
            cfg = PartitionConfig(p=8, epsilon=0.01, seed=seed)
            part = partition_multilevel(h, cfg)
            cuts.append(comm_report(h, part).max_cut_cost)
        return statistics.median(cuts)

    lean = dict(with_data_vertices=False)
    fine_ap = median_cut(build_fine_grained(stencil, prolong, False))
    row_ap = median_cut(build_restricted(stencil, prolong,
                                         ModelSpec("row", **lean)))
    row_ptap = median_cut(build_restricted(pt, ap, ModelSpec("row", **lean)))
    outer_ptap = median_cut(build_restricted(pt, ap,
                                             ModelSpec("outer", **lean)))
    print(f"    medians: fine(AP)={fine_ap} row(AP)={row_ap} "
          f"row(PtAP)={row_ptap} outer(PtAP)={outer_ptap}")
    assert outer_ptap <= row_ptap
    assert row_ap <= 2 * fine_ap


# ---------------------------------------------------------------------------
# 9. geometric baseline agrees with direct grid enumeration
# ---------------------------------------------------------------------------

@criterion(9, "grid-based row partition balanced and recounted exactly (N=6)")
def test_c09_geometric_baseline():
    n, p, c = 6, 8, 2
    side = n // c
    stencil = gen_stencil27(n)
    prolong = gen_sa_prolongator(n)
    h = build_restricted(stencil, prolong, ModelSpec("row"))
    part = geometric_partition(h, "row", n, p)
    rep = comm_report(h, part)
    assert rep.achieved_epsilon == 0.0

    def owner(x, y, z):
        return (x // side) + c * (y // side) + c * c * (z // side)

    per = [0] * p
    for z in range(n):
        for y in range(n):
            for x in range(n):
                nbrs = [(xx, yy, zz)
                        for zz in range(max(0, z - 1), min(n, z + 2))
                        for yy in range(max(0, y - 1), min(n, y + 2))
                        for xx in range(max(0, x - 1), min(n, x + 2))]
                owners = {owner(*q) for q in nbrs}
                if len(owners) > 1:
                    cost = len({(xx // 3, yy // 3, zz // 3)
                                for xx, yy, zz in nbrs})
                    for q in owners:
                        per[q] += cost
    assert rep.per_part_cut_cost == tuple(per)
    assert rep.max_cut_cost == max(per)


# ---------------------------------------------------------------------------
# 10. masking with the full output equals the unmasked model
# ---------------------------------------------------------------------------

@criterion(10, "mask covering the whole output is the identity (50 instances)")
def test_c10_masked_identity():
    rng = random.Random(1010)
    cases = 0
    while cases < 50:
        i = rng.randint(1, 6)
        k = rng.randint(1, 6)
        j = rng.randint(1, 6)
        s_a = random_structure(rng, i, k, 0.4)
        s_b = random_structure(rng, k, j, 0.4)
        from spgemmhg import strip_empty
        s_a, s_b, _, _ = strip_empty(s_a, s_b)
        if not (s_a.nnz and s_b.nnz):
            continue
        cases += 1
        s_c, _ = symbolic_multiply(s_a, s_b)
        assert build_masked(s_a, s_b, s_c) == build_fine_grained(s_a, s_b)
