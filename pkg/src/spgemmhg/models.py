"""Hypergraph models of sparse matrix-multiplication work and data placement.

The full model has one vertex per scalar multiplication (i, k, j) plus,
optionally, one vertex per stored nonzero of A, B, and C; every nonzero
also contributes a net connecting it to the multiplications that touch it.
Cutting a net under a vertex partition means communicating that nonzero.

Coarsened variants force groups of vertices onto one processor and are all
derivable from the full model with :func:`coarsen`; the common ones
(row-wise, column-wise, outer-product, and the three monochrome models that
pin each multiplication group to one matrix entry) have direct builders.
Every builder determines the output structure up front, which can cost as
much as performing the multiplication itself; amortize over repeated
products with the same structure.

Label conventions: multiplication vertices ``("m", i, k, j)``, nonzero
vertices ``("nzA", i, k)`` / ``("nzB", k, j)`` / ``("nzC", i, j)``, grouped
vertices ``("coarse", tag, *indices)``.  Nets are ``("A", i, k)``,
``("B", k, j)``, ``("C", i, j)``, with ``("Brow", k)`` / ``("Acol", k)``
for nets merged along a row of B or a column of A, and ``("row", i)`` /
``("col", k)`` in the matrix-vector model.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError, DimensionError, MaskError
from .hypergraph import Hypergraph, Label, Net, Vertex
from .sparse import (MultTripleSet, NonzeroStructure, symbolic_output,
                     transpose)

MODEL_KINDS = ("fine", "row", "col", "outer", "mono-a", "mono-b", "mono-c",
               "spmv", "masked")

RESTRICTED_KINDS = ("row", "col", "outer", "mono-a", "mono-b", "mono-c")


@dataclass(frozen=True)
class ModelSpec:
    """Which hypergraph model to build, plus build flags."""

    kind: str
    with_data_vertices: bool = True
    mask: NonzeroStructure | None = None

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f"unknown model {self.kind!r}")
        if self.kind == "masked" and self.mask is None:
            raise ConfigError("masked model needs a mask structure")


def require_no_empty(s_a: NonzeroStructure, s_b: NonzeroStructure) -> None:
    """Builders assume no zero rows/columns; see :func:`sparse.strip_empty`."""
    if s_a.n_cols != s_b.n_rows:
        raise DimensionError(
            f"inner dimensions differ: {s_a.n_cols} vs {s_b.n_rows}")
    for i, row in enumerate(s_a.rows):
        if not row:
            raise DimensionError(f"row {i} of A is empty; strip_empty first")
    for k, count in enumerate(s_a.col_counts):
        if count == 0:
            raise DimensionError(f"column {k} of A is empty; strip_empty first")
    for k, row in enumerate(s_b.rows):
        if not row:
            raise DimensionError(f"row {k} of B is empty; strip_empty first")
    for j, count in enumerate(s_b.col_counts):
        if count == 0:
            raise DimensionError(f"column {j} of B is empty; strip_empty first")


def build_fine_grained(s_a: NonzeroStructure, s_b: NonzeroStructure,
                       with_data_vertices: bool = True) -> Hypergraph:
    """Full model: a unit-work vertex per multiplication, a unit-cost net per
    nonzero, and (optionally) a unit-memory vertex per nonzero.

    Pin order within a net is multiplication vertices in index order with the
    nonzero vertex last; several consumers rely on that.
    """
    require_no_empty(s_a, s_b)
    s_c = symbolic_output(s_a, s_b)

    vertices: list[Vertex] = []
    a_net_range: dict[tuple[int, int], tuple[int, int]] = {}
    b_net_pins: dict[tuple[int, int], list[int]] = {}
    c_net_pins: dict[tuple[int, int], list[int]] = {}
    for i, a_row in enumerate(s_a.rows):
        for k in a_row:
            base = len(vertices)
            for j in s_b.rows[k]:
                vid = len(vertices)
                vertices.append(Vertex(("m", i, k, j), 1, 0))
                b_net_pins.setdefault((k, j), []).append(vid)
                c_net_pins.setdefault((i, j), []).append(vid)
            a_net_range[(i, k)] = (base, len(vertices))

    nz_ids: dict[Label, int] = {}
    if with_data_vertices:
        for i, k in s_a.coords():
            nz_ids[("nzA", i, k)] = len(vertices)
            vertices.append(Vertex(("nzA", i, k), 0, 1))
        for k, j in s_b.coords():
            nz_ids[("nzB", k, j)] = len(vertices)
            vertices.append(Vertex(("nzB", k, j), 0, 1))
        for i, j in s_c.coords():
            nz_ids[("nzC", i, j)] = len(vertices)
            vertices.append(Vertex(("nzC", i, j), 0, 1))

    nets: list[Net] = []
    for i, k in s_a.coords():
        lo, hi = a_net_range[(i, k)]
        pins = list(range(lo, hi))
        if with_data_vertices:
            pins.append(nz_ids[("nzA", i, k)])
        nets.append(Net(("A", i, k), 1, tuple(pins)))
    for k, j in s_b.coords():
        pins = list(b_net_pins[(k, j)])
        if with_data_vertices:
            pins.append(nz_ids[("nzB", k, j)])
        nets.append(Net(("B", k, j), 1, tuple(pins)))
    for i, j in s_c.coords():
        pins = list(c_net_pins[(i, j)])
        if with_data_vertices:
            pins.append(nz_ids[("nzC", i, j)])
        nets.append(Net(("C", i, j), 1, tuple(pins)))
    return Hypergraph.build(vertices, nets)


@dataclass(frozen=True)
class CoarseningMap:
    """A partition of a hypergraph's vertices into groups, one coarse vertex
    per group.  ``labels[g]`` names group g; ``None`` keeps the original
    label for singleton groups and falls back to ``("coarse", "g", g)``."""

    groups: tuple[tuple[int, ...], ...]
    labels: tuple[Label | None, ...] | None = None


def coarsen(h: Hypergraph, cmap: CoarseningMap,
            weight_rule: str = "sum",
            cost_rule: str = "sum-coalesced") -> Hypergraph:
    """Merge vertex groups: weights add componentwise, a coarse vertex joins
    every net a constituent was in, nets with identical pin sets merge with
    summed costs, and single-pin nets (never cuttable) are dropped."""
    if weight_rule != "sum":
        raise ConfigError(f"unsupported weight rule {weight_rule!r}")
    if cost_rule != "sum-coalesced":
        raise ConfigError(f"unsupported cost rule {cost_rule!r}")

    n = len(h.vertices)
    gmap = [-1] * n
    for g, group in enumerate(cmap.groups):
        for v in group:
            if not 0 <= v < n:
                raise ValueError(f"group {g} references vertex {v} out of range")
            if gmap[v] != -1:
                raise ValueError(f"vertex {v} appears in two groups")
            gmap[v] = g
    if any(g == -1 for g in gmap):
        missing = gmap.index(-1)
        raise ValueError(f"vertex {missing} not covered by the coarsening map")

    vertices = []
    for g, group in enumerate(cmap.groups):
        label = cmap.labels[g] if cmap.labels is not None else None
        if label is None:
            if len(group) == 1:
                label = h.vertices[group[0]].label
            else:
                label = ("coarse", "g", g)
        vertices.append(Vertex(label,
                               sum(h.vertices[v].w_comp for v in group),
                               sum(h.vertices[v].w_mem for v in group)))

    merged: dict[tuple[int, ...], int] = {}
    nets: list[Net] = []
    for net in h.nets:
        seen: set[int] = set()
        pins = []
        for pin in net.pins:
            g = gmap[pin]
            if g not in seen:
                seen.add(g)
                pins.append(g)
        if len(pins) < 2:
            continue
        key = tuple(sorted(pins))
        pos = merged.get(key)
        if pos is None:
            merged[key] = len(nets)
            nets.append(Net(net.label, net.cost, tuple(pins)))
        else:
            old = nets[pos]
            nets[pos] = Net(old.label, old.cost + net.cost, old.pins)
    return Hypergraph.build(vertices, nets)


def restriction_map(fine: Hypergraph, kind: str) -> CoarseningMap:
    """The vertex grouping that turns the full model into a restricted one.

    Applying :func:`coarsen` with this map reproduces the corresponding
    direct builder up to net labels and ordering.
    """
    if kind not in RESTRICTED_KINDS:
        raise ConfigError(f"no restriction map for model {kind!r}")
    groups: dict[tuple, list[int]] = {}
    order: list[tuple] = []

    def put(key, vid):
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(vid)

    for vid, v in enumerate(fine.vertices):
        tag = v.label[0]
        if tag == "m":
            _, i, k, j = v.label
            key = {"row": ("comp", i), "col": ("comp", j), "outer": ("comp", k),
                   "mono-a": ("comp", i, k), "mono-b": ("comp", k, j),
                   "mono-c": ("comp", i, j)}[kind]
        elif tag == "nzA":
            _, i, k = v.label
            if kind in ("row",):
                key = ("comp", i)
            elif kind in ("outer",):
                key = ("comp", k)
            elif kind == "mono-a":
                key = ("comp", i, k)
            elif kind in ("col", "mono-b"):
                key = ("acol", k)
            else:
                key = ("single", vid)
        elif tag == "nzB":
            _, k, j = v.label
            if kind == "col":
                key = ("comp", j)
            elif kind == "outer":
                key = ("comp", k)
            elif kind == "mono-b":
                key = ("comp", k, j)
            elif kind in ("row", "mono-a"):
                key = ("brow", k)
            else:
                key = ("single", vid)
        elif tag == "nzC":
            _, i, j = v.label
            if kind == "row":
                key = ("comp", i)
            elif kind == "col":
                key = ("comp", j)
            elif kind == "mono-c":
                key = ("comp", i, j)
            else:
                key = ("single", vid)
        else:
            raise ConfigError("restriction maps apply to the full model only")
        put(key, vid)

    comp_tag = {"row": "row", "col": "col", "outer": "k",
                "mono-a": "A", "mono-b": "B", "mono-c": "C"}[kind]
    labels: list[Label | None] = []
    for key in order:
        if key[0] == "comp":
            labels.append(("coarse", comp_tag) + key[1:])
        elif key[0] == "brow":
            labels.append(("coarse", "nzBrow", key[1]))
        elif key[0] == "acol":
            labels.append(("coarse", "nzAcol", key[1]))
        else:
            labels.append(None)
    return CoarseningMap(tuple(tuple(groups[k]) for k in order), tuple(labels))


# ---------------------------------------------------------------------------
# Direct builders for the restricted models.
# ---------------------------------------------------------------------------

def _a_columns(s_a: NonzeroStructure) -> list[list[int]]:
    cols: list[list[int]] = [[] for _ in range(s_a.n_cols)]
    for i, row in enumerate(s_a.rows):
        for k in row:
            cols[k].append(i)
    return cols


def _finish(vertices, nets, with_data, data_ids):
    """Drop data pins (and then-singleton nets) when data vertices are off."""
    if with_data:
        return Hypergraph.build(vertices, nets)
    kept_nets = []
    for net in nets:
        pins = tuple(p for p in net.pins if p not in data_ids)
        if len(pins) >= 2:
            kept_nets.append(Net(net.label, net.cost, pins))
    kept_ids = [vid for vid in range(len(vertices)) if vid not in data_ids]
    remap = {vid: pos for pos, vid in enumerate(kept_ids)}
    out_vertices = [vertices[vid] for vid in kept_ids]
    out_nets = [Net(n.label, n.cost, tuple(remap[p] for p in n.pins))
                for n in kept_nets]
    return Hypergraph.build(out_vertices, out_nets)


def _build_row_wise(s_a, s_b, with_data):
    s_c = symbolic_output(s_a, s_b)
    cols_a = _a_columns(s_a)
    vertices = []
    for i, a_row in enumerate(s_a.rows):
        w_comp = sum(len(s_b.rows[k]) for k in a_row)
        w_mem = len(a_row) + len(s_c.rows[i])
        vertices.append(Vertex(("coarse", "row", i), w_comp, w_mem))
    data_ids = set()
    for k in range(s_b.n_rows):
        data_ids.add(len(vertices))
        vertices.append(Vertex(("coarse", "nzBrow", k), 0, len(s_b.rows[k])))
    nets = []
    n_rows_a = s_a.n_rows
    for k in range(s_b.n_rows):
        pins = tuple(cols_a[k]) + (n_rows_a + k,)
        nets.append(Net(("Brow", k), len(s_b.rows[k]), pins))
    return _finish(vertices, nets, with_data, data_ids)


def _build_outer(s_a, s_b, with_data):
    s_c = symbolic_output(s_a, s_b)
    cols_a = _a_columns(s_a)
    b_sets = s_b.row_sets
    vertices = []
    for k in range(s_a.n_cols):
        vertices.append(Vertex(("coarse", "k", k),
                               len(cols_a[k]) * len(s_b.rows[k]),
                               len(cols_a[k]) + len(s_b.rows[k])))
    data_ids = set()
    c_id = {}
    for i, j in s_c.coords():
        c_id[(i, j)] = len(vertices)
        data_ids.add(len(vertices))
        vertices.append(Vertex(("nzC", i, j), 0, 1))
    nets = []
    for i, j in s_c.coords():
        pins = tuple(k for k in s_a.rows[i] if j in b_sets[k]) + (c_id[(i, j)],)
        nets.append(Net(("C", i, j), 1, pins))
    return _finish(vertices, nets, with_data, data_ids)


def _build_mono_a(s_a, s_b, with_data):
    s_c = symbolic_output(s_a, s_b)
    cols_a = _a_columns(s_a)
    b_sets = s_b.row_sets
    vertices = []
    comp_id = {}
    for i, k in s_a.coords():
        comp_id[(i, k)] = len(vertices)
        vertices.append(Vertex(("coarse", "A", i, k), len(s_b.rows[k]), 1))
    data_ids = set()
    brow_base = len(vertices)
    for k in range(s_b.n_rows):
        data_ids.add(len(vertices))
        vertices.append(Vertex(("coarse", "nzBrow", k), 0, len(s_b.rows[k])))
    c_id = {}
    for i, j in s_c.coords():
        c_id[(i, j)] = len(vertices)
        data_ids.add(len(vertices))
        vertices.append(Vertex(("nzC", i, j), 0, 1))
    nets = []
    for k in range(s_b.n_rows):
        pins = tuple(comp_id[(i, k)] for i in cols_a[k]) + (brow_base + k,)
        nets.append(Net(("Brow", k), len(s_b.rows[k]), pins))
    for i, j in s_c.coords():
        pins = tuple(comp_id[(i, k)] for k in s_a.rows[i] if j in b_sets[k])
        nets.append(Net(("C", i, j), 1, pins + (c_id[(i, j)],)))
    return _finish(vertices, nets, with_data, data_ids)


def _build_mono_c(s_a, s_b, with_data):
    s_c = symbolic_output(s_a, s_b)
    cols_a = _a_columns(s_a)
    b_sets = s_b.row_sets
    vertices = []
    comp_id = {}
    for i, j in s_c.coords():
        mults = sum(1 for k in s_a.rows[i] if j in b_sets[k])
        comp_id[(i, j)] = len(vertices)
        vertices.append(Vertex(("coarse", "C", i, j), mults, 1))
    data_ids = set()
    a_id = {}
    for i, k in s_a.coords():
        a_id[(i, k)] = len(vertices)
        data_ids.add(len(vertices))
        vertices.append(Vertex(("nzA", i, k), 0, 1))
    b_id = {}
    for k, j in s_b.coords():
        b_id[(k, j)] = len(vertices)
        data_ids.add(len(vertices))
        vertices.append(Vertex(("nzB", k, j), 0, 1))
    nets = []
    for i, k in s_a.coords():
        pins = tuple(comp_id[(i, j)] for j in s_b.rows[k]) + (a_id[(i, k)],)
        nets.append(Net(("A", i, k), 1, pins))
    for k, j in s_b.coords():
        pins = tuple(comp_id[(i, j)] for i in cols_a[k]) + (b_id[(k, j)],)
        nets.append(Net(("B", k, j), 1, pins))
    return _finish(vertices, nets, with_data, data_ids)


_MIRROR_VLABEL = {
    ("coarse", "row"): lambda rest: ("coarse", "col") + rest,
    ("coarse", "nzBrow"): lambda rest: ("coarse", "nzAcol") + rest,
    ("coarse", "A"): lambda rest: ("coarse", "B", rest[1], rest[0]),
    ("nzC",): lambda rest: ("nzC", rest[1], rest[0]),
}

_MIRROR_NLABEL = {
    ("Brow",): lambda rest: ("Acol",) + rest,
    ("C",): lambda rest: ("C", rest[1], rest[0]),
}


def _mirror_label(label: Label, table) -> Label:
    for head, fn in table.items():
        if label[:len(head)] == head:
            return fn(label[len(head):])
    raise ConfigError(f"cannot mirror label {label!r}")


def _build_mirrored(s_a, s_b, base_builder, with_data):
    """Column-wise and monochrome-B are the row-wise and monochrome-A models
    of the transposed product, with indices flipped back on output."""
    h = base_builder(transpose(s_b), transpose(s_a), with_data)
    vertices = [Vertex(_mirror_label(v.label, _MIRROR_VLABEL), v.w_comp, v.w_mem)
                for v in h.vertices]
    nets = [Net(_mirror_label(n.label, _MIRROR_NLABEL), n.cost, n.pins)
            for n in h.nets]
    return Hypergraph.build(vertices, nets)


def build_restricted(s_a: NonzeroStructure, s_b: NonzeroStructure,
                     spec: ModelSpec) -> Hypergraph:
    """Build one of the six coarsened models named by ``spec.kind``."""
    if spec.kind == "masked":
        raise ConfigError("use build_masked for masked models")
    if spec.kind not in RESTRICTED_KINDS:
        raise ConfigError(f"build_restricted cannot build {spec.kind!r}")
    require_no_empty(s_a, s_b)
    wd = spec.with_data_vertices
    if spec.kind == "row":
        return _build_row_wise(s_a, s_b, wd)
    if spec.kind == "col":
        return _build_mirrored(s_a, s_b, _build_row_wise, wd)
    if spec.kind == "outer":
        return _build_outer(s_a, s_b, wd)
    if spec.kind == "mono-a":
        return _build_mono_a(s_a, s_b, wd)
    if spec.kind == "mono-b":
        return _build_mirrored(s_a, s_b, _build_mono_a, wd)
    return _build_mono_c(s_a, s_b, wd)


def build_spmv_finegrain(s_a: NonzeroStructure) -> Hypergraph:
    """Matrix-vector model for a square matrix times a dense vector.

    Each stored entry is one unit of work holding one word; the entry (i, i)
    is merged with the two vector entries it shares an index with (a
    zero-work dummy stands in when the diagonal entry is absent), so vector
    input and output are split identically.  One unit-cost net per row and
    per column; single-pin nets are dropped.
    """
    if s_a.n_rows != s_a.n_cols:
        raise DimensionError(
            f"matrix-vector model needs a square matrix, got "
            f"{s_a.n_rows}x{s_a.n_cols}")
    n = s_a.n_rows
    vertices = []
    has_diag = [False] * n
    for i in range(n):
        has_diag[i] = i in s_a.row_sets[i]
        if has_diag[i]:
            vertices.append(Vertex(("coarse", "diag", i), 1, 3))
        else:
            vertices.append(Vertex(("coarse", "diag", i), 0, 2))
    off_id = {}
    for i, k in s_a.coords():
        if i != k:
            off_id[(i, k)] = len(vertices)
            vertices.append(Vertex(("coarse", "offdiag", i, k), 1, 1))

    def entry_vertex(i, k):
        return i if i == k else off_id[(i, k)]

    nets = []
    for i in range(n):
        pins = [entry_vertex(i, k) for k in s_a.rows[i]]
        if not has_diag[i]:
            pins.append(i)
        if len(pins) >= 2:
            nets.append(Net(("row", i), 1, tuple(pins)))
    cols = _a_columns(s_a)
    for k in range(n):
        pins = [entry_vertex(i, k) for i in cols[k]]
        if not has_diag[k]:
            pins.append(k)
        if len(pins) >= 2:
            nets.append(Net(("col", k), 1, tuple(pins)))
    return Hypergraph.build(vertices, nets)


def build_masked(s_a: NonzeroStructure, s_b: NonzeroStructure,
                 mask: NonzeroStructure,
                 with_data_vertices: bool = True) -> Hypergraph:
    """Full model restricted to computing only the output entries in ``mask``.

    Output nets outside the mask disappear together with their
    multiplications (and output vertex); input nets left with no
    multiplication work are dropped too, along with their input vertex.
    """
    require_no_empty(s_a, s_b)
    s_c = symbolic_output(s_a, s_b)
    if (mask.n_rows, mask.n_cols) != (s_c.n_rows, s_c.n_cols):
        raise MaskError(
            f"mask is {mask.n_rows}x{mask.n_cols}, output is "
            f"{s_c.n_rows}x{s_c.n_cols}")
    c_sets = s_c.row_sets
    for i, j in mask.coords():
        if j not in c_sets[i]:
            raise MaskError(f"mask entry ({i}, {j}) is not a computable output")

    h = build_fine_grained(s_a, s_b, with_data_vertices)
    keep = mask.row_sets

    drop_vertex = [False] * len(h.vertices)
    for vid, v in enumerate(h.vertices):
        tag = v.label[0]
        if tag == "m" and v.label[3] not in keep[v.label[1]]:
            drop_vertex[vid] = True
        elif tag == "nzC" and v.label[2] not in keep[v.label[1]]:
            drop_vertex[vid] = True

    kept_nets = []
    for net in h.nets:
        tag = net.label[0]
        if tag == "C" and net.label[2] not in keep[net.label[1]]:
            continue
        pins = tuple(p for p in net.pins if not drop_vertex[p])
        if tag in ("A", "B"):
            has_mult = any(h.vertices[p].label[0] == "m" for p in pins)
            if not has_mult:
                for p in pins:
                    drop_vertex[p] = True
                continue
        kept_nets.append((net.label, net.cost, pins))

    remap = {}
    vertices = []
    for vid, v in enumerate(h.vertices):
        if not drop_vertex[vid]:
            remap[vid] = len(vertices)
            vertices.append(v)
    nets = [Net(label, cost, tuple(remap[p] for p in pins))
            for label, cost, pins in kept_nets]
    return Hypergraph.build(vertices, nets)


def build_model(s_a: NonzeroStructure, s_b: NonzeroStructure | None,
                spec: ModelSpec) -> Hypergraph:
    """Dispatch on ``spec.kind``.  ``s_b`` is ignored by the matrix-vector
    model, which depends on ``s_a`` alone."""
    if spec.kind == "spmv":
        return build_spmv_finegrain(s_a)
    if s_b is None:
        raise ConfigError(f"model {spec.kind!r} needs a second structure")
    if spec.kind == "fine":
        return build_fine_grained(s_a, s_b, spec.with_data_vertices)
    if spec.kind == "masked":
        assert spec.mask is not None
        return build_masked(s_a, s_b, spec.mask, spec.with_data_vertices)
    return build_restricted(s_a, s_b, spec)


# ---------------------------------------------------------------------------
# Classifying a work assignment by which index slices stay on one part.
# ---------------------------------------------------------------------------

def classify_parallelization(mult_set: MultTripleSet | tuple,
                             part_of) -> frozenset[str]:
    """Flags naming every restricted family the assignment belongs to.

    A: all (i, k, *) fibers single-part.  B: all (*, k, j).  C: all (i, *, j).
    R: all (i, *, *) slices single-part (row-wise).  L: all (*, *, j)
    (column-wise).  U: all (*, k, *) (outer-product).  U always coincides
    with A and B holding together: a k-slice is the cross product of its
    two input projections, so pinning both fiber families pins the slice.
    """
    triples = mult_set.triples if isinstance(mult_set, MultTripleSet) else tuple(mult_set)
    assigned = []
    for t in triples:
        try:
            assigned.append((t, part_of[t]))
        except KeyError:
            raise ValueError(f"triple {t} missing from the assignment")

    keys = {
        "A": lambda t: (t[0], t[1]),
        "B": lambda t: (t[1], t[2]),
        "C": lambda t: (t[0], t[2]),
        "R": lambda t: t[0],
        "L": lambda t: t[2],
        "U": lambda t: t[1],
    }
    flags = set()
    for name, key in keys.items():
        first: dict = {}
        ok = True
        for t, q in assigned:
            k = key(t)
            if k in first:
                if first[k] != q:
                    ok = False
                    break
            else:
                first[k] = q
        if ok:
            flags.add(name)
    return frozenset(flags)
