"""Hypergraph data structure, validation, and the ``.shgr`` text format.

Vertices carry a two-component weight (computation, memory) and nets carry a
positive integer cost.  Labels are tuples ``(kind, *indices)`` whose first
element is a short string; they survive a write/read round trip exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .errors import ParseError

Label = tuple


def format_label(label: Label) -> str:
    kind = str(label[0])
    if len(label) == 1:
        return kind
    return kind + ":" + ",".join(str(part) for part in label[1:])


def parse_label(text: str) -> Label:
    kind, sep, rest = text.partition(":")
    if not sep:
        return (kind,)
    parts = tuple(int(tok) if tok.isdigit() else tok for tok in rest.split(","))
    return (kind,) + parts


@dataclass(frozen=True)
class Vertex:
    label: Label
    w_comp: int
    w_mem: int


@dataclass(frozen=True)
class Net:
    label: Label
    cost: int
    pins: tuple[int, ...]


@dataclass(frozen=True)
class Hypergraph:
    vertices: tuple[Vertex, ...]
    nets: tuple[Net, ...]
    total_comp: int
    total_mem: int

    @classmethod
    def build(cls, vertices, nets) -> "Hypergraph":
        """Construct with cached weight totals computed from the vertices."""
        vertices = tuple(vertices)
        nets = tuple(nets)
        return cls(vertices, nets,
                   sum(v.w_comp for v in vertices),
                   sum(v.w_mem for v in vertices))

    @property
    def n_pins(self) -> int:
        return sum(len(net.pins) for net in self.nets)

    @cached_property
    def vertex_index(self) -> dict[Label, int]:
        return {v.label: i for i, v in enumerate(self.vertices)}

    @cached_property
    def net_index(self) -> dict[Label, int]:
        return {n.label: i for i, n in enumerate(self.nets)}


def validate(h: Hypergraph) -> list[str]:
    """Return all invariant violations, empty when the hypergraph is sound.

    Violations are data, not exceptions: builders are expected to produce
    valid hypergraphs, but files and hand-built objects may not.
    """
    problems = []
    n = len(h.vertices)
    seen_vlabels: dict[Label, int] = {}
    for idx, v in enumerate(h.vertices):
        if v.w_comp < 0 or v.w_mem < 0:
            problems.append(f"vertex {idx}: negative weight")
        if v.label in seen_vlabels:
            problems.append(
                f"vertex {idx}: label {format_label(v.label)} duplicates "
                f"vertex {seen_vlabels[v.label]}")
        else:
            seen_vlabels[v.label] = idx
    seen_nlabels: dict[Label, int] = {}
    for idx, net in enumerate(h.nets):
        if net.cost < 1:
            problems.append(f"net {idx}: cost {net.cost} is not positive")
        if not net.pins:
            problems.append(f"net {idx}: no pins")
        seen_pins = set()
        for pin in net.pins:
            if not 0 <= pin < n:
                problems.append(f"net {idx}: pin {pin} out of range")
            elif pin in seen_pins:
                problems.append(f"net {idx}: duplicate pin {pin}")
            seen_pins.add(pin)
        if net.label in seen_nlabels:
            problems.append(
                f"net {idx}: label {format_label(net.label)} duplicates "
                f"net {seen_nlabels[net.label]}")
        else:
            seen_nlabels[net.label] = idx
    if h.total_comp != sum(v.w_comp for v in h.vertices):
        problems.append("cached total_comp does not match vertex weights")
    if h.total_mem != sum(v.w_mem for v in h.vertices):
        problems.append("cached total_mem does not match vertex weights")
    return problems


# ---------------------------------------------------------------------------
# .shgr format
#
#   0 <num_vertices> <num_nets> <num_pins> 3
#   <cost> <pin> <pin> ...          (one line per net)
#   <w_comp> <w_mem>                (one line per vertex)
#
# The leading 0 is the pin index base, the trailing 3 says nets are costed
# and vertices weighted.  '%'-prefixed comment lines may appear anywhere;
# labels ride in trailing comments: "%L <idx> <label>" for vertices and
# "%N <idx> <label>" for nets.  Output is ASCII with LF line endings.
# ---------------------------------------------------------------------------

def write_hgr(h: Hypergraph) -> str:
    out = [f"0 {len(h.vertices)} {len(h.nets)} {h.n_pins} 3"]
    for net in h.nets:
        out.append(" ".join([str(net.cost)] + [str(p) for p in net.pins]))
    for v in h.vertices:
        out.append(f"{v.w_comp} {v.w_mem}")
    for idx, v in enumerate(h.vertices):
        out.append(f"%L {idx} {format_label(v.label)}")
    for idx, net in enumerate(h.nets):
        out.append(f"%N {idx} {format_label(net.label)}")
    return "\n".join(out) + "\n"


def read_hgr(text: str) -> Hypergraph:
    data_lines: list[tuple[int, str]] = []
    vlabels: dict[int, Label] = {}
    nlabels: dict[int, Label] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped:
            continue
        if stripped.startswith("%"):
            tokens = stripped.split()
            if tokens[0] in ("%L", "%N") and len(tokens) == 3:
                try:
                    idx = int(tokens[1])
                except ValueError:
                    raise ParseError("non-integer label index", line=lineno)
                target = vlabels if tokens[0] == "%L" else nlabels
                target[idx] = parse_label(tokens[2])
            continue
        data_lines.append((lineno, stripped))

    if not data_lines:
        raise ParseError("no header line")
    lineno, header = data_lines[0]
    tokens = header.split()
    if len(tokens) != 5:
        raise ParseError("header must have 5 fields", line=lineno)
    try:
        base, n_vertices, n_nets, n_pins, flags = (int(t) for t in tokens)
    except ValueError:
        raise ParseError("non-integer token in header", line=lineno)
    if base != 0 or flags != 3:
        raise ParseError("expected index base 0 and weight flag 3", line=lineno)
    if len(data_lines) != 1 + n_nets + n_vertices:
        raise ParseError(
            f"expected {n_nets} net lines and {n_vertices} vertex lines, "
            f"found {len(data_lines) - 1} data lines")

    nets = []
    pins_seen = 0
    for pos in range(n_nets):
        lineno, line = data_lines[1 + pos]
        tokens = line.split()
        try:
            values = [int(t) for t in tokens]
        except ValueError:
            raise ParseError("non-integer token in net line", line=lineno)
        if len(values) < 2:
            raise ParseError("net line needs a cost and at least one pin",
                             line=lineno)
        cost, pins = values[0], values[1:]
        for p in pins:
            if not 0 <= p < n_vertices:
                raise ParseError(f"pin {p} out of range", line=lineno)
        pins_seen += len(pins)
        nets.append(Net(nlabels.get(pos, ("net", pos)), cost, tuple(pins)))
    if pins_seen != n_pins:
        raise ParseError(f"header declares {n_pins} pins, nets list {pins_seen}")

    vertices = []
    for pos in range(n_vertices):
        lineno, line = data_lines[1 + n_nets + pos]
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError("vertex line must be '<w_comp> <w_mem>'", line=lineno)
        try:
            w_comp, w_mem = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise ParseError("non-integer token in vertex line", line=lineno)
        vertices.append(Vertex(vlabels.get(pos, ("v", pos)), w_comp, w_mem))
    return Hypergraph.build(vertices, nets)


@dataclass(frozen=True)
class Partition:
    """Total assignment of vertex indices to parts ``0..p-1``."""

    p: int
    parts: tuple[int, ...]

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("part count must be at least 1")
        for idx, q in enumerate(self.parts):
            if not 0 <= q < self.p:
                raise ValueError(f"vertex {idx} assigned to part {q} "
                                 f"outside [0, {self.p})")

    def to_text(self) -> str:
        out = [f"p {self.p}"]
        for idx, q in enumerate(self.parts):
            out.append(f"{idx} {q}")
        return "\n".join(out) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Partition":
        lines = [ln.strip() for ln in text.splitlines()]
        lines = [(no, ln) for no, ln in enumerate(lines, start=1)
                 if ln and not ln.startswith("%")]
        if not lines:
            raise ParseError("empty partition file")
        lineno, first = lines[0]
        tokens = first.split()
        if len(tokens) != 2 or tokens[0] != "p":
            raise ParseError("expected 'p <count>' line", line=lineno)
        try:
            p = int(tokens[1])
        except ValueError:
            raise ParseError("non-integer part count", line=lineno)
        n = len(lines) - 1
        assignment: list[int | None] = [None] * n
        for lineno, line in lines[1:]:
            tokens = line.split()
            if len(tokens) != 2:
                raise ParseError("expected '<vertex> <part>'", line=lineno)
            try:
                idx, q = int(tokens[0]), int(tokens[1])
            except ValueError:
                raise ParseError("non-integer token", line=lineno)
            if not 0 <= idx < n:
                raise ParseError(f"vertex index {idx} out of range", line=lineno)
            if assignment[idx] is not None:
                raise ParseError(f"vertex {idx} assigned twice", line=lineno)
            if not 0 <= q < p:
                raise ParseError(f"part {q} out of range", line=lineno)
            assignment[idx] = q
        return cls(p, tuple(assignment))  # type: ignore[arg-type]
