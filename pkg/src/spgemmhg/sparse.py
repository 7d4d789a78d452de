"""Sparse nonzero structures, symbolic products, Matrix Market I/O, generators.

Only the *positions* of nonzeros are tracked.  Values are never stored:
a stored zero in a valued file counts as a nonzero, and cancellation is
ignored, so the output structure of a product is fully determined by the
input structures.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator

from .errors import ConfigError, DimensionError, ParseError


@dataclass(frozen=True)
class NonzeroStructure:
    """A {0,1} sparsity pattern in compressed-row form.

    ``rows[i]`` is the strictly increasing tuple of column indices with a
    nonzero in row ``i``.  Row-major iteration over ``coords()`` therefore
    yields strictly increasing (row, col) pairs.
    """

    n_rows: int
    n_cols: int
    rows: tuple[tuple[int, ...], ...]

    @classmethod
    def from_coords(cls, n_rows: int, n_cols: int,
                    coords: Iterable[tuple[int, int]]) -> "NonzeroStructure":
        """Build from (row, col) pairs; duplicates are merged."""
        buckets: list[set[int]] = [set() for _ in range(n_rows)]
        for i, j in coords:
            if not (0 <= i < n_rows and 0 <= j < n_cols):
                raise ValueError(f"coordinate ({i}, {j}) outside {n_rows}x{n_cols}")
            buckets[i].add(j)
        return cls(n_rows, n_cols, tuple(tuple(sorted(b)) for b in buckets))

    @cached_property
    def nnz(self) -> int:
        return sum(len(r) for r in self.rows)

    @cached_property
    def col_counts(self) -> tuple[int, ...]:
        counts = [0] * self.n_cols
        for row in self.rows:
            for j in row:
                counts[j] += 1
        return tuple(counts)

    @cached_property
    def row_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(r) for r in self.rows)

    def coords(self) -> Iterator[tuple[int, int]]:
        for i, row in enumerate(self.rows):
            for j in row:
                yield (i, j)

    def coord_set(self) -> set[tuple[int, int]]:
        return set(self.coords())


@dataclass(frozen=True)
class MultTripleSet:
    """All (i, k, j) index triples of nontrivial scalar multiplications.

    A triple exists exactly when (i, k) is stored in the left operand and
    (k, j) in the right one.  The projection onto (i, j) is the output
    structure; ``count`` is the total amount of multiply work.
    """

    triples: tuple[tuple[int, int, int], ...]

    @property
    def count(self) -> int:
        return len(self.triples)

    @classmethod
    def from_structures(cls, s_a: NonzeroStructure,
                        s_b: NonzeroStructure) -> "MultTripleSet":
        return cls(tuple(iter_mult_triples(s_a, s_b)))

    def projection_ij(self) -> set[tuple[int, int]]:
        return {(i, j) for i, _, j in self.triples}


def iter_mult_triples(s_a: NonzeroStructure,
                      s_b: NonzeroStructure) -> Iterator[tuple[int, int, int]]:
    """Stream multiplication triples in (i, k, j) lexicographic order."""
    if s_a.n_cols != s_b.n_rows:
        raise DimensionError(
            f"inner dimensions differ: {s_a.n_cols} vs {s_b.n_rows}")
    b_rows = s_b.rows
    for i, a_row in enumerate(s_a.rows):
        for k in a_row:
            for j in b_rows[k]:
                yield (i, k, j)


def symbolic_output(s_a: NonzeroStructure,
                    s_b: NonzeroStructure) -> NonzeroStructure:
    """Structure of the product alone; never materializes the triples."""
    if s_a.n_cols != s_b.n_rows:
        raise DimensionError(
            f"inner dimensions differ: {s_a.n_cols} vs {s_b.n_rows}")
    b_rows = s_b.rows
    c_rows = []
    for a_row in s_a.rows:
        cols: set[int] = set()
        for k in a_row:
            cols.update(b_rows[k])
        c_rows.append(tuple(sorted(cols)))
    return NonzeroStructure(s_a.n_rows, s_b.n_cols, tuple(c_rows))


def symbolic_multiply(s_a: NonzeroStructure, s_b: NonzeroStructure
                      ) -> tuple[NonzeroStructure, MultTripleSet]:
    """Structure of the product plus the full multiplication triple set."""
    s_c = symbolic_output(s_a, s_b)
    return s_c, MultTripleSet.from_structures(s_a, s_b)


def transpose(s: NonzeroStructure) -> NonzeroStructure:
    rows: list[list[int]] = [[] for _ in range(s.n_cols)]
    for i, row in enumerate(s.rows):
        for j in row:
            rows[j].append(i)  # i ascending because the outer loop is
    return NonzeroStructure(s.n_cols, s.n_rows, tuple(tuple(r) for r in rows))


def strip_empty(s_a: NonzeroStructure, s_b: NonzeroStructure
                ) -> tuple[NonzeroStructure, NonzeroStructure,
                           tuple[int, ...], tuple[int, ...]]:
    """Drop rows/columns that contribute no multiplication.

    Empty rows of A and empty columns of B are removed.  An inner index k is
    removed from both matrices (column of A, row of B) exactly when A's
    column k or B's row k is empty; such removals never delete a triple.
    Returns the reduced structures plus maps from new A-row indices and new
    B-column indices to the original ones.
    """
    if s_a.n_cols != s_b.n_rows:
        raise DimensionError(
            f"inner dimensions differ: {s_a.n_cols} vs {s_b.n_rows}")
    a_col_counts = s_a.col_counts
    keep_k = [k for k in range(s_a.n_cols)
              if a_col_counts[k] > 0 and len(s_b.rows[k]) > 0]
    kmap = {k: pos for pos, k in enumerate(keep_k)}

    a_rows = []
    row_map = []
    for i, row in enumerate(s_a.rows):
        new_row = tuple(kmap[k] for k in row if k in kmap)
        if new_row:
            a_rows.append(new_row)
            row_map.append(i)
    s_a2 = NonzeroStructure(len(a_rows), len(keep_k), tuple(a_rows))

    b_rows_kept = [s_b.rows[k] for k in keep_k]
    b_col_counts = [0] * s_b.n_cols
    for row in b_rows_kept:
        for j in row:
            b_col_counts[j] += 1
    col_map = [j for j in range(s_b.n_cols) if b_col_counts[j] > 0]
    jmap = {j: pos for pos, j in enumerate(col_map)}
    b_rows = tuple(tuple(jmap[j] for j in row) for row in b_rows_kept)
    s_b2 = NonzeroStructure(len(keep_k), len(col_map), b_rows)
    return s_a2, s_b2, tuple(row_map), tuple(col_map)


# ---------------------------------------------------------------------------
# Test-instance generators.
#
# Grid points (x, y, z) on an N-sided cube are linearized x-fastest:
# index = x + N*y + N*N*z.  This order is fixed so that grid-based
# partitions are reproducible.
# ---------------------------------------------------------------------------

def grid_index(x: int, y: int, z: int, n: int) -> int:
    return x + n * (y + n * z)


def gen_stencil27(n: int) -> NonzeroStructure:
    """27-point stencil on an n^3 grid: points adjacent within Chebyshev
    distance one are connected (diagonal included)."""
    if n < 1:
        raise DimensionError("grid side must be at least 1")
    rows = []
    rng3 = range(n)
    for z in rng3:
        for y in rng3:
            for x in rng3:
                cols = []
                for dz in (-1, 0, 1):
                    zz = z + dz
                    if not 0 <= zz < n:
                        continue
                    for dy in (-1, 0, 1):
                        yy = y + dy
                        if not 0 <= yy < n:
                            continue
                        for dx in (-1, 0, 1):
                            xx = x + dx
                            if 0 <= xx < n:
                                cols.append(grid_index(xx, yy, zz, n))
                rows.append(tuple(cols))
    return NonzeroStructure(n ** 3, n ** 3, tuple(rows))


def gen_sa_prolongator(n: int) -> NonzeroStructure:
    """Smoothed-aggregation prolongator structure for the stencil problem.

    Fine grid points are grouped into 3x3x3 aggregates, one coarse point each;
    row u holds a nonzero in coarse column c when some 27-point neighbor of
    u lies in aggregate c (the structure of stencil * tentative prolongator,
    i.e. one damped-Jacobi smoothing step).
    """
    if n < 1:
        raise DimensionError("grid side must be at least 1")
    if n % 3 != 0:
        raise DimensionError(f"grid side {n} not divisible by 3")
    nc = n // 3
    rows = []
    rng3 = range(n)
    for z in rng3:
        for y in rng3:
            for x in rng3:
                aggs = set()
                for dz in (-1, 0, 1):
                    zz = z + dz
                    if not 0 <= zz < n:
                        continue
                    for dy in (-1, 0, 1):
                        yy = y + dy
                        if not 0 <= yy < n:
                            continue
                        for dx in (-1, 0, 1):
                            xx = x + dx
                            if 0 <= xx < n:
                                aggs.add(grid_index(xx // 3, yy // 3, zz // 3, nc))
                rows.append(tuple(sorted(aggs)))
    return NonzeroStructure(n ** 3, nc ** 3, tuple(rows))


def gen_erdos_renyi(n: int, d: float, seed: int) -> NonzeroStructure:
    """n-by-n structure where each entry is present with probability d/n."""
    if n < 1:
        raise ConfigError("matrix dimension must be at least 1")
    if not 0 <= d <= n:
        raise ConfigError(f"expected 0 <= d <= n, got d={d}")
    rng = random.Random(seed)
    prob = d / n
    rows = []
    for _ in range(n):
        rows.append(tuple(j for j in range(n) if rng.random() < prob))
    return NonzeroStructure(n, n, tuple(rows))


# ---------------------------------------------------------------------------
# Matrix Market coordinate format (pattern semantics).
# ---------------------------------------------------------------------------

_MM_FIELDS = ("pattern", "real", "integer")
_MM_SYMMETRIES = ("general", "symmetric")


def load_matrix_market(text: str) -> NonzeroStructure:
    """Parse a Matrix Market coordinate file into a nonzero structure.

    Values of real/integer files are ignored (a stored 0.0 still counts),
    symmetric files are expanded to the full pattern, and duplicate entries
    are merged.
    """
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty file")
    header = lines[0].split()
    if len(header) != 5 or header[0].lower() != "%%matrixmarket":
        raise ParseError("expected '%%MatrixMarket matrix coordinate ...' banner", line=1)
    _, obj, fmt, field, symmetry = (tok.lower() for tok in header)
    if obj != "matrix":
        raise ParseError(f"unsupported object {obj!r}", line=1)
    if fmt == "array":
        raise ParseError("array (dense) format not supported", line=1)
    if fmt != "coordinate":
        raise ParseError(f"unsupported format {fmt!r}", line=1)
    if field not in _MM_FIELDS:
        raise ParseError(f"unsupported field {field!r}", line=1)
    if symmetry not in _MM_SYMMETRIES:
        raise ParseError(f"unsupported symmetry {symmetry!r}", line=1)

    need_value = field != "pattern"
    size = None
    coords: list[tuple[int, int]] = []
    entries_read = 0
    declared = 0
    for lineno, raw in enumerate(lines[1:], start=2):
        stripped = raw.strip()
        if not stripped or stripped.startswith("%"):
            continue
        tokens = stripped.split()
        if size is None:
            if len(tokens) != 3:
                raise ParseError("size line must be 'rows cols entries'", line=lineno)
            try:
                n_rows, n_cols, declared = (int(t) for t in tokens)
            except ValueError:
                raise ParseError("non-integer token in size line", line=lineno)
            if n_rows < 0 or n_cols < 0 or declared < 0:
                raise ParseError("negative size", line=lineno)
            size = (n_rows, n_cols)
            continue
        if entries_read >= declared:
            raise ParseError("more entries than declared", line=lineno)
        if len(tokens) < (3 if need_value else 2):
            raise ParseError("too few tokens in entry", line=lineno)
        try:
            i = int(tokens[0])
            j = int(tokens[1])
        except ValueError:
            raise ParseError("non-integer coordinate", line=lineno)
        if not (1 <= i <= size[0] and 1 <= j <= size[1]):
            raise ParseError(f"entry ({i}, {j}) outside {size[0]}x{size[1]}",
                             line=lineno)
        entries_read += 1
        coords.append((i - 1, j - 1))
        if symmetry == "symmetric" and i != j:
            coords.append((j - 1, i - 1))
    if size is None:
        raise ParseError("missing size line")
    if entries_read != declared:
        raise ParseError(f"declared {declared} entries, found {entries_read}")
    return NonzeroStructure.from_coords(size[0], size[1], coords)


def dump_matrix_market(s: NonzeroStructure) -> str:
    out = ["%%MatrixMarket matrix coordinate pattern general",
           f"{s.n_rows} {s.n_cols} {s.nnz}"]
    for i, j in s.coords():
        out.append(f"{i + 1} {j + 1}")
    return "\n".join(out) + "\n"
