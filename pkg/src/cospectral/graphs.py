"""Graphs, digraphs, vertex partitions, and the graph6/digraph6 codecs.

Vertices are always 0-indexed ints.  Graphs are simple (no loops, no
multi-edges); digraphs are loop-free but may carry digons, which is exactly
the case the Hermitian adjacency matrix folds to a real 1.  Parsing is
strict: bad header bytes, wrong payload length, nonzero padding bits and
loops are all rejected rather than repaired, so that decode followed by
encode is byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .exact import ExactMatrix, GaussianRational, I_UNIT

__all__ = [
    "Graph",
    "Digraph",
    "VertexPartition",
    "GraphFormatError",
    "parse_graph6",
    "parse_digraph6",
    "parse_graph_line",
    "encode_graph6",
    "encode_digraph6",
    "complement",
    "degree_partition",
    "adjacency",
    "hermitian_adjacency",
    "permutation_matrix",
]


class GraphFormatError(ValueError):
    """Malformed graph6/digraph6 input."""


def _check_vertex(v, n: int):
    if not isinstance(v, int) or not 0 <= v < n:
        raise ValueError(f"vertex {v!r} out of range for n={n}")


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices 0..n-1."""

    n: int
    edges: frozenset

    @classmethod
    def from_edges(cls, n: int, edges: Iterable) -> "Graph":
        if n < 1:
            raise ValueError("graph needs at least one vertex")
        norm = set()
        for u, v in edges:
            _check_vertex(u, n)
            _check_vertex(v, n)
            if u == v:
                raise ValueError(f"loop at vertex {u} not allowed")
            norm.add((min(u, v), max(u, v)))
        return cls(n=n, edges=frozenset(norm))

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)

    def degrees(self) -> tuple[int, ...]:
        d = [0] * self.n
        for u, v in self.edges:
            d[u] += 1
            d[v] += 1
        return tuple(d)

    def degree_sequence(self) -> tuple[int, ...]:
        return tuple(sorted(self.degrees()))

    def relabel(self, pi: Sequence[int]) -> "Graph":
        """Image under the vertex map v -> pi[v] (pi must be a permutation)."""
        if sorted(pi) != list(range(self.n)):
            raise ValueError("pi is not a permutation of the vertices")
        return Graph.from_edges(self.n, [(pi[u], pi[v]) for u, v in self.edges])

    def __repr__(self):
        return f"Graph(n={self.n}, m={len(self.edges)})"


@dataclass(frozen=True)
class Digraph:
    """Loop-free directed graph; (u,v) and (v,u) may both be present."""

    n: int
    arcs: frozenset

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable) -> "Digraph":
        if n < 1:
            raise ValueError("digraph needs at least one vertex")
        norm = set()
        for u, v in arcs:
            _check_vertex(u, n)
            _check_vertex(v, n)
            if u == v:
                raise ValueError(f"loop at vertex {u} not allowed")
            norm.add((u, v))
        return cls(n=n, arcs=frozenset(norm))

    def has_arc(self, u: int, v: int) -> bool:
        return (u, v) in self.arcs

    def vertex_profile(self, v: int) -> tuple[int, int, int]:
        """(digon count, plain out-arc count, plain in-arc count) at v."""
        digons = out = inc = 0
        for u, w in self.arcs:
            if u == v:
                if (w, u) in self.arcs:
                    digons += 1
                else:
                    out += 1
            elif w == v and (w, u) not in self.arcs:
                inc += 1
        return (digons, out, inc)

    def relabel(self, pi: Sequence[int]) -> "Digraph":
        if sorted(pi) != list(range(self.n)):
            raise ValueError("pi is not a permutation of the vertices")
        return Digraph.from_arcs(self.n, [(pi[u], pi[v]) for u, v in self.arcs])

    def __repr__(self):
        return f"Digraph(n={self.n}, m={len(self.arcs)})"


class VertexPartition:
    """Ordered list of pairwise disjoint nonempty vertex classes.

    The classes need not cover all vertices; ``covering`` records whether they
    do.  Covering is required by the real pencil relations and optional for
    the Hermitian one, and callers validate the flag against the relation in
    play.
    """

    __slots__ = ("n", "classes", "covering")

    def __init__(self, n: int, classes: Iterable[Iterable[int]]):
        norm = []
        seen = set()
        for cls_vertices in classes:
            block = frozenset(cls_vertices)
            if not block:
                raise ValueError("empty partition class")
            for v in block:
                _check_vertex(v, n)
                if v in seen:
                    raise ValueError(f"vertex {v} appears in two classes")
            seen |= block
            norm.append(block)
        if not norm:
            raise ValueError("partition needs at least one class")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "classes", tuple(norm))
        object.__setattr__(self, "covering", len(seen) == n)

    def __setattr__(self, name, value):
        raise AttributeError("VertexPartition is immutable")

    @property
    def p(self) -> int:
        return len(self.classes)

    def indicator_vector(self, i: int) -> ExactMatrix:
        """0/1 column e_i for class i (1-indexed, matching e_1, ..., e_p)."""
        if not 1 <= i <= self.p:
            raise IndexError(f"class index {i} out of range 1..{self.p}")
        block = self.classes[i - 1]
        return ExactMatrix.column([1 if v in block else 0 for v in range(self.n)])

    def class_of(self, v: int) -> int | None:
        for idx, block in enumerate(self.classes):
            if v in block:
                return idx
        return None

    def __eq__(self, other):
        if not isinstance(other, VertexPartition):
            return NotImplemented
        return self.n == other.n and self.classes == other.classes

    def __hash__(self):
        return hash((self.n, self.classes))

    def __repr__(self):
        body = ", ".join("{" + ",".join(map(str, sorted(b))) + "}" for b in self.classes)
        return f"VertexPartition(n={self.n}, [{body}])"


# ---------------------------------------------------------------------------
# graph6 / digraph6
# ---------------------------------------------------------------------------

_G6_HEADER = ">>graph6<<"
_D6_HEADER = ">>digraph6<<"


def _decode_size(data: str):
    """Decode the N(n) size field; returns (n, chars consumed)."""
    if not data:
        raise GraphFormatError("empty input")
    c0 = ord(data[0])
    if c0 != 126:
        if not 63 <= c0 <= 125:
            raise GraphFormatError(f"size byte {c0} out of range")
        return c0 - 63, 1
    if len(data) >= 2 and ord(data[1]) == 126:
        chunk, used = data[2:8], 8
        bits = 36
    else:
        chunk, used = data[1:4], 4
        bits = 18
    if len(chunk) < bits // 6:
        raise GraphFormatError("truncated size field")
    n = 0
    for ch in chunk:
        c = ord(ch)
        if not 63 <= c <= 126:
            raise GraphFormatError(f"size byte {c} out of range")
        n = (n << 6) | (c - 63)
    return n, used


def _encode_size(n: int) -> str:
    if n <= 62:
        return chr(n + 63)
    if n <= 258047:
        return chr(126) + "".join(chr(((n >> s) & 63) + 63) for s in (12, 6, 0))
    return chr(126) * 2 + "".join(
        chr(((n >> s) & 63) + 63) for s in (30, 24, 18, 12, 6, 0)
    )


def _decode_bits(payload: str, nbits: int) -> list[int]:
    expected = (nbits + 5) // 6
    if len(payload) != expected:
        raise GraphFormatError(
            f"payload is {len(payload)} bytes, expected {expected} for {nbits} bits"
        )
    bits = []
    for ch in payload:
        c = ord(ch)
        if not 63 <= c <= 126:
            raise GraphFormatError(f"payload byte {c} out of range")
        val = c - 63
        bits.extend((val >> s) & 1 for s in (5, 4, 3, 2, 1, 0))
    for b in bits[nbits:]:
        if b:
            raise GraphFormatError("nonzero padding bits")
    return bits[:nbits]


def _encode_bits(bits: Sequence[int]) -> str:
    out = []
    for start in range(0, len(bits), 6):
        group = bits[start : start + 6]
        val = 0
        for b in group:
            val = (val << 1) | b
        val <<= 6 - len(group)
        out.append(chr(val + 63))
    return "".join(out)


def _upper_triangle_slots(n: int):
    # graph6 bit order: (0,1), (0,2), (1,2), (0,3), ...
    for v in range(1, n):
        for u in range(v):
            yield u, v


def parse_graph6(text: str) -> Graph:
    """Decode one graph6 line (optional ``>>graph6<<`` header allowed)."""
    line = text.strip()
    if line.startswith(_G6_HEADER):
        line = line[len(_G6_HEADER) :]
    if line.startswith("&") or line.startswith(_D6_HEADER):
        raise GraphFormatError("input is digraph6, not graph6")
    n, used = _decode_size(line)
    bits = _decode_bits(line[used:], n * (n - 1) // 2)
    edges = [
        (u, v) for (u, v), bit in zip(_upper_triangle_slots(n), bits) if bit
    ]
    return Graph.from_edges(n, edges)


def encode_graph6(g: Graph) -> str:
    bits = [1 if g.has_edge(u, v) else 0 for u, v in _upper_triangle_slots(g.n)]
    return _encode_size(g.n) + _encode_bits(bits)


def parse_digraph6(text: str) -> Digraph:
    """Decode one digraph6 line (``&`` header, row-major adjacency bits)."""
    line = text.strip()
    if line.startswith(_D6_HEADER):
        line = line[len(_D6_HEADER) :]
    if not line.startswith("&"):
        raise GraphFormatError("digraph6 line must start with '&'")
    line = line[1:]
    n, used = _decode_size(line)
    bits = _decode_bits(line[used:], n * n)
    arcs = []
    for u in range(n):
        for v in range(n):
            if bits[u * n + v]:
                if u == v:
                    raise GraphFormatError(f"loop bit set at vertex {u}")
                arcs.append((u, v))
    return Digraph.from_arcs(n, arcs)


def encode_digraph6(d: Digraph) -> str:
    bits = [
        1 if d.has_arc(u, v) else 0 for u in range(d.n) for v in range(d.n)
    ]
    return "&" + _encode_size(d.n) + _encode_bits(bits)


def parse_graph_line(text: str):
    """Dispatch one line to the graph6 or digraph6 decoder by its header."""
    line = text.strip()
    if line.startswith(_D6_HEADER) or line.startswith("&"):
        return parse_digraph6(line)
    return parse_graph6(line)


# ---------------------------------------------------------------------------
# derived structures
# ---------------------------------------------------------------------------


def complement(g: Graph) -> Graph:
    edges = [
        (u, v)
        for v in range(1, g.n)
        for u in range(v)
        if not g.has_edge(u, v)
    ]
    return Graph.from_edges(g.n, edges)


def degree_partition(g) -> VertexPartition:
    """Vertices grouped by degree data, classes ordered increasingly.

    For graphs the key is the degree.  For digraphs the key is the per-vertex
    profile (digon count, out-arc count, in-arc count), the finest data the
    Hermitian adjacency rows expose without looking at neighbors.
    """
    if isinstance(g, Digraph):
        keys = [g.vertex_profile(v) for v in range(g.n)]
    else:
        keys = list(g.degrees())
    groups: dict = {}
    for v, key in enumerate(keys):
        groups.setdefault(key, []).append(v)
    return VertexPartition(g.n, [groups[k] for k in sorted(groups)])


def adjacency(g) -> ExactMatrix:
    """0/1 adjacency matrix; for a digraph, entry (u,v) marks the arc u->v."""
    if isinstance(g, Digraph):
        return ExactMatrix(
            [
                [1 if g.has_arc(u, v) else 0 for v in range(g.n)]
                for u in range(g.n)
            ]
        )
    return ExactMatrix(
        [
            [1 if g.has_edge(u, v) else 0 for v in range(g.n)]
            for u in range(g.n)
        ]
    )


def hermitian_adjacency(d: Digraph) -> ExactMatrix:
    """H(u,v) = 1 on digons, i on a lone arc u->v, -i on a lone arc v->u."""
    zero = GaussianRational(0)
    one = GaussianRational(1)
    rows = []
    for u in range(d.n):
        row = []
        for v in range(d.n):
            fwd, bwd = d.has_arc(u, v), d.has_arc(v, u)
            if fwd and bwd:
                row.append(one)
            elif fwd:
                row.append(I_UNIT)
            elif bwd:
                row.append(-I_UNIT)
            else:
                row.append(zero)
        rows.append(row)
    return ExactMatrix(rows)


def permutation_matrix(pi: Sequence[int]) -> ExactMatrix:
    """Matrix P with P[pi[v], v] = 1, so P maps e_v to e_{pi[v]}."""
    n = len(pi)
    if sorted(pi) != list(range(n)):
        raise ValueError("pi is not a permutation")
    rows = [[0] * n for _ in range(n)]
    for v in range(n):
        rows[pi[v]][v] = 1
    return ExactMatrix(rows)
