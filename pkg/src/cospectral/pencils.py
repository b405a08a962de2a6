"""Multivariate pencils for the spectrum relations and pencil equality tests.

For matrices A_1, ..., A_k the pencil polynomial is

    phi(s; t) = det(t*I - (s_1 A_1 + ... + s_k A_k)),

a polynomial of total degree at most n in (t, s).  Two graphs are related
when their pencils agree identically.  Equality is decided either
deterministically, by exact evaluation on an integer grid large enough to
separate distinct polynomials, or probabilistically, by Schwartz-Zippel
evaluation at uniform random points of a prime field.

The probabilistic mode uses the fixed prime 2**62 + 169.  A per-trial false
"equal" requires the nonzero difference polynomial to vanish at a uniform
random point, which happens with probability at most n/prime < 2**-55 for
every order n <= 64 handled here.  Pencils over the Gaussian rationals are
evaluated under both embeddings i -> r and i -> -r (r*r = -1 mod prime,
available since prime = 1 mod 4); a nonzero Gaussian-integer coefficient c
would need prime**2 to divide its norm to die under both embeddings, and
desk-scale coefficient norms stay far below prime**2.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Optional

from .exact import ExactMatrix, GaussianRational, det, rank
from .graphs import (
    Digraph,
    Graph,
    VertexPartition,
    adjacency,
    degree_partition,
    hermitian_adjacency,
)

__all__ = [
    "PIT_PRIME",
    "PIT_SQRT_MINUS_ONE",
    "Pencil",
    "SpectrumRelation",
    "PencilFingerprint",
    "EqualityReport",
    "CospectralityResult",
    "BudgetExceededError",
    "build_pencil",
    "pencil_equal",
    "are_cospectral",
    "cospectrality_check",
    "fingerprint",
]

# prime = 2**62 + 169; prime % 4 == 1, so -1 is a square mod prime.
PIT_PRIME = 4611686018427388073
# PIT_SQRT_MINUS_ONE**2 % PIT_PRIME == PIT_PRIME - 1
PIT_SQRT_MINUS_ONE = 2128470469878218830

RELATION_KINDS = ("S", "GS", "GDLS", "GBDLS", "GBLS", "HGBLS")
_PARTITION_KINDS = frozenset({"GDLS", "GBDLS", "GBLS", "HGBLS"})

DEFAULT_TRIALS = 8
DEFAULT_DET_BUDGET = 500_000
_MAX_RESAMPLES = 16


class BudgetExceededError(ValueError):
    """Deterministic grid larger than the configured evaluation budget."""


@dataclass(frozen=True)
class Pencil:
    """Ordered coefficient matrices with their variable labels."""

    variable_labels: tuple
    coefficient_matrices: tuple

    def __post_init__(self):
        mats = tuple(self.coefficient_matrices)
        labels = tuple(self.variable_labels)
        if len(mats) < 1:
            raise ValueError("pencil needs at least one coefficient matrix")
        if len(labels) != len(mats):
            raise ValueError("one label per coefficient matrix required")
        n = mats[0].rows
        for m in mats:
            if not m.is_square or m.rows != n:
                raise ValueError("all coefficient matrices must be square of equal order")
        object.__setattr__(self, "variable_labels", labels)
        object.__setattr__(self, "coefficient_matrices", mats)

    @property
    def k(self) -> int:
        return len(self.coefficient_matrices)

    @property
    def order(self) -> int:
        return self.coefficient_matrices[0].rows

    def is_gaussian(self) -> bool:
        return any(m.is_gaussian() for m in self.coefficient_matrices)

    def variable_degree_bounds(self) -> tuple:
        """Per-variable degree bounds for phi: rank of each coefficient matrix.

        A monomial of degree d in s_i selects d columns from s_i*A_i, and any
        d > rank(A_i) such columns are dependent, killing the term.  The t
        variable is bounded by the order separately.
        """
        return tuple(rank(m) for m in self.coefficient_matrices)


@dataclass(frozen=True)
class SpectrumRelation:
    """A cospectrality notion, optionally tied to a vertex partition."""

    kind: str
    partition: Optional[VertexPartition] = None

    def __post_init__(self):
        kind = self.kind.upper()
        if kind not in RELATION_KINDS:
            raise ValueError(f"unknown relation kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.partition is not None and kind == "GBDLS" and not self.partition.covering:
            raise ValueError("the block diagonal relation needs a covering partition")

    @property
    def needs_partition(self) -> bool:
        return self.kind in _PARTITION_KINDS

    @property
    def hermitian(self) -> bool:
        return self.kind == "HGBLS"


@dataclass(frozen=True)
class PencilFingerprint:
    """Residues of phi at seeded random points; shareable across one shape.

    Points depend only on (seed, trials, variable count), so fingerprints of
    pencils with the same shape are directly comparable and usable as bucket
    keys.  Gaussian pencils store a residue pair, one per embedding of i.
    """

    prime: int
    trials: int
    seed: int
    evaluations: tuple  # ((point, value), ...); value is int or (int, int)

    @property
    def values(self) -> tuple:
        return tuple(v for _, v in self.evaluations)


@dataclass(frozen=True)
class EqualityReport:
    """Outcome of one pencil_equal run; truthiness is the verdict."""

    equal: bool
    mode: str
    trials: int
    prime: Optional[int] = None
    seed: Optional[int] = None
    resamples: int = 0
    witness: Optional[tuple] = None

    def __bool__(self) -> bool:
        return self.equal


@dataclass(frozen=True)
class CospectralityResult:
    relation: str
    equal: bool
    mode: str
    trials: int
    prime: Optional[int] = None
    seed: Optional[int] = None
    reason: Optional[str] = None

    def __bool__(self) -> bool:
        return self.equal


# ---------------------------------------------------------------------------
# pencil construction
# ---------------------------------------------------------------------------


def _block_matrix(p: VertexPartition, i: int, j: int) -> ExactMatrix:
    return p.indicator_vector(i) @ p.indicator_vector(j).transpose()


def _diag_matrix(p: VertexPartition, i: int) -> ExactMatrix:
    col = p.indicator_vector(i).col(0)
    return ExactMatrix.diagonal(list(col))


def build_pencil(
    relation: SpectrumRelation,
    a: ExactMatrix,
    partition: Optional[VertexPartition] = None,
) -> Pencil:
    """Assemble the coefficient matrices for one relation.

    ``a`` is the adjacency matrix (Hermitian adjacency for the digraph
    relation); the remaining matrices are built from the partition.  The
    coefficient order is the defining one: adjacency first, then the
    structural matrices by class index (row-major over (i, j) pairs for the
    block relations).
    """
    if not a.is_square:
        raise ValueError("adjacency matrix must be square")
    n = a.rows
    part = partition if partition is not None else relation.partition
    if relation.needs_partition:
        if part is None:
            raise ValueError(f"{relation.kind} requires a vertex partition")
        if part.n != n:
            raise ValueError(f"partition is over {part.n} vertices, matrix order is {n}")
        if relation.kind == "GBDLS" and not part.covering:
            raise ValueError("the block diagonal relation needs a covering partition")

    kind = relation.kind
    if kind == "S":
        mats = [a]
    elif kind == "GS":
        mats = [a, ExactMatrix([[1] * n for _ in range(n)])]
    elif kind == "GDLS":
        mats = [a] + [_diag_matrix(part, i) for i in range(1, part.p + 1)]
    elif kind == "GBDLS":
        mats = [a] + [_block_matrix(part, i, i) for i in range(1, part.p + 1)]
    else:  # GBLS / HGBLS: all p*p blocks, row-major
        mats = [a] + [
            _block_matrix(part, i, j)
            for i in range(1, part.p + 1)
            for j in range(1, part.p + 1)
        ]
    labels = tuple(f"s{i}" for i in range(1, len(mats) + 1))
    return Pencil(variable_labels=labels, coefficient_matrices=tuple(mats))


# ---------------------------------------------------------------------------
# evaluation helpers
# ---------------------------------------------------------------------------


def _scalar_residue(x, prime: int, embed_i: int) -> int:
    if isinstance(x, int):
        return x % prime
    if isinstance(x, GaussianRational):
        re = x.re.numerator * pow(x.re.denominator, -1, prime)
        im = x.im.numerator * pow(x.im.denominator, -1, prime)
        return (re + embed_i * im) % prime
    f = Fraction(x)
    return f.numerator * pow(f.denominator, -1, prime) % prime


def _residue_matrices(pencil: Pencil, prime: int, embed_i: int):
    out = []
    for m in pencil.coefficient_matrices:
        out.append(
            [[_scalar_residue(x, prime, embed_i) for x in row] for row in m.entries]
        )
    return out


def _det_mod(rows, prime: int) -> int:
    n = len(rows)
    sign = 1
    acc = 1
    for c in range(n):
        pivot_row = next((r for r in range(c, n) if rows[r][c]), None)
        if pivot_row is None:
            return 0
        if pivot_row != c:
            rows[c], rows[pivot_row] = rows[pivot_row], rows[c]
            sign = -sign
        pivot = rows[c][c]
        acc = acc * pivot % prime
        inv = pow(pivot, -1, prime)
        for r in range(c + 1, n):
            f = rows[r][c]
            if f:
                f = f * inv % prime
                rows[r] = [(a - f * b) % prime for a, b in zip(rows[r], rows[c])]
    return acc * sign % prime


def _eval_mod(res_mats, n: int, point, prime: int) -> int:
    t = point[0] % prime
    rows = [[t if i == j else 0 for j in range(n)] for i in range(n)]
    for s_val, mat in zip(point[1:], res_mats):
        s_val %= prime
        if not s_val:
            continue
        for i in range(n):
            row, mrow = rows[i], mat[i]
            for j in range(n):
                if mrow[j]:
                    row[j] = (row[j] - s_val * mrow[j]) % prime
    return _det_mod(rows, prime)


def _eval_exact(pencil: Pencil, point):
    n = pencil.order
    rows = [[point[0] if i == j else 0 for j in range(n)] for i in range(n)]
    for s_val, mat in zip(point[1:], pencil.coefficient_matrices):
        if not s_val:
            continue
        for i in range(n):
            row, mrow = rows[i], mat.entries[i]
            for j in range(n):
                x = mrow[j]
                if x:
                    row[j] = row[j] - s_val * x
    return det(ExactMatrix(rows))


class _ModEvaluator:
    """Cached residue matrices for one pencil; dual embeddings if Gaussian."""

    def __init__(self, pencil: Pencil, prime: int):
        self.n = pencil.order
        self.prime = prime
        self.gaussian = pencil.is_gaussian()
        self.plus = _residue_matrices(pencil, prime, PIT_SQRT_MINUS_ONE % prime)
        if self.gaussian:
            self.minus = _residue_matrices(pencil, prime, (-PIT_SQRT_MINUS_ONE) % prime)

    def __call__(self, point):
        v = _eval_mod(self.plus, self.n, point, self.prime)
        if self.gaussian:
            return (v, _eval_mod(self.minus, self.n, point, self.prime))
        return v


def _pair_values(e1: _ModEvaluator, e2: _ModEvaluator, point):
    """Evaluate both pencils at one point as comparable dual-embedding pairs."""
    v1, v2 = e1(point), e2(point)
    if isinstance(v1, tuple) or isinstance(v2, tuple):
        # A real pencil is its own conjugate, so both embeddings coincide.
        if not isinstance(v1, tuple):
            v1 = (v1, v1)
        if not isinstance(v2, tuple):
            v2 = (v2, v2)
    else:
        v1, v2 = (v1,), (v2,)
    return v1, v2


# ---------------------------------------------------------------------------
# equality decision
# ---------------------------------------------------------------------------


def _check_comparable(p1: Pencil, p2: Pencil):
    if p1.k != p2.k:
        raise ValueError(f"variable count mismatch: {p1.k} vs {p2.k}")
    if p1.order != p2.order:
        raise ValueError(f"order mismatch: {p1.order} vs {p2.order}")


def _det_equal(p1: Pencil, p2: Pencil, budget: int) -> EqualityReport:
    n = p1.order
    bounds = [n]
    for b1, b2 in zip(p1.variable_degree_bounds(), p2.variable_degree_bounds()):
        bounds.append(max(b1, b2))
    size = 1
    for b in bounds:
        size *= b + 1
        if size > budget:
            raise BudgetExceededError(
                f"deterministic grid needs {size}+ evaluations, budget is {budget}"
            )
    count = 0
    for point in product(*[range(b + 1) for b in bounds]):
        count += 1
        if _eval_exact(p1, point) != _eval_exact(p2, point):
            return EqualityReport(
                equal=False, mode="det", trials=count, witness=point
            )
    return EqualityReport(equal=True, mode="det", trials=count)


def _prob_equal(
    p1: Pencil, p2: Pencil, trials: int, seed: int, prime: int
) -> EqualityReport:
    rng = random.Random(seed)
    e1 = _ModEvaluator(p1, prime)
    e2 = _ModEvaluator(p2, prime)
    nvars = p1.k + 1
    resamples = 0
    for _ in range(trials):
        for _attempt in range(_MAX_RESAMPLES):
            point = tuple(rng.randrange(prime) for _ in range(nvars))
            v1, v2 = _pair_values(e1, e2, point)
            if any(v1) or any(v2):
                break
            # Both pencils vanish here; the comparison is vacuous, try again.
            resamples += 1
        if v1 != v2:
            return EqualityReport(
                equal=False,
                mode="prob",
                trials=trials,
                prime=prime,
                seed=seed,
                resamples=resamples,
                witness=point,
            )
    return EqualityReport(
        equal=True, mode="prob", trials=trials, prime=prime, seed=seed, resamples=resamples
    )


def pencil_equal(
    p1: Pencil,
    p2: Pencil,
    mode: str = "prob",
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    prime: int = PIT_PRIME,
    budget: int = DEFAULT_DET_BUDGET,
) -> EqualityReport:
    """Decide whether two pencils have identical polynomials phi.

    ``mode="det"`` evaluates both polynomials exactly on a full integer grid
    sized by per-variable degree bounds, which decides equality outright;
    the grid size must stay within ``budget``.  ``mode="prob"`` compares
    residues at ``trials`` seeded random points over F_prime with per-trial
    error at most order/prime; points where both pencils vanish are resampled.
    """
    _check_comparable(p1, p2)
    if mode == "det":
        return _det_equal(p1, p2, budget)
    if mode == "prob":
        return _prob_equal(p1, p2, trials, seed, prime)
    raise ValueError(f"unknown mode {mode!r}")


def fingerprint(
    pencil: Pencil,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    prime: int = PIT_PRIME,
) -> PencilFingerprint:
    """Seeded residue vector of phi; equal pencils always fingerprint equal.

    The evaluation points are a pure function of (seed, trials, k), so
    fingerprints partition a family of same-shape pencils into candidate
    equality classes for mate search.  No resampling here: a shared zero is
    still a shared value.
    """
    rng = random.Random(seed)
    ev = _ModEvaluator(pencil, prime)
    nvars = pencil.k + 1
    evaluations = []
    for _ in range(trials):
        point = tuple(rng.randrange(prime) for _ in range(nvars))
        evaluations.append((point, ev(point)))
    return PencilFingerprint(
        prime=prime, trials=trials, seed=seed, evaluations=tuple(evaluations)
    )


# ---------------------------------------------------------------------------
# graph-level interface
# ---------------------------------------------------------------------------


def _relation_inputs(g, h, relation: SpectrumRelation):
    """Adjacency matrices and the shared partition for one comparison.

    Returns (a, b, partition, mismatch_reason); a None matrix pair with a
    reason means the comparison is decided negative without building pencils.
    """
    if relation.hermitian:
        if not isinstance(g, Digraph) or not isinstance(h, Digraph):
            raise TypeError("the Hermitian relation applies to digraphs")
        a, b = hermitian_adjacency(g), hermitian_adjacency(h)
    else:
        if not isinstance(g, Graph) or not isinstance(h, Graph):
            raise TypeError(f"{relation.kind} applies to undirected graphs")
        a, b = adjacency(g), adjacency(h)
    if g.n != h.n:
        raise ValueError(f"vertex count mismatch: {g.n} vs {h.n}")

    part = relation.partition
    if relation.needs_partition and part is None:
        # Default to degree data; the defining e_i are shared between the two
        # pencils, so differing default partitions decide the answer already.
        pg, ph = degree_partition(g), degree_partition(h)
        if pg.classes != ph.classes:
            return None, None, None, "degree partitions differ"
        part = pg
    return a, b, part, None


def cospectrality_check(
    g,
    h,
    relation: SpectrumRelation,
    mode: str = "prob",
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    prime: int = PIT_PRIME,
    budget: int = DEFAULT_DET_BUDGET,
) -> CospectralityResult:
    """Full cospectrality decision for two graphs or two digraphs."""
    a, b, part, reason = _relation_inputs(g, h, relation)
    if reason is not None:
        return CospectralityResult(
            relation=relation.kind,
            equal=False,
            mode=mode,
            trials=0,
            prime=prime if mode == "prob" else None,
            seed=seed if mode == "prob" else None,
            reason=reason,
        )
    p1 = build_pencil(relation, a, part)
    p2 = build_pencil(relation, b, part)
    report = pencil_equal(
        p1, p2, mode=mode, trials=trials, seed=seed, prime=prime, budget=budget
    )
    return CospectralityResult(
        relation=relation.kind,
        equal=report.equal,
        mode=report.mode,
        trials=report.trials,
        prime=report.prime,
        seed=report.seed,
    )


def are_cospectral(g, h, relation: SpectrumRelation, **kwargs) -> bool:
    """True iff the two (di)graphs are cospectral under the relation."""
    return cospectrality_check(g, h, relation, **kwargs).equal
