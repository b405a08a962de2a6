"""Unit tests for walk matrices and orthogonal similarity reconstruction."""

import itertools
import random

import pytest

from cospectral import (
    Digraph,
    ExactMatrix,
    Graph,
    SpectrumRelation,
    VertexPartition,
    adjacency,
    build_pencil,
    degree_partition,
    extended_walk_matrix,
    hermitian_adjacency,
    last_invariant_factor,
    orthogonal_similarity_exists,
    parse_graph6,
    pencil_equal,
    permutation_matrix,
    quotient_graph,
    reconstruct_q_constructive,
    reconstruct_q_exact,
    verify_claim_diagnostics,
)
from cospectral.exact import rank
from cospectral.search import enumerate_graphs

P3 = Graph.from_edges(3, [(0, 1), (1, 2)])

# order-6 graph whose extended walk matrix has full row rank
FULL_RANK_G6 = "E\\Q?"
# same ordered degree classes as FULL_RANK_G6 but a different spectrum
SAME_PART_DIFFERENT_SPECTRUM_G6 = "E[??"

# order-4 digraph with full-rank Hermitian walk matrix and a 2-vertex class
FULL_RANK_D6 = "&CS_?"


def rand_graph(rng, n, p=0.5):
    edges = [
        (u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p
    ]
    return Graph.from_edges(n, edges)


def class_preserving_transposition(part, rng=None):
    """Swap two vertices inside the first class of size >= 2."""
    for block in part.classes:
        if len(block) >= 2:
            u, v = sorted(block)[:2]
            perm = list(range(part.n))
            perm[u], perm[v] = perm[v], perm[u]
            return perm
    raise AssertionError("partition has only singleton classes")


class TestExtendedWalkMatrix:
    def test_p3_rank_two(self):
        # both walk profiles coincide on the endpoints, so one column repeats
        wm = extended_walk_matrix(adjacency(P3), degree_partition(P3))
        assert wm.columns.shape == (3, 6)
        assert rank(wm.columns) == 2

    def test_column_layout(self):
        # class indicator first, then its images under repeated application
        g = Graph.from_edges(2, [(0, 1)])
        part = VertexPartition(2, [{0, 1}])
        wm = extended_walk_matrix(adjacency(g), part)
        assert wm.columns == ExactMatrix([[1, 1], [1, 1]])

    def test_block_structure(self):
        rng = random.Random(191)
        for _ in range(10):
            n = rng.randint(2, 6)
            g = rand_graph(rng, n)
            a = adjacency(g)
            part = degree_partition(g)
            wm = extended_walk_matrix(a, part)
            assert wm.columns.shape == (n, part.p * n)
            for idx, block in enumerate(part.classes):
                e = ExactMatrix.column([1 if v in block else 0 for v in range(n)])
                col = ExactMatrix.column(wm.columns.col(idx * n))
                assert col == e
                nxt = ExactMatrix.column(wm.columns.col(idx * n + 1))
                assert nxt == a @ e

    def test_full_rank_instance(self):
        g = parse_graph6(FULL_RANK_G6)
        wm = extended_walk_matrix(adjacency(g), degree_partition(g))
        assert rank(wm.columns) == 6

    def test_no_full_rank_below_order_six(self):
        # small orders always carry a degree-preserving symmetry
        for n in range(2, 5):
            for g in enumerate_graphs(n):
                wm = extended_walk_matrix(adjacency(g), degree_partition(g))
                assert rank(wm.columns) < n


class TestQuotientGraph:
    def test_p3_quotient(self):
        q = quotient_graph(adjacency(P3), degree_partition(P3))
        assert q.p == 2
        assert q.edges == frozenset({(0, 1)})
        assert q.components == (frozenset({0, 1}),)

    def test_disconnected_quotient(self):
        g = Graph.from_edges(4, [(0, 1), (2, 3)])
        part = VertexPartition(4, [{0, 1}, {2, 3}])
        q = quotient_graph(adjacency(g), part)
        assert len(q.components) == 2


class TestOrthogonalSimilarityExists:
    def test_matches_pencil_equality_exhaustively(self):
        # cross-check against an independent decision procedure: the degree
        # refinement relation holds exactly when the block pencils agree
        rel_kind = "GBDLS"
        graphs = list(enumerate_graphs(4))
        by_part = {}
        for g in graphs:
            part = degree_partition(g)
            key = tuple(tuple(sorted(b)) for b in part.classes)
            by_part.setdefault(key, []).append(g)
        checked = 0
        for group in by_part.values():
            for g, h in itertools.combinations(group, 2):
                part = degree_partition(g)
                exists = orthogonal_similarity_exists(
                    adjacency(g), adjacency(h), part
                )
                p1 = build_pencil(SpectrumRelation(rel_kind), adjacency(g), part)
                p2 = build_pencil(SpectrumRelation(rel_kind), adjacency(h), part)
                assert exists == pencil_equal(p1, p2, mode="det").equal
                checked += 1
        assert checked > 50

    def test_permutation_pairs_always_exist(self):
        rng = random.Random(193)
        for _ in range(15):
            n = rng.randint(2, 6)
            g = rand_graph(rng, n)
            part = degree_partition(g)
            try:
                perm = class_preserving_transposition(part)
            except AssertionError:
                continue
            h = g.relabel(perm)
            assert orthogonal_similarity_exists(adjacency(g), adjacency(h), part)

    def test_different_spectra_never_exist(self):
        g = parse_graph6(FULL_RANK_G6)
        h = parse_graph6(SAME_PART_DIFFERENT_SPECTRUM_G6)
        part = degree_partition(g)
        assert tuple(tuple(sorted(b)) for b in part.classes) == tuple(
            tuple(sorted(b)) for b in degree_partition(h).classes
        )
        assert not orthogonal_similarity_exists(adjacency(g), adjacency(h), part)


class TestReconstructExact:
    def test_identity_on_full_rank_graph(self):
        g = parse_graph6(FULL_RANK_G6)
        a = adjacency(g)
        res = reconstruct_q_exact(a, a, degree_partition(g))
        assert res.status == "certified"
        cert = res.certificate
        assert cert.q == ExactMatrix.identity(6)
        assert cert.method == "exact"
        assert cert.level == 1
        assert cert.orthogonal_or_unitary and cert.conjugates and cert.fixes_indicators

    def test_permutation_pair_recovers_transpose(self):
        g = parse_graph6(FULL_RANK_G6)
        part = degree_partition(g)
        perm = class_preserving_transposition(part)
        h = g.relabel(perm)
        res = reconstruct_q_exact(adjacency(g), adjacency(h), part)
        assert res.status == "certified"
        cert = res.certificate
        assert cert.q == permutation_matrix(perm).transpose()
        assert cert.level == 1
        assert cert.walk_divisor is not None
        assert cert.divisibility_ok

    def test_level_divides_walk_invariant(self):
        g = parse_graph6(FULL_RANK_G6)
        part = degree_partition(g)
        wm = extended_walk_matrix(adjacency(g), part)
        d = last_invariant_factor(wm.columns)
        perm = class_preserving_transposition(part)
        res = reconstruct_q_exact(adjacency(g), adjacency(g.relabel(perm)), part)
        assert res.certificate.walk_divisor == d
        assert d % res.certificate.level == 0

    def test_rank_deficient_reports_status(self):
        a = adjacency(P3)
        res = reconstruct_q_exact(a, a, degree_partition(P3))
        assert res.status == "rank-deficient"
        assert res.certificate is None

    def test_refutes_full_rank_non_mate(self):
        g = parse_graph6(FULL_RANK_G6)
        h = parse_graph6(SAME_PART_DIFFERENT_SPECTRUM_G6)
        res = reconstruct_q_exact(adjacency(g), adjacency(h), degree_partition(g))
        assert res.status == "refuted"

    def test_hermitian_pair_certifies_heuristically(self):
        from cospectral import parse_digraph6

        d = parse_digraph6(FULL_RANK_D6)
        part = degree_partition(d)
        perm = class_preserving_transposition(part)
        e = d.relabel(perm)
        res = reconstruct_q_exact(
            hermitian_adjacency(d), hermitian_adjacency(e), part
        )
        assert res.status == "certified"
        cert = res.certificate
        assert cert.method == "heuristic-exact"
        assert cert.q == permutation_matrix(perm).transpose()
        # no integrality certificate is claimed on the Hermitian side
        assert cert.walk_divisor is None


class TestReconstructConstructive:
    def test_certifies_rank_deficient_self_pair(self):
        a = adjacency(P3)
        res = reconstruct_q_constructive(a, a, degree_partition(P3))
        assert res.status == "certified"
        cert = res.certificate
        assert cert.method == "constructive"
        assert cert.residuals["orthogonality"] < 1e-9
        assert cert.residuals["conjugation"] < 1e-9
        assert cert.residuals["indicator_fixing"] < 1e-9

    def test_certifies_automorphic_relabelling(self):
        # C4 is vertex-transitive, so its walk matrix is far from full rank
        c4 = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
        part = degree_partition(c4)
        perm = class_preserving_transposition(part)
        res = reconstruct_q_constructive(
            adjacency(c4), adjacency(c4.relabel(perm)), part
        )
        assert res.status == "certified"

    def test_refutes_different_spectra(self):
        g = Graph.from_edges(4, [(0, 1), (2, 3)])
        h = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
        part = degree_partition(g)
        res = reconstruct_q_constructive(adjacency(g), adjacency(h), part)
        assert res.status == "refuted"

    def test_agrees_with_exact_on_full_rank_pairs(self):
        g = parse_graph6(FULL_RANK_G6)
        part = degree_partition(g)
        perm = class_preserving_transposition(part)
        h = g.relabel(perm)
        exact = reconstruct_q_exact(adjacency(g), adjacency(h), part)
        numeric = reconstruct_q_constructive(adjacency(g), adjacency(h), part)
        assert numeric.status == "certified"
        qe = exact.certificate.q.to_float_array()
        qn = numeric.certificate.q  # numeric path hands back a float array
        assert abs(qe - qn).max() < 1e-6


class TestClaimDiagnostics:
    def test_equal_pair_passes(self):
        a = adjacency(P3)
        rep = verify_claim_diagnostics(a, a, degree_partition(P3))
        assert rep.ok
        assert rep.violations == ()
        assert rep.max_abs_difference < 1e-12
        tags = {entry[-1] for entry in rep.sign_dichotomy}
        assert tags <= {"positive", "zero"}
        assert rep.components == (frozenset({0, 1}),)

    def test_unequal_pair_reports_violations(self):
        g = Graph.from_edges(4, [(0, 1), (2, 3)])
        h = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
        rep = verify_claim_diagnostics(adjacency(g), adjacency(h), degree_partition(g))
        assert not rep.ok
        assert rep.violations
