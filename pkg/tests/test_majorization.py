import random
from fractions import Fraction as F

import pytest
from hypothesis import assume, given, settings

from privfuse.errors import NoPerfectMatching, NotMajorized, NotSubstochastic
from privfuse.majorization import (
    birkhoff_decompose, cycle_notation, dilate_to_doubly_stochastic, is_majorized,
    label_witness, partial_permutation_decomposition, substochastic_witness, verify_witness,
)
from privfuse.matrix import Matrix
from privfuse.weights import SourceElement, descending

from helpers import BETA, DELTA, GAMMA, oracle_majorized, rand_below, rand_source, rand_substochastic, sources


def rows(M):
    return [list(r) for r in M.to_rows()]


def reconstruct(dec, vec):
    """Apply sum(lambda_i P_i) to ``vec`` straight from the (row, col) pairs."""
    out = [F(0)] * dec.n
    for t in dec.terms:
        for i, j in t.perm:
            out[i] += t.weight * vec[j]
    return tuple(out)


class TestIsMajorized:
    def test_examples(self):
        assert is_majorized(BETA, GAMMA)
        assert is_majorized(BETA, BETA)
        assert not is_majorized(DELTA, GAMMA)
        assert not is_majorized(GAMMA, BETA)

    def test_empty(self):
        e = SourceElement()
        assert is_majorized(e, e)
        assert is_majorized(e, BETA)
        assert not is_majorized(BETA, e)

    @given(sources(), sources())
    def test_matches_prefix_oracle(self, b, g):
        assert is_majorized(b, g) == oracle_majorized(b, g)

    @given(sources(), sources(), sources())
    def test_preorder(self, a, b, c):
        assert is_majorized(a, a)
        if is_majorized(a, b) and is_majorized(b, c):
            assert is_majorized(a, c)


class TestWitness:
    def test_table_witness(self):
        D = substochastic_witness(BETA, GAMMA)
        # one T-step on positions 1,2 with lambda 1/2, then diag(3/5, 1, 1, 1)
        assert rows(D) == [[F(3, 5), 0, 0, 0], [0, F(1, 2), F(1, 2), 0], [0, F(1, 2), F(1, 2), 0], [0, 0, 0, 1]]
        assert D.matvec(descending(GAMMA)) == descending(BETA)
        assert verify_witness(D, BETA, GAMMA)

    def test_self_witness_is_identity(self):
        assert substochastic_witness(BETA, BETA) == Matrix.identity(4)
        assert verify_witness(Matrix.identity(4), BETA, BETA)

    def test_componentwise_below_is_diagonal(self):
        g = SourceElement({"a": F(1, 2), "b": F(1, 4)})
        b = SourceElement({"a": F(1, 4), "b": F(1, 8)})
        assert substochastic_witness(b, g) == Matrix.diagonal([F(1, 2), F(1, 2)])

    def test_zero_matrix_rejected(self):
        assert not verify_witness(Matrix.zeros(4), BETA, GAMMA)

    def test_not_majorized(self):
        with pytest.raises(NotMajorized):
            substochastic_witness(DELTA, GAMMA)
        with pytest.raises(NotMajorized):
            partial_permutation_decomposition(DELTA, GAMMA)

    def test_both_empty(self):
        e = SourceElement()
        assert substochastic_witness(e, e).shape == (0, 0)

    def test_fallback_pair_selection(self):
        # no k after the last "below" index: the alternate pair rule applies
        b = SourceElement({"a": F(3, 10), "b": F(1, 4), "c": F(1, 10)})
        g = SourceElement({"a": F(2, 5), "b": F(1, 5), "c": F(1, 5)})
        D = substochastic_witness(b, g)
        assert verify_witness(D, b, g)

    def test_label_witness(self):
        D = substochastic_witness(BETA, GAMMA)
        W = label_witness(D, BETA, GAMMA)
        for u in "wxyz":
            assert sum((v * GAMMA[c] for (r, c), v in W.items() if r == u), F(0)) == BETA[u]

    @given(sources(), sources())
    @settings(max_examples=200)
    def test_witness_iff_majorized(self, b, g):
        if oracle_majorized(b, g):
            D = substochastic_witness(b, g)
            assert verify_witness(D, b, g)
            assert D.is_doubly_substochastic()
        else:
            with pytest.raises(NotMajorized):
                substochastic_witness(b, g)


class TestDilation:
    def test_half(self):
        assert rows(dilate_to_doubly_stochastic(Matrix.diagonal([F(1, 2)]))) == [[F(1, 2), F(1, 2)], [F(1, 2), F(1, 2)]]

    def test_identity(self):
        assert dilate_to_doubly_stochastic(Matrix.identity(2)) == Matrix.identity(4)

    def test_zero(self):
        assert rows(dilate_to_doubly_stochastic(Matrix.zeros(1))) == [[0, 1], [1, 0]]

    def test_rejects_non_substochastic(self):
        with pytest.raises(NotSubstochastic):
            dilate_to_doubly_stochastic(Matrix.from_rows([[1, 1], [0, 0]]))

    def test_random(self):
        rng = random.Random(7)
        for _ in range(50):
            n = rng.randint(1, 4)
            S = dilate_to_doubly_stochastic(Matrix.from_rows(rand_substochastic(rng, n)))
            assert S.is_doubly_stochastic()


class TestBirkhoff:
    def test_identity(self):
        dec = birkhoff_decompose(Matrix.identity(3))
        assert [(t.weight, t.mapping) for t in dec.terms] == [(1, {0: 0, 1: 1, 2: 2})]

    def test_half_half(self):
        dec = birkhoff_decompose(Matrix.from_rows([[F(1, 2), F(1, 2)], [F(1, 2), F(1, 2)]]))
        assert sorted((t.weight, tuple(sorted(t.mapping.items()))) for t in dec.terms) == [
            (F(1, 2), ((0, 0), (1, 1))), (F(1, 2), ((0, 1), (1, 0)))]

    def test_permutation(self):
        P = Matrix.from_permutation({0: 2, 1: 0, 2: 1}, 3)
        dec = birkhoff_decompose(P)
        assert len(dec) == 1 and dec.terms[0].weight == 1 and dec.matrix() == P

    def test_rejects_non_stochastic(self):
        with pytest.raises((NoPerfectMatching, ValueError)):
            birkhoff_decompose(Matrix.from_rows([[1, 1], [0, 0]]))

    def test_term_count_bound_on_positive_entries(self):
        rng = random.Random(11)
        for _ in range(40):
            n = rng.randint(1, 4)
            S = dilate_to_doubly_stochastic(Matrix.from_rows(rand_substochastic(rng, n)))
            dec = birkhoff_decompose(S)
            assert dec.matrix() == S
            assert dec.total_weight == 1
            assert len(dec) <= len(S.entries)

    def test_general_doubly_stochastic(self):
        S = Matrix.from_rows([[F(1, 3), F(2, 3), 0], [F(2, 3), 0, F(1, 3)], [0, F(1, 3), F(2, 3)]])
        dec = birkhoff_decompose(S)
        assert dec.matrix() == S and dec.total_weight == 1


class TestPartialPermutations:
    def test_self(self):
        dec = partial_permutation_decomposition(BETA, BETA)
        assert dec.total_weight == 1
        assert reconstruct(dec, descending(BETA)) == descending(BETA)

    def test_table(self):
        dec = partial_permutation_decomposition(BETA, GAMMA)
        assert dec.total_weight <= 1
        assert reconstruct(dec, descending(GAMMA)) == descending(BETA)
        assert dec.apply(descending(GAMMA)) == descending(BETA)

    def test_empty_beta(self):
        dec = partial_permutation_decomposition(SourceElement(), GAMMA)
        assert reconstruct(dec, descending(GAMMA)) == (0, 0, 0, 0)

    @given(sources(), sources())
    @settings(max_examples=150)
    def test_reconstruction(self, b, g):
        assume(oracle_majorized(b, g))
        dec = partial_permutation_decomposition(b, g)
        n = max(b.size, g.size)
        assert reconstruct(dec, descending(g, n)) == descending(b, n)
        assert dec.total_weight <= 1
        for t in dec.terms:
            assert 0 <= t.weight <= 1
            assert len({j for _, j in t.perm}) == len(t.perm)
            assert len({i for i, _ in t.perm}) == len(t.perm)

    def test_seeded_pairs_below(self):
        rng = random.Random(3)
        for _ in range(100):
            g = rand_source(rng)
            b = rand_below(rng, g)
            assert is_majorized(b, g)
            n = max(b.size, g.size)
            assert reconstruct(partial_permutation_decomposition(b, g), descending(g, n)) == descending(b, n)


def test_cycle_notation():
    assert cycle_notation({0: 0, 1: 2, 2: 1}) == "(0)(1 2)"
    assert cycle_notation({}) == "()"
