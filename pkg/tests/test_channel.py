import math
import string

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sysconstraints import (
    Alphabet,
    ConstraintSet,
    Distribution,
    NoChannelError,
    ValidationError,
    channel_metrics,
    common_set,
    validate,
)

LETTERS = tuple(string.ascii_lowercase)


def alpha(id, labels):
    return Alphabet(id, tuple(labels))


def labels(n, prefix="e"):
    return tuple(f"{prefix}{i}" for i in range(n))


class TestAlphabet:
    def test_count(self):
        assert alpha("A", "abc").count == 3

    def test_duplicate_label(self):
        with pytest.raises(ValidationError, match="'a' appears twice"):
            alpha("A", "aba")

    def test_labels_are_case_sensitive(self):
        with pytest.raises(NoChannelError):
            common_set(alpha("A", "ab"), alpha("B", "AB"))


class TestCommonSet:
    def test_twenty_six_letter_alphabet(self):
        cs = common_set(alpha("writer", LETTERS), alpha("reader", LETTERS))
        assert cs.n == 26
        assert cs.pairs[0] == ("a", "a") and cs.pairs[-1] == ("z", "z")
        assert not cs.ignored and not cs.fault

    def test_partial_overlap(self):
        cs = common_set(alpha("A", "abcd"), alpha("B", "cde"))
        assert cs.pairs == (("c", "c"), ("d", "d"))
        assert cs.n == 2

    def test_disjoint(self):
        with pytest.raises(NoChannelError, match="no channel"):
            common_set(alpha("A", "ab"), alpha("B", "xy"))

    @given(st.sets(st.sampled_from(LETTERS), min_size=1), st.sets(st.sampled_from(LETTERS), min_size=1))
    def test_symmetric_content(self, a, b):
        if not a & b:
            return
        A, B = alpha("A", sorted(a)), alpha("B", sorted(b))
        ab, ba = common_set(A, B), common_set(B, A)
        assert sorted(ab.pairs) == sorted((y, x) for x, y in ba.pairs)
        assert ab.n == len(a & b)


class TestValidate:
    def test_valid(self):
        assert validate(common_set(alpha("A", "abc"), alpha("B", "abc"))) == []

    def test_tx_paired_twice(self):
        cs = ConstraintSet("c", alpha("A", "ab"), alpha("B", "xy"), (("a", "x"), ("a", "y")))
        assert "tx label 'a' paired twice" in validate(cs)

    def test_dangling_label(self):
        cs = ConstraintSet("c", alpha("A", "ab"), alpha("B", "xy"), (("q", "x"),))
        problems = validate(cs)
        assert any("'q'" in p for p in problems)

    def test_empty_pairs(self):
        cs = ConstraintSet("c", alpha("A", "ab"), alpha("B", "xy"), ())
        assert any("n must be >= 1" in p for p in validate(cs))

    def test_explicit_cross_label_pairs(self):
        # base pairing: labels differ across the two alphabets
        cs = ConstraintSet("dna", alpha("strand", "ACGT"), alpha("complement", "TGCA"),
                           (("A", "T"), ("C", "G"), ("G", "C"), ("T", "A")))
        assert validate(cs) == []
        m = channel_metrics(cs)
        assert m.mi_bits == pytest.approx(2.0, abs=1e-12)


class TestChannelMetrics:
    def test_noiseless_square(self):
        cs = common_set(alpha("A", "abcd"), alpha("B", "abcd"))
        m = channel_metrics(cs, Distribution.uniform(4))
        assert m.h_a_bits == pytest.approx(2.0, abs=1e-12)
        assert m.mi_bits == pytest.approx(2.0, abs=1e-12)
        assert m.mb_bits == pytest.approx(2.0, abs=1e-12)
        assert m.variation_bits == 0.0

    def test_t8_r4(self):
        cs = common_set(alpha("A", labels(8)), alpha("B", labels(4)))
        m = channel_metrics(cs, Distribution.uniform(8))
        assert m.variation_bits == pytest.approx(1.0, abs=1e-12)
        assert m.s_bound_bits == pytest.approx(2.0, abs=1e-12)
        # half of the source mass is unpaired and lost
        assert m.mi_bits == pytest.approx(1.0, abs=1e-12)

    @given(st.integers(1, 6), st.data())
    def test_single_pair_carries_nothing(self, t, data):
        cs = common_set(alpha("A", labels(t)), alpha("B", ("e0",)))
        w = np.array(data.draw(st.lists(st.floats(0.01, 1), min_size=t, max_size=t)))
        m = channel_metrics(cs, Distribution(tuple(w / w.sum())))
        assert m.mi_bits == 0.0
        assert m.s_bound_bits == 0.0

    def test_source_length_mismatch(self):
        cs = common_set(alpha("A", "ab"), alpha("B", "ab"))
        with pytest.raises(ValidationError, match="t=2"):
            channel_metrics(cs, Distribution.uniform(3))

    def test_noise_shape_mismatch(self):
        cs = common_set(alpha("A", "ab"), alpha("B", "ab"))
        with pytest.raises(ValidationError, match="shape"):
            channel_metrics(cs, noise=np.full((2, 3), 1 / 6))

    def test_invalid_constraint_set(self):
        cs = ConstraintSet("c", alpha("A", "ab"), alpha("B", "xy"), (("a", "x"), ("a", "y")))
        with pytest.raises(ValidationError, match="paired twice"):
            channel_metrics(cs)

    def test_noise_marginal_must_match_source(self):
        cs = common_set(alpha("A", "ab"), alpha("B", "ab"))
        with pytest.raises(ValidationError, match="marginal"):
            channel_metrics(cs, Distribution((0.9, 0.1)), np.full((2, 2), 0.25))

    def test_binary_symmetric_noise(self):
        cs = common_set(alpha("A", "ab"), alpha("B", "ab"))
        m = channel_metrics(cs, noise=[[0.4, 0.1], [0.1, 0.4]])
        assert m.mi_bits == pytest.approx(0.2780719051126377, abs=1e-12)
        # uniform input on a symmetric channel: MI reaches the mutual bound
        assert m.mb_bits == pytest.approx(m.mi_bits, abs=1e-12)
        assert m.mi_bits <= m.mb_bits + 1e-9 <= m.s_bound_bits + 2e-9

    @given(st.integers(1, 8), st.integers(0, 4), st.integers(0, 4), st.data())
    def test_noiseless_invariants(self, n, extra_t, extra_r, data):
        tx = alpha("A", labels(n) + labels(extra_t, "x"))
        rx = alpha("B", labels(n) + labels(extra_r, "y"))
        cs = common_set(tx, rx)
        w = np.array(data.draw(st.lists(st.floats(0.0, 1), min_size=cs.t, max_size=cs.t)))
        if w.sum() == 0:
            return
        m = channel_metrics(cs, Distribution(tuple(w / w.sum())))
        assert 0.0 <= m.mi_bits <= m.mb_bits + 1e-9
        assert m.mb_bits <= m.s_bound_bits + 1e-9
        assert m.s_bound_bits == pytest.approx(math.log2(n), abs=1e-12)
        assert m.variation_bits == pytest.approx(abs(math.log2(cs.r) - math.log2(cs.t)), abs=1e-12)

    @given(st.integers(1, 8), st.data())
    def test_source_on_pairs_is_fully_received(self, n, data):
        cs = common_set(alpha("A", labels(n) + ("x",)), alpha("B", labels(n)))
        w = np.array(data.draw(st.lists(st.floats(0.0, 1), min_size=n, max_size=n)) + [0.0])
        if w.sum() == 0:
            return
        m = channel_metrics(cs, Distribution(tuple(w / w.sum())))
        assert m.mi_bits == pytest.approx(m.h_a_bits, abs=1e-9)

    @given(st.integers(1, 6), st.integers(0, 3), st.booleans())
    def test_unpaired_element_leaves_mi(self, n, extra, on_tx):
        base = common_set(alpha("A", labels(n) + labels(extra, "x")), alpha("B", labels(n)))
        src = Distribution(tuple([1.0 / n] * n + [0.0] * extra))
        before = channel_metrics(base, src)
        if on_tx:
            grown = common_set(alpha("A", base.tx.elements + ("new",)), base.rx)
            src = Distribution(src.probs + (0.0,))
        else:
            grown = common_set(base.tx, alpha("B", base.rx.elements + ("new",)))
        after = channel_metrics(grown, src)
        assert after.mi_bits == pytest.approx(before.mi_bits, abs=1e-12)
        if abs(math.log2(grown.r) - math.log2(grown.t)) > abs(math.log2(base.r) - math.log2(base.t)):
            assert after.variation_bits > before.variation_bits
