import numpy as np
import pytest

from fscsynth.dra import (
    DraError,
    all_letters,
    builtin_paper_dra,
    dra_accepts_lasso,
    dra_to_doc,
    parse_dra,
)
from fscsynth.ltl import LassoWord
from helpers import random_dra

AP = frozenset({"goal", "unsafe"})


def w(prefix, cycle):
    return LassoWord(tuple(prefix), tuple(cycle))


def test_all_letters_is_the_full_powerset():
    letters = all_letters(AP)
    assert len(letters) == 4
    assert len(set(letters)) == 4
    assert frozenset() in letters and frozenset(AP) in letters


def test_builtin_shape_and_steps():
    a = builtin_paper_dra()
    assert a.n_states == 3
    assert a.q0 == 0
    assert a.pairs == ((frozenset({2}), frozenset({1})),)
    assert a.step(0, {"goal"}) == 1
    assert a.step(1, set()) == 0
    assert a.step(0, {"unsafe"}) == 2
    assert a.step(1, {"goal", "unsafe"}) == 2
    # the trap absorbs every letter
    for letter in all_letters(AP):
        assert a.step(2, letter) == 2


def test_builtin_acceptance_hand_cases():
    a = builtin_paper_dra()
    assert dra_accepts_lasso(a, w([], [{"goal"}]))
    assert dra_accepts_lasso(a, w([set()], [set(), {"goal"}]))
    assert not dra_accepts_lasso(a, w([], [set()]))
    assert not dra_accepts_lasso(a, w([{"goal"}], [set()]))
    assert not dra_accepts_lasso(a, w([], [{"goal"}, {"unsafe"}]))
    assert not dra_accepts_lasso(a, w([{"unsafe"}], [{"goal"}]))


def test_doc_round_trip():
    a = builtin_paper_dra()
    b = parse_dra(dra_to_doc(a))
    assert b.n_states == a.n_states
    assert b.delta == a.delta
    assert b.pairs == a.pairs
    assert b.q0 == a.q0


def test_parse_rejects_missing_transition():
    doc = dra_to_doc(builtin_paper_dra())
    doc["transitions"] = doc["transitions"][:-1]
    with pytest.raises(DraError, match="missing transition"):
        parse_dra(doc)


def test_parse_rejects_duplicate_transition():
    doc = dra_to_doc(builtin_paper_dra())
    doc["transitions"].append(dict(doc["transitions"][0]))
    with pytest.raises(DraError, match="duplicate"):
        parse_dra(doc)


def test_parse_rejects_dangling_target():
    doc = dra_to_doc(builtin_paper_dra())
    doc["transitions"][0]["to"] = 99
    with pytest.raises(DraError, match="dangling"):
        parse_dra(doc)


def test_parse_rejects_pair_outside_states():
    doc = dra_to_doc(builtin_paper_dra())
    doc["pairs"][0]["K"] = [7]
    with pytest.raises(DraError, match="unknown state"):
        parse_dra(doc)


def test_acceptance_invariant_under_lasso_rewriting():
    rng = np.random.default_rng(3)
    letters = all_letters(AP)
    for _ in range(100):
        a = random_dra(rng, AP, max_states=3)
        prefix = [letters[rng.integers(0, 4)] for _ in range(rng.integers(0, 3))]
        cycle = [letters[rng.integers(0, 4)] for _ in range(rng.integers(1, 4))]
        word = w(prefix, cycle)
        unrolled = w(prefix, cycle * 2)
        rotated = w(prefix + cycle[:1], cycle[1:] + cycle[:1])
        verdict = dra_accepts_lasso(a, word)
        assert verdict == dra_accepts_lasso(a, unrolled)
        assert verdict == dra_accepts_lasso(a, rotated)
