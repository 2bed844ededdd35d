"""Specifications two ways: LTL on lasso words and a Rabin automaton.

The requirement "stay safe forever and reach the goal infinitely often"
can be checked directly on an ultimately periodic word, or by running
the equivalent three-state Rabin automaton.  Both views must agree.
"""

from fscsynth.dra import builtin_paper_dra, dra_accepts_lasso
from fscsynth.ltl import LassoWord, eval_lasso, parse_ltl, pretty_print

AP = {"goal", "unsafe"}
formula = parse_ltl("(G ! unsafe) & (G F goal)", AP)
print("formula:", pretty_print(formula))

automaton = builtin_paper_dra()
print(f"automaton: {automaton.n_states} states, pairs {automaton.pairs}")

words = {
    "loop on goal": LassoWord((), ({"goal"},)),
    "goal every other step": LassoWord((frozenset(),), (frozenset(), frozenset({"goal"}))),
    "goal only once, then nothing": LassoWord(({"goal"},), (frozenset(),)),
    "safe but goal-free": LassoWord((), (frozenset(),)),
    "unsafe on the way": LassoWord(({"unsafe"},), ({"goal"},)),
}

for name, w in words.items():
    by_ltl = eval_lasso(formula, w, ap=AP)
    by_dra = dra_accepts_lasso(automaton, w)
    mark = "agrees" if by_ltl == by_dra else "DISAGREES"
    print(f"  {name:30s} LTL={by_ltl!s:5s} DRA={by_dra!s:5s} ({mark})")
