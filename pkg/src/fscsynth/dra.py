"""Deterministic Rabin automata over alphabets 2^AP.

An automaton accepts an infinite word when some acceptance pair (L, K)
has the run meet L only finitely often and K infinitely often.  On lasso
words the run eventually loops, so acceptance is decided from the set of
automaton states inside the detected loop.
"""

from dataclasses import dataclass
from itertools import chain, combinations

from .ltl import LassoWord


class DraError(ValueError):
    pass


def all_letters(ap):
    """Every subset of ap as a frozenset, in a stable order."""
    names = sorted(ap)
    return [
        frozenset(c) for r in range(len(names) + 1) for c in combinations(names, r)
    ]


@dataclass(frozen=True)
class RabinAutomaton:
    n_states: int
    ap: frozenset
    delta: dict  # (state, frozenset letter) -> state
    q0: int
    pairs: tuple  # of (frozenset L, frozenset K)

    def __post_init__(self):
        if self.n_states < 1:
            raise DraError("automaton needs at least one state")
        if not 0 <= self.q0 < self.n_states:
            raise DraError(f"initial state {self.q0} out of range")
        if len(self.pairs) < 1:
            raise DraError("at least one Rabin pair required")
        letters = all_letters(self.ap)
        for q in range(self.n_states):
            for letter in letters:
                if (q, letter) not in self.delta:
                    raise DraError(
                        f"missing transition from state {q} on {sorted(letter)}"
                    )
        for (q, letter), q2 in self.delta.items():
            if not 0 <= q < self.n_states or not 0 <= q2 < self.n_states:
                raise DraError(f"dangling state in transition {q}->{q2}")
            if not letter <= self.ap:
                raise DraError(f"letter {sorted(letter)} outside alphabet")
        for L, K in self.pairs:
            for q in chain(L, K):
                if not 0 <= q < self.n_states:
                    raise DraError(f"pair references unknown state {q}")

    def step(self, q, letter):
        return self.delta[(q, frozenset(letter))]


def parse_dra(doc: dict) -> RabinAutomaton:
    """Build a validated automaton from its JSON document form.

    Schema: {"ap": [...], "states": N, "initial": i,
             "transitions": [{"from": i, "letter": [...], "to": j}],
             "pairs": [{"L": [...], "K": [...]}]}
    """
    try:
        ap = frozenset(doc["ap"])
        n = int(doc["states"])
        q0 = int(doc["initial"])
        raw_trans = doc["transitions"]
        raw_pairs = doc["pairs"]
    except (KeyError, TypeError) as exc:
        raise DraError(f"malformed automaton document: {exc}") from exc

    delta = {}
    for entry in raw_trans:
        key = (int(entry["from"]), frozenset(entry["letter"]))
        if key in delta:
            raise DraError(
                f"duplicate transition from state {key[0]} on {sorted(key[1])}"
            )
        delta[key] = int(entry["to"])
    pairs = tuple(
        (frozenset(int(q) for q in e["L"]), frozenset(int(q) for q in e["K"]))
        for e in raw_pairs
    )
    return RabinAutomaton(n_states=n, ap=ap, delta=delta, q0=q0, pairs=pairs)


def dra_to_doc(a: RabinAutomaton) -> dict:
    return {
        "ap": sorted(a.ap),
        "states": a.n_states,
        "initial": a.q0,
        "transitions": [
            {"from": q, "letter": sorted(letter), "to": a.delta[(q, letter)]}
            for q in range(a.n_states)
            for letter in all_letters(a.ap)
        ],
        "pairs": [{"L": sorted(L), "K": sorted(K)} for L, K in a.pairs],
    }


def dra_accepts_lasso(a: RabinAutomaton, w: LassoWord) -> bool:
    """Run the automaton on a lasso word and decide Rabin acceptance.

    The run is advanced through the prefix, then through cycle repetitions
    until an (automaton state, cycle position) pair repeats; the states
    visited inside that loop are exactly the ones seen infinitely often.
    """
    q = a.q0
    for letter in w.prefix:
        q = a.step(q, letter)
    nc = len(w.cycle)
    seen = {}  # (q, cycle position) -> step index
    visited = []
    step = 0
    while (q, step % nc) not in seen:
        seen[(q, step % nc)] = step
        visited.append(q)
        q = a.step(q, w.cycle[step % nc])
        step += 1
    loop_start = seen[(q, step % nc)]
    loop_states = set(visited[loop_start:])
    return any(
        not (loop_states & L) and (loop_states & K) for L, K in a.pairs
    )


def builtin_paper_dra() -> RabinAutomaton:
    """Automaton for 'always safe and goal infinitely often' over {goal, unsafe}.

    Three states: 0 = safe, goal not just seen; 1 = safe, goal just seen;
    2 = trap once unsafe occurred.  Accepting pair ({trap}, {1}): the trap
    must be avoided forever while state 1 recurs.
    """
    ap = frozenset({"goal", "unsafe"})
    delta = {}
    for q in range(3):
        for letter in all_letters(ap):
            if q == 2 or "unsafe" in letter:
                q2 = 2
            elif "goal" in letter:
                q2 = 1
            else:
                q2 = 0
            delta[(q, letter)] = q2
    return RabinAutomaton(
        n_states=3,
        ap=ap,
        delta=delta,
        q0=0,
        pairs=((frozenset({2}), frozenset({1})),),
    )
