"""Synchronous product of a game with a Rabin automaton.

Product states are (game state, automaton state) pairs stored densely as
s * |Q| + q.  The automaton advances on the label of the state being
entered; accordingly the initial product state already consumes the
label of the initial game state.
"""

from dataclasses import dataclass

import numpy as np

from .dra import RabinAutomaton
from .posg import POSG, PosgError, parse_posg, posg_to_doc


class ProductError(ValueError):
    pass


@dataclass(frozen=True)
class ProductPOSG:
    n_states: int
    initial: int
    u_def: tuple
    u_adv: tuple
    obs_def: tuple
    obs_adv: tuple
    ap: frozenset
    labels: tuple
    trans: np.ndarray  # (P, |u_def|, |u_adv|, P)
    o_def: np.ndarray  # (P, |obs_def|)
    o_adv: np.ndarray
    pairs: tuple  # of (frozenset L, frozenset K) over product indices
    origin: tuple  # (s, q) per product state, kept through pruning

    def __post_init__(self):
        object.__setattr__(self, "trans", np.asarray(self.trans, dtype=float))
        object.__setattr__(self, "o_def", np.asarray(self.o_def, dtype=float))
        object.__setattr__(self, "o_adv", np.asarray(self.o_adv, dtype=float))
        self.trans.setflags(write=False)
        self.o_def.setflags(write=False)
        self.o_adv.setflags(write=False)


def build_product(g: POSG, a: RabinAutomaton) -> ProductPOSG:
    """Lift transitions, observations, labels, and acceptance pairs."""
    if g.ap != a.ap:
        raise ProductError(
            f"AP mismatch: game has {sorted(g.ap)}, automaton has {sorted(a.ap)}"
        )
    S, Q = g.n_states, a.n_states
    P = S * Q
    # q advances on the label of the state being entered
    succ_q = np.empty((Q, S), dtype=int)
    for q in range(Q):
        for s2 in range(S):
            succ_q[q, s2] = a.step(q, g.labels[s2])

    trans = np.zeros((P, len(g.u_def), len(g.u_adv), P))
    for s in range(S):
        for q in range(Q):
            p = s * Q + q
            for s2 in range(S):
                trans[p, :, :, s2 * Q + succ_q[q, s2]] = g.trans[s, :, :, s2]

    origin = tuple((s, q) for s in range(S) for q in range(Q))
    o_def = g.o_def[np.repeat(np.arange(S), Q)]
    o_adv = g.o_adv[np.repeat(np.arange(S), Q)]
    labels = tuple(g.labels[s] for s, _ in origin)
    pairs = tuple(
        (
            frozenset(s * Q + q for s in range(S) for q in L),
            frozenset(s * Q + q for s in range(S) for q in K),
        )
        for L, K in a.pairs
    )
    initial = g.initial * Q + a.step(a.q0, g.labels[g.initial])
    return ProductPOSG(
        n_states=P,
        initial=initial,
        u_def=g.u_def,
        u_adv=g.u_adv,
        obs_def=g.obs_def,
        obs_adv=g.obs_adv,
        ap=g.ap,
        labels=labels,
        trans=trans,
        o_def=o_def,
        o_adv=o_adv,
        pairs=pairs,
        origin=origin,
    )


def prune_unreachable(p: ProductPOSG) -> ProductPOSG:
    """Restrict to states reachable from the initial state under any actions."""
    pos = p.trans.sum(axis=(1, 2)) > 0
    reach = {p.initial}
    frontier = [p.initial]
    while frontier:
        v = frontier.pop()
        for w in np.nonzero(pos[v])[0]:
            if w not in reach:
                reach.add(w)
                frontier.append(int(w))
    keep = sorted(reach)
    remap = {old: new for new, old in enumerate(keep)}
    return ProductPOSG(
        n_states=len(keep),
        initial=remap[p.initial],
        u_def=p.u_def,
        u_adv=p.u_adv,
        obs_def=p.obs_def,
        obs_adv=p.obs_adv,
        ap=p.ap,
        labels=tuple(p.labels[i] for i in keep),
        trans=p.trans[np.ix_(keep, range(len(p.u_def)), range(len(p.u_adv)), keep)],
        o_def=p.o_def[keep],
        o_adv=p.o_adv[keep],
        pairs=tuple(
            (
                frozenset(remap[i] for i in L if i in remap),
                frozenset(remap[i] for i in K if i in remap),
            )
            for L, K in p.pairs
        ),
        origin=tuple(p.origin[i] for i in keep),
    )


def product_to_doc(p: ProductPOSG) -> dict:
    base = POSG(
        n_states=p.n_states,
        initial=p.initial,
        u_def=p.u_def,
        u_adv=p.u_adv,
        obs_def=p.obs_def,
        obs_adv=p.obs_adv,
        ap=p.ap,
        labels=p.labels,
        trans=p.trans,
        o_def=p.o_def,
        o_adv=p.o_adv,
    )
    doc = posg_to_doc(base)
    doc["pairs"] = [{"L": sorted(L), "K": sorted(K)} for L, K in p.pairs]
    doc["origin"] = [[s, q] for s, q in p.origin]
    return doc


def parse_product(doc: dict) -> ProductPOSG:
    if "pairs" not in doc:
        raise ProductError("product document lacks acceptance pairs")
    try:
        base = parse_posg({k: v for k, v in doc.items() if k not in ("pairs", "origin")})
    except PosgError as exc:
        raise ProductError(str(exc)) from exc
    pairs = tuple(
        (frozenset(int(i) for i in e["L"]), frozenset(int(i) for i in e["K"]))
        for e in doc["pairs"]
    )
    origin = tuple(tuple(pair) for pair in doc.get("origin", []))
    if not origin:
        origin = tuple((i, 0) for i in range(base.n_states))
    return ProductPOSG(
        n_states=base.n_states,
        initial=base.initial,
        u_def=base.u_def,
        u_adv=base.u_adv,
        obs_def=base.obs_def,
        obs_adv=base.obs_adv,
        ap=base.ap,
        labels=base.labels,
        trans=base.trans,
        o_def=base.o_def,
        o_adv=base.o_adv,
        pairs=pairs,
        origin=origin,
    )
