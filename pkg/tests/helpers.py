"""Shared builders for randomized test instances and independent oracles."""

import numpy as np

from fscsynth.chain import GlobalMarkovChain
from fscsynth.dra import RabinAutomaton, all_letters
from fscsynth.fsc import FSC, FSCStructure
from fscsynth.posg import POSG

AP = frozenset({"goal", "unsafe"})


def random_stochastic(rng, shape):
    w = rng.random(shape) + 1e-3
    return w / w.sum(axis=-1, keepdims=True)


def random_posg(rng, max_states=5):
    S = int(rng.integers(2, max_states + 1))
    labels = []
    for _ in range(S - 1):
        r = rng.random()
        if r < 0.3:
            labels.append(frozenset({"goal"}))
        elif r < 0.45:
            labels.append(frozenset({"unsafe"}))
        else:
            labels.append(frozenset())
    labels.append(frozenset({"goal"}))  # at least one goal state
    return POSG(
        n_states=S,
        initial=0,
        u_def=("a", "b"),
        u_adv=("x", "y"),
        obs_def=("o0", "o1"),
        obs_adv=("o0", "o1"),
        ap=AP,
        labels=tuple(labels),
        trans=random_stochastic(rng, (S, 2, 2, S)),
        o_def=random_stochastic(rng, (S, 2)),
        o_adv=random_stochastic(rng, (S, 2)),
    )


def random_dra(rng, ap=AP, max_states=2):
    n = int(rng.integers(1, max_states + 1))
    delta = {
        (q, letter): int(rng.integers(0, n))
        for q in range(n)
        for letter in all_letters(ap)
    }
    K = frozenset(
        int(q) for q in rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False)
    )
    L = frozenset(int(q) for q in range(n) if rng.random() < 0.3)
    return RabinAutomaton(
        n_states=n, ap=frozenset(ap), delta=delta, q0=0, pairs=((L, K),)
    )


def random_structure(rng, agent, n_internal, obs, actions):
    ind = (
        rng.random((n_internal, len(obs), n_internal, len(actions))) < 0.6
    ).astype(np.int8)
    flat = ind.reshape(n_internal * len(obs), -1)
    for r in range(flat.shape[0]):
        if not flat[r].any():
            flat[r, int(rng.integers(0, flat.shape[1]))] = 1
    return FSCStructure(agent, tuple(obs), tuple(actions), ind, 0)


def random_fsc(rng, agent, n_internal, obs, actions):
    st = random_structure(rng, agent, n_internal, obs, actions)
    pol = (rng.random(st.indicator.shape) + 0.1) * st.indicator
    pol = pol / pol.sum(axis=(2, 3), keepdims=True)
    return FSC(structure=st, policy=pol)


def random_chain(rng, max_states=12):
    """A chain with trivial internal-state factors, so proj is the identity."""
    n = int(rng.integers(2, max_states + 1))
    trans = np.zeros((n, n))
    for i in range(n):
        k = int(rng.integers(1, min(n, 3) + 1))
        succ = rng.choice(n, size=k, replace=False)
        w = rng.random(k) + 0.1
        trans[i, succ] = w / w.sum()
    K = frozenset(
        int(q) for q in rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False)
    )
    L = frozenset(int(q) for q in range(n) if rng.random() < 0.2)
    return GlobalMarkovChain(
        trans=trans,
        m0=0,
        n_product=n,
        n_gdef=1,
        n_gadv=1,
        pairs=((L, K),),
        labels=tuple(frozenset() for _ in range(n)),
    )


def closure(adj):
    """Reflexive-transitive closure of a boolean adjacency matrix."""
    r = adj.astype(bool) | np.eye(len(adj), dtype=bool)
    while True:
        nxt = (r.astype(int) @ r.astype(int)) > 0
        if (nxt == r).all():
            return r
        r = nxt


def oracle_scc_partition(adj):
    """SCCs as a set of frozensets, from pairwise mutual reachability."""
    r = closure(adj)
    mutual = r & r.T
    return {frozenset(np.nonzero(mutual[i])[0].tolist()) for i in range(len(adj))}


def oracle_recurrent_classes(trans):
    """Sink SCCs of the chain digraph, independently of the library code."""
    adj = trans > 0
    out = []
    for comp in oracle_scc_partition(adj):
        members = sorted(comp)
        if not adj[np.ix_(members, [j for j in range(len(trans)) if j not in comp])].any():
            out.append(members)
    return sorted(out)
