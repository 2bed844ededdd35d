"""The global Markov chain and its recurrent structure.

Closing the product game under a defender and an adversary controller
leaves a finite Markov chain over (product state, defender internal
state, adversary internal state).  Specification satisfaction reduces to
reaching a recurrent class whose projection meets some Rabin pair's K
set and misses its L set; the probability of doing so is an absorption
probability of the chain.
"""

from dataclasses import dataclass, field

import numpy as np

from .fsc import FSC
from .product import ProductPOSG

ROW_TOL = 1e-9


class ChainError(ValueError):
    pass


@dataclass(frozen=True)
class GlobalMarkovChain:
    trans: np.ndarray  # (N, N) row-stochastic
    m0: int
    n_product: int
    n_gdef: int
    n_gadv: int
    pairs: tuple  # (L, K) frozensets of *product* indices
    labels: tuple  # per product state

    def __post_init__(self):
        t = np.asarray(self.trans, dtype=float)
        t.setflags(write=False)
        object.__setattr__(self, "trans", t)

    @property
    def n_states(self):
        return self.trans.shape[0]

    def proj_product(self, m):
        """Product-state component of a chain state index."""
        return m // (self.n_gdef * self.n_gadv)

    def decode(self, m):
        ga = m % self.n_gadv
        gd = (m // self.n_gadv) % self.n_gdef
        return self.proj_product(m), gd, ga

    def encode(self, p, gd, ga):
        return (p * self.n_gdef + gd) * self.n_gadv + ga


def compose_gmc(p: ProductPOSG, c_def: FSC, c_adv: FSC) -> GlobalMarkovChain:
    """Close the product game under both controllers.

    Each chain transition sums, over both observations and both actions,
    the product of the observation likelihoods, the two controller
    policies, and the lifted game kernel.
    """
    mu_d, mu_a = c_def.policy, c_adv.policy
    if mu_d.shape[1] != len(p.obs_def) or mu_d.shape[3] != len(p.u_def):
        raise ChainError("defender controller dimensions do not match the game")
    if mu_a.shape[1] != len(p.obs_adv) or mu_a.shape[3] != len(p.u_adv):
        raise ChainError("adversary controller dimensions do not match the game")
    Gd, Ga = mu_d.shape[0], mu_a.shape[0]
    # fold each agent's observation kernel into its policy:
    # A[p, g, g', u] = sum_o O(o|p) mu(g', u | g, o)
    A = np.einsum("po,gozu->pgzu", p.o_def, mu_d)
    B = np.einsum("po,gozu->pgzu", p.o_adv, mu_a)
    big = np.einsum("pgzu,pawv,puvq->pgaqzw", A, B, p.trans)
    n = p.n_states * Gd * Ga
    trans = big.reshape(n, n)
    m0 = (p.initial * Gd + c_def.structure.g_init) * Ga + c_adv.structure.g_init
    return GlobalMarkovChain(
        trans=trans,
        m0=m0,
        n_product=p.n_states,
        n_gdef=Gd,
        n_gadv=Ga,
        pairs=p.pairs,
        labels=p.labels,
    )


# --- strongly connected components ------------------------------------------


def strongly_connected_components(succ):
    """Tarjan's single-pass SCC algorithm, iterative.

    succ is an adjacency list.  Returns (comp_id per node, components in
    topological order: every edge goes from an earlier component to the
    same or a later one).
    """
    n = len(succ)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack = []
    comp_id = [-1] * n
    comps = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            descended = False
            for i in range(pi, len(succ[v])):
                w = succ[v][i]
                if index[w] == -1:
                    work[-1] = (v, i + 1)
                    work.append((w, 0))
                    descended = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if descended:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(comp)
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    # Tarjan emits sinks first; reverse for topological order
    comps.reverse()
    for k, comp in enumerate(comps):
        for v in comp:
            comp_id[v] = k
    return comp_id, [sorted(c) for c in comps]


def adjacency(chain: GlobalMarkovChain, edge_eps=0.0):
    """Adjacency list of the chain's digraph (strictly positive entries)."""
    return [list(np.nonzero(row > edge_eps)[0]) for row in chain.trans]


@dataclass
class RecurrenceAnalysis:
    scc_id: list  # component index per state, topologically ordered
    comps: list  # components, topological order
    classes: list = field(default_factory=list)  # recurrent classes
    class_id: list = field(default_factory=list)  # per state, -1 if transient
    transient: list = field(default_factory=list)
    feasible: list = field(default_factory=list)  # per class
    witness: list = field(default_factory=list)  # smallest witnessing pair, per class


def sccs(chain: GlobalMarkovChain, edge_eps=0.0) -> RecurrenceAnalysis:
    comp_id, comps = strongly_connected_components(adjacency(chain, edge_eps))
    return RecurrenceAnalysis(scc_id=comp_id, comps=comps)


def recurrent_classes(chain: GlobalMarkovChain, analysis=None, edge_eps=0.0):
    """Mark sink SCCs as recurrent classes; everything else is transient."""
    if analysis is None:
        analysis = sccs(chain, edge_eps)
    succ = adjacency(chain, edge_eps)
    n_comps = len(analysis.comps)
    has_exit = [False] * n_comps
    for v in range(chain.n_states):
        cv = analysis.scc_id[v]
        for w in succ[v]:
            if analysis.scc_id[w] != cv:
                has_exit[cv] = True
    analysis.classes = [
        comp for k, comp in enumerate(analysis.comps) if not has_exit[k]
    ]
    class_id = [-1] * chain.n_states
    for k, cls in enumerate(analysis.classes):
        for v in cls:
            class_id[v] = k
    analysis.class_id = class_id
    analysis.transient = [v for v in range(chain.n_states) if class_id[v] == -1]
    return analysis


def phi_feasible_sets(chain: GlobalMarkovChain, analysis: RecurrenceAnalysis):
    """Flag each recurrent class whose projection realizes Rabin acceptance.

    A class qualifies when some pair (L, K) has the class projection meet
    K and miss L; the smallest such pair index is recorded as witness.
    """
    feasible, witness = [], []
    for cls in analysis.classes:
        proj = {chain.proj_product(m) for m in cls}
        found = None
        for i, (L, K) in enumerate(chain.pairs):
            if proj & K and not (proj & L):
                found = i
                break
        feasible.append(found is not None)
        witness.append(found)
    analysis.feasible = feasible
    analysis.witness = witness
    return [
        (k, witness[k]) for k in range(len(analysis.classes)) if feasible[k]
    ]


def _reachable(chain, start, edge_eps=0.0):
    succ = adjacency(chain, edge_eps)
    seen = {start}
    frontier = [start]
    while frontier:
        v = frontier.pop()
        for w in succ[v]:
            if w not in seen:
                seen.add(w)
                frontier.append(w)
    return seen


def check_proposition1(chain: GlobalMarkovChain, analysis: RecurrenceAnalysis):
    """Qualitative satisfaction check from the chain's initial state.

    True when some acceptance pair and some recurrent class reachable
    from m0 have the class projection meet that pair's K set while
    missing its L set.  Returns (verdict, witness) with witness a
    (pair index, class index) tuple or None.
    """
    if not analysis.feasible and analysis.classes:
        phi_feasible_sets(chain, analysis)
    reach = _reachable(chain, chain.m0)
    for k, cls in enumerate(analysis.classes):
        if cls[0] not in reach:
            continue
        proj = {chain.proj_product(m) for m in cls}
        for i, (L, K) in enumerate(chain.pairs):
            if proj & K and not (proj & L):
                return True, (i, k)
    return False, None


def absorption_probabilities(chain, analysis, start=None):
    """Probability of ending up in each recurrent class.

    Each class is collapsed to an absorbing super-state and the linear
    system (I - Q) x = b is solved over the transient states, Q being the
    transient block of the kernel and b the one-step mass into the class.
    """
    if start is None:
        start = chain.m0
    p = len(analysis.classes)
    out = np.zeros(p)
    if analysis.class_id[start] >= 0:
        out[analysis.class_id[start]] = 1.0
        return out
    tr = analysis.transient
    tr_pos = {v: i for i, v in enumerate(tr)}
    Q = chain.trans[np.ix_(tr, tr)]
    B = np.zeros((len(tr), p))
    for k, cls in enumerate(analysis.classes):
        B[:, k] = chain.trans[np.ix_(tr, cls)].sum(axis=1)
    try:
        X = np.linalg.solve(np.eye(len(tr)) - Q, B)
    except np.linalg.LinAlgError as exc:
        raise ChainError(f"absorption system is singular: {exc}") from exc
    return X[tr_pos[start]]


def satisfaction_probability(chain: GlobalMarkovChain, edge_eps=0.0) -> float:
    """Probability of reaching a feasible recurrent class from m0."""
    analysis = recurrent_classes(chain, edge_eps=edge_eps)
    feas = phi_feasible_sets(chain, analysis)
    if not feas:
        return 0.0
    probs = absorption_probabilities(chain, analysis)
    return float(sum(probs[k] for k, _ in feas))


def validate_chain(chain: GlobalMarkovChain):
    report = []
    sums = chain.trans.sum(axis=1)
    for m in np.nonzero(np.abs(sums - 1.0) > ROW_TOL)[0]:
        report.append(f"chain row {m} sums to {sums[m]:.12g}")
    return report
