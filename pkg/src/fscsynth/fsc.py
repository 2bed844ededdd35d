"""Finite state controllers.

A controller is a stochastic automaton: given an internal state g and an
observation o it draws a (next internal state, action) pair.  The 0/1
structure indicator fixes which pairs may receive probability; policies
are either uniform over the indicator's support or softmax-weighted on
it.
"""

from dataclasses import dataclass

import numpy as np

ROW_TOL = 1e-9


class FscError(ValueError):
    pass


@dataclass(frozen=True)
class FSCStructure:
    agent: str  # "def" or "adv"
    obs: tuple  # observation names
    actions: tuple  # action names
    indicator: np.ndarray  # (G, O, G, U) in {0, 1}
    g_init: int = 0

    def __post_init__(self):
        ind = np.asarray(self.indicator, dtype=np.int8)
        ind.setflags(write=False)
        object.__setattr__(self, "indicator", ind)
        if self.agent not in ("def", "adv"):
            raise FscError(f"agent must be 'def' or 'adv', not {self.agent!r}")
        G = ind.shape[0]
        if ind.shape != (G, len(self.obs), G, len(self.actions)):
            raise FscError(f"indicator shape {ind.shape} inconsistent")
        if not np.isin(ind, (0, 1)).all():
            raise FscError("indicator entries must be 0 or 1")
        if not 0 <= self.g_init < G:
            raise FscError(f"initial internal state {self.g_init} out of range")

    @property
    def n_internal(self):
        return self.indicator.shape[0]

    def viable(self):
        """Every (g, o) row must support at least one (g', u)."""
        return bool((self.indicator.sum(axis=(2, 3)) >= 1).all())

    def key(self):
        return self.indicator.tobytes()


def fully_connected_structure(agent, n_internal, obs, actions, g_init=0):
    ind = np.ones((n_internal, len(obs), n_internal, len(actions)), dtype=np.int8)
    return FSCStructure(agent, tuple(obs), tuple(actions), ind, g_init)


@dataclass(frozen=True)
class FSC:
    structure: FSCStructure
    policy: np.ndarray  # (G, O, G, U), rows over (g', u) sum to 1
    params: np.ndarray = None  # softmax parameters, if any

    def __post_init__(self):
        pol = np.asarray(self.policy, dtype=float)
        pol.setflags(write=False)
        object.__setattr__(self, "policy", pol)
        if pol.shape != self.structure.indicator.shape:
            raise FscError("policy shape does not match structure")


def uniform_policy(st: FSCStructure) -> FSC:
    """Spread mass evenly over the support of the indicator."""
    if not st.viable():
        raise FscError("structure has an empty (g, o) row")
    ind = st.indicator.astype(float)
    denom = ind.sum(axis=(2, 3), keepdims=True)
    return FSC(structure=st, policy=ind / denom)


def softmax_policy(st: FSCStructure, params) -> FSC:
    """Softmax over the support of the indicator; off-support stays zero.

    Restricting the normalization to the support keeps the equivalence
    "positive probability iff indicator one" intact; with a fully
    connected structure this is the plain softmax.
    """
    if not st.viable():
        raise FscError("structure has an empty (g, o) row")
    params = np.asarray(params, dtype=float)
    if params.shape != st.indicator.shape:
        raise FscError("parameter table shape does not match structure")
    mask = st.indicator.astype(bool)
    # per-(g, o) max over the support, for numerical stability
    shifted = np.where(mask, params, -np.inf)
    peak = shifted.max(axis=(2, 3), keepdims=True)
    weights = np.where(mask, np.exp(shifted - peak), 0.0)
    denom = weights.sum(axis=(2, 3), keepdims=True)
    return FSC(structure=st, policy=weights / denom, params=params)


def validate_fsc(c: FSC):
    """Report stochasticity and support violations; empty list means valid."""
    report = []
    pol = c.policy
    if (pol < -ROW_TOL).any() or (pol > 1 + ROW_TOL).any():
        report.append("policy has entries outside [0, 1]")
    sums = pol.sum(axis=(2, 3))
    for g, o in zip(*np.nonzero(np.abs(sums - 1.0) > ROW_TOL)):
        report.append(
            f"policy row (g={g}, o={c.structure.obs[o]}) sums to {sums[g, o]:.12g}"
        )
    support = pol > 0
    mism = support != c.structure.indicator.astype(bool)
    for g, o, g2, u in zip(*np.nonzero(mism)):
        report.append(
            f"support mismatch at (g={g}, o={c.structure.obs[o]}, "
            f"g'={g2}, u={c.structure.actions[u]})"
        )
    return report


def fsc_to_doc(c: FSC) -> dict:
    st = c.structure
    entries = []
    for g, o, g2, u in zip(*np.nonzero(st.indicator)):
        entry = {
            "g": int(g),
            "o": st.obs[o],
            "g2": int(g2),
            "u": st.actions[u],
            "p": float(c.policy[g, o, g2, u]),
        }
        if c.params is not None:
            entry["phi"] = float(c.params[g, o, g2, u])
        entries.append(entry)
    return {
        "agent": st.agent,
        "g": st.n_internal,
        "g_init": st.g_init,
        "entries": entries,
    }


def parse_fsc(doc: dict, obs, actions) -> FSC:
    """Load a controller; observation/action names come from the model."""
    obs = tuple(obs)
    actions = tuple(actions)
    try:
        agent = doc["agent"]
        G = int(doc["g"])
        g_init = int(doc.get("g_init", 0))
        entries = doc["entries"]
    except (KeyError, TypeError) as exc:
        raise FscError(f"malformed controller document: {exc}") from exc
    o_idx = {o: i for i, o in enumerate(obs)}
    u_idx = {u: i for i, u in enumerate(actions)}
    ind = np.zeros((G, len(obs), G, len(actions)), dtype=np.int8)
    pol = np.zeros((G, len(obs), G, len(actions)))
    phi = np.zeros_like(pol)
    has_phi = False
    for e in entries:
        if e["o"] not in o_idx:
            raise FscError(f"unknown observation {e['o']!r}")
        if e["u"] not in u_idx:
            raise FscError(f"unknown action {e['u']!r}")
        g, o, g2, u = int(e["g"]), o_idx[e["o"]], int(e["g2"]), u_idx[e["u"]]
        ind[g, o, g2, u] = 1
        pol[g, o, g2, u] = float(e["p"])
        if "phi" in e:
            phi[g, o, g2, u] = float(e["phi"])
            has_phi = True
    st = FSCStructure(agent, obs, actions, ind, g_init)
    c = FSC(structure=st, policy=pol, params=phi if has_phi else None)
    report = validate_fsc(c)
    if report:
        raise FscError("; ".join(report))
    return c


def structure_to_doc(st: FSCStructure) -> dict:
    """Document form of a bare structure (uniform policy over the support)."""
    return fsc_to_doc(uniform_policy(st))


def parse_structure(doc: dict, obs, actions) -> FSCStructure:
    return parse_fsc(doc, obs, actions).structure
