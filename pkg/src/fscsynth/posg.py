"""Two-player partially observable stochastic games and the grid benchmark.

A game couples a joint transition kernel T(s'|s, u_def, u_adv) with one
noisy observation kernel per agent and a labeling of states by atomic
propositions.  All kernels are dense numpy arrays; rows must be
probability distributions (checked to 1e-9).
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

ROW_TOL = 1e-9


class PosgError(ValueError):
    pass


@dataclass(frozen=True)
class POSG:
    n_states: int
    initial: int
    u_def: tuple
    u_adv: tuple
    obs_def: tuple
    obs_adv: tuple
    ap: frozenset
    labels: tuple  # frozenset of AP names per state
    trans: np.ndarray  # (S, |u_def|, |u_adv|, S)
    o_def: np.ndarray  # (S, |obs_def|)
    o_adv: np.ndarray  # (S, |obs_adv|)

    def __post_init__(self):
        object.__setattr__(self, "trans", np.asarray(self.trans, dtype=float))
        object.__setattr__(self, "o_def", np.asarray(self.o_def, dtype=float))
        object.__setattr__(self, "o_adv", np.asarray(self.o_adv, dtype=float))
        self.trans.setflags(write=False)
        self.o_def.setflags(write=False)
        self.o_adv.setflags(write=False)
        expected = (self.n_states, len(self.u_def), len(self.u_adv), self.n_states)
        if self.trans.shape != expected:
            raise PosgError(f"transition kernel shape {self.trans.shape} != {expected}")
        if self.o_def.shape != (self.n_states, len(self.obs_def)):
            raise PosgError("defender observation kernel has wrong shape")
        if self.o_adv.shape != (self.n_states, len(self.obs_adv)):
            raise PosgError("adversary observation kernel has wrong shape")
        if not 0 <= self.initial < self.n_states:
            raise PosgError(f"initial state {self.initial} out of range")
        if len(self.labels) != self.n_states:
            raise PosgError("labeling must cover every state")
        for lab in self.labels:
            if not lab <= self.ap:
                raise PosgError(f"label {sorted(lab)} outside AP set")


def validate_posg(g: POSG):
    """Report every stochasticity violation; an empty list means valid."""
    report = []
    if (g.trans < -ROW_TOL).any() or (g.trans > 1 + ROW_TOL).any():
        report.append("transition kernel has entries outside [0, 1]")
    sums = g.trans.sum(axis=3)
    for s, ud, ua in zip(*np.nonzero(np.abs(sums - 1.0) > ROW_TOL)):
        report.append(
            f"transition row (s={s}, u_def={g.u_def[ud]}, u_adv={g.u_adv[ua]}) "
            f"sums to {sums[s, ud, ua]:.12g}"
        )
    for name, kernel in (("def", g.o_def), ("adv", g.o_adv)):
        if (kernel < -ROW_TOL).any() or (kernel > 1 + ROW_TOL).any():
            report.append(f"observation kernel ({name}) has entries outside [0, 1]")
        osums = kernel.sum(axis=1)
        for s in np.nonzero(np.abs(osums - 1.0) > ROW_TOL)[0]:
            report.append(
                f"observation row ({name}, s={s}) sums to {osums[s]:.12g}"
            )
    return report


@dataclass(frozen=True)
class GridSpec:
    """Parameters of the M x N grid game with an attacking adversary."""

    m: int
    n: int
    unsafe: int
    goal: int
    p_obs_def: float = 0.8
    p_obs_adv: float = 0.6
    p_move: float = 0.8
    p_move_attacked: float = 0.6
    initial: int = 0

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise PosgError("grid dimensions must be positive")
        total = self.m * self.n
        for name in ("unsafe", "goal", "initial"):
            idx = getattr(self, name)
            if not 0 <= idx < total:
                raise PosgError(f"{name} index {idx} outside the grid")
        if self.unsafe == self.goal:
            raise PosgError("unsafe and goal must be distinct states")
        for name in ("p_obs_def", "p_obs_adv", "p_move", "p_move_attacked"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise PosgError(f"{name}={p} not a probability")


# direction -> (dx, dy); state index is x + m*y
_DIRS = {"R": (1, 0), "L": (-1, 0), "U": (0, 1), "D": (0, -1)}


def _neighbors(spec, i):
    x, y = i % spec.m, i // spec.m
    out = []
    for dx, dy in _DIRS.values():
        nx, ny = x + dx, y + dy
        if 0 <= nx < spec.m and 0 <= ny < spec.n:
            out.append(nx + spec.m * ny)
    return out


def make_grid_posg(spec: GridSpec) -> POSG:
    """Build the grid game.

    Moving toward an in-grid target succeeds with p_move (p_move_attacked
    under attack); the residual mass is spread uniformly over the cell
    itself and its other neighbors.  A move off the grid keeps the agent
    in place with probability one.
    """
    u_def = ("R", "L", "U", "D")
    u_adv = ("A", "NA")
    total = spec.m * spec.n
    trans = np.zeros((total, len(u_def), len(u_adv), total))
    for i in range(total):
        x, y = i % spec.m, i // spec.m
        nbrs = _neighbors(spec, i)
        for d, name in enumerate(u_def):
            dx, dy = _DIRS[name]
            tx, ty = x + dx, y + dy
            for a, p_succ in enumerate((spec.p_move_attacked, spec.p_move)):
                if not (0 <= tx < spec.m and 0 <= ty < spec.n):
                    trans[i, d, a, i] = 1.0
                    continue
                target = tx + spec.m * ty
                # exact rationals so the quoted decimals round-trip: the
                # residual of p=0.8 over two cells must be exactly 0.1,
                # not fl(1-0.8)/2 which is one ulp short
                p_frac = Fraction(p_succ).limit_denominator(10**6)
                trans[i, d, a, target] = float(p_frac)
                residual = ({i} | set(nbrs)) - {target}
                share = float((1 - p_frac) / len(nbrs))
                for j in residual:
                    trans[i, d, a, j] += share
    obs = ("correct", "wrong")
    q_def = Fraction(spec.p_obs_def).limit_denominator(10**6)
    q_adv = Fraction(spec.p_obs_adv).limit_denominator(10**6)
    o_def = np.tile([float(q_def), float(1 - q_def)], (total, 1))
    o_adv = np.tile([float(q_adv), float(1 - q_adv)], (total, 1))
    labels = tuple(
        frozenset({"unsafe"}) if i == spec.unsafe
        else frozenset({"goal"}) if i == spec.goal
        else frozenset()
        for i in range(total)
    )
    return POSG(
        n_states=total,
        initial=spec.initial,
        u_def=u_def,
        u_adv=u_adv,
        obs_def=obs,
        obs_adv=obs,
        ap=frozenset({"unsafe", "goal"}),
        labels=labels,
        trans=trans,
        o_def=o_def,
        o_adv=o_adv,
    )


def posg_to_doc(g: POSG) -> dict:
    transitions = []
    for s in range(g.n_states):
        for d, ud in enumerate(g.u_def):
            for a, ua in enumerate(g.u_adv):
                row = g.trans[s, d, a]
                to = [
                    {"s2": int(j), "p": float(row[j])} for j in np.nonzero(row)[0]
                ]
                transitions.append({"s": s, "ud": ud, "ua": ua, "to": to})
    obs = {"def": [], "adv": []}
    for key, names, kernel in (
        ("def", g.obs_def, g.o_def),
        ("adv", g.obs_adv, g.o_adv),
    ):
        for s in range(g.n_states):
            for o, name in enumerate(names):
                if kernel[s, o] > 0:
                    obs[key].append({"s": s, "o": name, "p": float(kernel[s, o])})
    return {
        "states": g.n_states,
        "initial": g.initial,
        "u_def": list(g.u_def),
        "u_adv": list(g.u_adv),
        "obs_def": list(g.obs_def),
        "obs_adv": list(g.obs_adv),
        "ap": sorted(g.ap),
        "labels": {str(s): sorted(g.labels[s]) for s in range(g.n_states) if g.labels[s]},
        "transitions": transitions,
        "obs": obs,
    }


def parse_posg(doc: dict) -> POSG:
    """Load a game from its document form; fails closed on any violation."""
    try:
        n = int(doc["states"])
        u_def = tuple(doc["u_def"])
        u_adv = tuple(doc["u_adv"])
        obs_def = tuple(doc["obs_def"])
        obs_adv = tuple(doc["obs_adv"])
        ap = frozenset(doc["ap"])
        initial = int(doc["initial"])
    except (KeyError, TypeError) as exc:
        raise PosgError(f"malformed game document: {exc}") from exc

    ud_idx = {u: i for i, u in enumerate(u_def)}
    ua_idx = {u: i for i, u in enumerate(u_adv)}
    trans = np.zeros((n, len(u_def), len(u_adv), n))
    for entry in doc.get("transitions", []):
        if entry["ud"] not in ud_idx:
            raise PosgError(f"unknown defender action {entry['ud']!r}")
        if entry["ua"] not in ua_idx:
            raise PosgError(f"unknown adversary action {entry['ua']!r}")
        s = int(entry["s"])
        for t in entry["to"]:
            trans[s, ud_idx[entry["ud"]], ua_idx[entry["ua"]], int(t["s2"])] += float(
                t["p"]
            )
    kernels = {
        "def": np.zeros((n, len(obs_def))),
        "adv": np.zeros((n, len(obs_adv))),
    }
    names = {"def": obs_def, "adv": obs_adv}
    for key in ("def", "adv"):
        idx = {o: i for i, o in enumerate(names[key])}
        for entry in doc.get("obs", {}).get(key, []):
            if entry["o"] not in idx:
                raise PosgError(f"unknown observation {entry['o']!r}")
            kernels[key][int(entry["s"]), idx[entry["o"]]] = float(entry["p"])
    labels = tuple(
        frozenset(doc.get("labels", {}).get(str(s), [])) for s in range(n)
    )
    g = POSG(
        n_states=n,
        initial=initial,
        u_def=u_def,
        u_adv=u_adv,
        obs_def=obs_def,
        obs_adv=obs_adv,
        ap=ap,
        labels=labels,
        trans=trans,
        o_def=kernels["def"],
        o_adv=kernels["adv"],
    )
    report = validate_posg(g)
    if report:
        raise PosgError("; ".join(report))
    return g
