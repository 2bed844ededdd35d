"""Seeded Monte Carlo rollouts of the product game under two controllers.

Episodes sample, in order: the defender observation, the adversary
observation, each controller's joint (next internal state, action), then
the successor product state — the factorization of the chain's
transition sum.  A rollout stops as soon as it enters a recurrent class
of the composed chain, whose feasibility decides acceptance.

Randomness comes from numpy's Philox counter-based 64-bit generator:
single rollouts use ``Philox(key=seed)``, batched estimation uses one
``Philox(key=seed)`` stream for the whole batch.
"""

from dataclasses import dataclass, field
from math import sqrt

import numpy as np

from .chain import RecurrenceAnalysis, compose_gmc, phi_feasible_sets, recurrent_classes
from .fsc import FSC
from .product import ProductPOSG

MAX_STEPS = 10**6
_Z95 = 1.959963984540054


class SimulationError(RuntimeError):
    pass


@dataclass
class Episode:
    seed: int
    states: list  # chain state trajectory, m0 first
    samples: list = field(default_factory=list)  # (o_def, o_adv, u_def, u_adv)
    entered_class: int = -1
    accepted: bool = False


def _sample(rng, weights):
    r = rng.random()
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if r < acc:
            return i
    return len(weights) - 1


def simulate_episode(
    p: ProductPOSG,
    c_def: FSC,
    c_adv: FSC,
    seed: int,
    analysis: RecurrenceAnalysis,
    chain=None,
) -> Episode:
    """One rollout, stopped at recurrent-class entry; deterministic per seed."""
    if chain is None:
        chain = compose_gmc(p, c_def, c_adv)
    if not analysis.feasible and analysis.classes:
        phi_feasible_sets(chain, analysis)
    rng = np.random.Generator(np.random.Philox(key=seed))
    pq = p.initial
    gd = c_def.structure.g_init
    ga = c_adv.structure.g_init
    m = chain.encode(pq, gd, ga)
    ep = Episode(seed=seed, states=[m])
    for _ in range(MAX_STEPS):
        k = analysis.class_id[m]
        if k >= 0:
            ep.entered_class = k
            ep.accepted = bool(analysis.feasible[k])
            return ep
        o_d = _sample(rng, p.o_def[pq])
        o_a = _sample(rng, p.o_adv[pq])
        G_d, U_d = c_def.policy.shape[2], c_def.policy.shape[3]
        G_a, U_a = c_adv.policy.shape[2], c_adv.policy.shape[3]
        j_d = _sample(rng, c_def.policy[gd, o_d].reshape(-1))
        gd, u_d = divmod(j_d, U_d)
        j_a = _sample(rng, c_adv.policy[ga, o_a].reshape(-1))
        ga, u_a = divmod(j_a, U_a)
        pq = _sample(rng, p.trans[pq, u_d, u_a])
        ep.samples.append(
            (p.obs_def[o_d], p.obs_adv[o_a], p.u_def[u_d], p.u_adv[u_a])
        )
        m = chain.encode(pq, gd, ga)
        ep.states.append(m)
    raise SimulationError(f"rollout did not absorb within {MAX_STEPS} steps")


def wilson_interval(successes, n, z=_Z95):
    """Wilson score interval for a binomial proportion."""
    if n == 0:
        return (0.0, 1.0)
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def _row_pick(cum, rows, r):
    """Vectorized categorical draw: cum is (n, k) cumulative, one row per state."""
    return (r[:, None] > cum[rows]).sum(axis=1)


def estimate_satisfaction(
    p: ProductPOSG, c_def: FSC, c_adv: FSC, n_runs: int, seed: int
):
    """Empirical satisfaction frequency with a Wilson 95% interval.

    Returns (estimate, (lo, hi), per-class counts).  All runs share one
    Philox stream and advance in lockstep, so results are reproducible
    bit for bit for a given (inputs, seed, n_runs).
    """
    if n_runs < 1:
        raise SimulationError("need at least one run")
    chain = compose_gmc(p, c_def, c_adv)
    analysis = recurrent_classes(chain)
    phi_feasible_sets(chain, analysis)
    class_id = np.asarray(analysis.class_id)
    feasible = np.asarray(analysis.feasible, dtype=bool)

    U_d = c_def.policy.shape[3]
    U_a = c_adv.policy.shape[3]
    G_d = c_def.policy.shape[0]
    G_a = c_adv.policy.shape[0]
    cum_od = p.o_def.cumsum(axis=1)
    cum_oa = p.o_adv.cumsum(axis=1)
    # flatten (g, o) -> distribution over (g', u)
    cum_md = c_def.policy.reshape(G_d, len(p.obs_def), -1).cumsum(axis=2)
    cum_ma = c_adv.policy.reshape(G_a, len(p.obs_adv), -1).cumsum(axis=2)
    cum_t = p.trans.cumsum(axis=3)

    rng = np.random.Generator(np.random.Philox(key=seed))
    pq = np.full(n_runs, p.initial, dtype=np.intp)
    gd = np.full(n_runs, c_def.structure.g_init, dtype=np.intp)
    ga = np.full(n_runs, c_adv.structure.g_init, dtype=np.intp)
    entered = np.full(n_runs, -1, dtype=np.intp)
    active = np.arange(n_runs)
    for _ in range(MAX_STEPS):
        m = (pq[active] * G_d + gd[active]) * G_a + ga[active]
        k = class_id[m]
        done = k >= 0
        if done.any():
            entered[active[done]] = k[done]
            keep = ~done
            active = active[keep]
            if active.size == 0:
                break
        apq, agd, aga = pq[active], gd[active], ga[active]
        o_d = _row_pick(cum_od, apq, rng.random(active.size))
        o_a = _row_pick(cum_oa, apq, rng.random(active.size))
        j_d = (rng.random(active.size)[:, None] > cum_md[agd, o_d]).sum(axis=1)
        j_a = (rng.random(active.size)[:, None] > cum_ma[aga, o_a]).sum(axis=1)
        gd[active], u_d = np.divmod(j_d, U_d)
        ga[active], u_a = np.divmod(j_a, U_a)
        rows = cum_t[apq, u_d, u_a]
        pq[active] = (rng.random(active.size)[:, None] > rows).sum(axis=1)
    if active.size:
        raise SimulationError(
            f"{active.size} rollouts did not absorb within {MAX_STEPS} steps"
        )
    counts = np.bincount(entered, minlength=len(analysis.classes))
    successes = int(counts[feasible].sum()) if feasible.size else 0
    estimate = successes / n_runs
    return estimate, wilson_interval(successes, n_runs), counts
