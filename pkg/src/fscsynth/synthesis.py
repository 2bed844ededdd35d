"""Candidate controller-structure generation and max-min selection.

The generator walks the communicating classes of the chain induced by a
pair of seed structures.  For each class and acceptance pair it rebuilds
all-ones indicators, prunes defender entries that can leak into states
the class must avoid and adversary entries that cannot prevent a return
to a state the class must keep visiting, and keeps the pruned pair when
a must-visit state stays recurrent and the rebuilt chain is verified to
have a feasible recurrent class.
"""

from dataclasses import dataclass, field
from itertools import combinations, product as iter_product

import numpy as np

from .chain import (
    adjacency,
    compose_gmc,
    phi_feasible_sets,
    recurrent_classes,
    satisfaction_probability,
)
from .fsc import FSC, FSCStructure, fully_connected_structure, softmax_policy, uniform_policy
from .product import ProductPOSG


class SynthesisError(ValueError):
    pass


@dataclass
class CandidateSet:
    pairs: list  # of (FSCStructure def, FSCStructure adv)
    diagnostics: list = field(default_factory=list)


def _viable(ind):
    return bool((ind.sum(axis=(2, 3)) >= 1).all())


def algorithm1(
    p: ProductPOSG,
    i0_def: FSCStructure,
    i0_adv: FSCStructure,
    prune_narrow=False,
) -> CandidateSet:
    """Generate admissible structure pairs from one pair of seed structures.

    Pruning positivity checks use the current indicators as the support
    of the uniform policies, so entries zeroed earlier in a sweep stop
    triggering later checks.  A pair whose pruned indicators lose an
    entire (g, o) row is discarded.  Emission requires both the literal
    recurrence test on a must-visit state and an independent feasibility
    check of the rebuilt chain.
    """
    if not i0_def.viable() or not i0_adv.viable():
        raise SynthesisError("seed structures must be viable")
    chain0 = compose_gmc(p, uniform_policy(i0_def), uniform_policy(i0_adv))
    analysis0 = recurrent_classes(chain0)
    succ0 = adjacency(chain0)
    n_od, n_oa = len(p.obs_def), len(p.obs_adv)
    n_ud, n_ua = len(p.u_def), len(p.u_adv)
    t_pos = p.trans > 0
    od_pos = p.o_def > 0
    oa_pos = p.o_adv > 0

    out, diags, seen = [], [], set()
    for ci, C in enumerate(analysis0.comps):
        cset = set(C)
        for pair_idx, (L, K) in enumerate(p.pairs):
            good = sorted(m for m in C if chain0.proj_product(m) in K)
            diag = {
                "scc": ci,
                "pair": pair_idx,
                "good": good,
                "bad": [],
                "emitted": False,
                "witness_class": None,
            }
            if not good:
                diags.append(diag)
                continue
            exits = {w for v in C for w in succ0[v] if w not in cset}
            bad = sorted(exits | {m for m in C if chain0.proj_product(m) in L})
            diag["bad"] = list(bad)

            ind_def = np.ones_like(i0_def.indicator)
            ind_adv = np.ones_like(i0_adv.indicator)
            s_good = good[0]
            pq_g, gd_g, ga_g = chain0.decode(s_good)
            remaining = list(bad)
            viable = True
            while remaining and viable:
                sp = remaining.pop(0)  # ascending dense-index order
                pq_p, gd_p, ga_p = chain0.decode(sp)
                for s in sorted(cset - set(remaining) - {sp}):
                    pq, gd, ga = chain0.decode(s)
                    # a defender action is forbidden if some adversary
                    # action lets the pair transition into the avoid state
                    for u in range(n_ud):
                        adv_ok = any(
                            t_pos[pq, u, v, pq_p]
                            and any(
                                oa_pos[pq, oa] and ind_adv[ga, oa, ga_p, v]
                                for oa in range(n_oa)
                            )
                            for v in range(n_ua)
                        )
                        if not adv_ok:
                            continue
                        for od in range(n_od):
                            if od_pos[pq, od] and ind_def[gd, od, gd_p, u]:
                                if prune_narrow:
                                    ind_def[gd, od, gd_p, u] = 0
                                else:
                                    ind_def[:, od, :, u] = 0
                    # an adversary action is useless if every defender
                    # action keeps a positive step into the keep state
                    for v in range(n_ua):
                        for oa in range(n_oa):
                            if not (oa_pos[pq, oa] and ind_adv[ga, oa, ga_g, v]):
                                continue
                            if all(
                                t_pos[pq, u, v, pq_g]
                                and any(
                                    od_pos[pq, od] and ind_def[gd, od, gd_g, u]
                                    for od in range(n_od)
                                )
                                for u in range(n_ud)
                            ):
                                ind_adv[ga, oa, ga_g, v] = 0
                    if not (_viable(ind_def) and _viable(ind_adv)):
                        viable = False
                        break
            if not viable:
                diag["discarded"] = "pruning emptied a (g, o) row"
                diags.append(diag)
                continue

            st_def = FSCStructure(
                "def", p.obs_def, p.u_def, ind_def, i0_def.g_init
            )
            st_adv = FSCStructure(
                "adv", p.obs_adv, p.u_adv, ind_adv, i0_adv.g_init
            )
            chain_new = compose_gmc(p, uniform_policy(st_def), uniform_policy(st_adv))
            new_analysis = recurrent_classes(chain_new)
            good_recurrent = any(new_analysis.class_id[m] >= 0 for m in good)
            feasible = phi_feasible_sets(chain_new, new_analysis)
            if good_recurrent and feasible:
                diag["emitted"] = True
                diag["witness_class"] = feasible[0][0]
                diag["witness_pair"] = feasible[0][1]
                key = (st_def.key(), st_adv.key())
                if key not in seen:
                    seen.add(key)
                    out.append((st_def, st_adv))
            diags.append(diag)
    return CandidateSet(pairs=out, diagnostics=diags)


def single_action_structure(agent, n_internal, obs, actions, action, g_init=0):
    """Structure whose support allows only one action, at every (g, o)."""
    ind = np.zeros((n_internal, len(obs), n_internal, len(actions)), dtype=np.int8)
    ind[:, :, :, list(actions).index(action)] = 1
    return FSCStructure(agent, tuple(obs), tuple(actions), ind, g_init)


def default_seed_structures(p: ProductPOSG, g_def, g_adv):
    """Seed family for candidate generation.

    The fully connected pair alone tends to over-prune when every
    defender action is risky from somewhere in a large communicating
    class, so single-action defender seeds are tried as well; their
    sparser digraphs expose small classes around the must-visit states.
    """
    adv = fully_connected_structure("adv", g_adv, p.obs_adv, p.u_adv)
    seeds = [(fully_connected_structure("def", g_def, p.obs_def, p.u_def), adv)]
    for u in p.u_def:
        seeds.append(
            (single_action_structure("def", g_def, p.obs_def, p.u_def, u), adv)
        )
    return seeds


def generate_candidates(
    p: ProductPOSG, g_def, g_adv, seeds=None, prune_narrow=False
) -> CandidateSet:
    """Union of algorithm1 outputs over a family of seed structure pairs."""
    if seeds is None:
        seeds = default_seed_structures(p, g_def, g_adv)
    merged = CandidateSet(pairs=[])
    seen = set()
    for i0_def, i0_adv in seeds:
        cs = algorithm1(p, i0_def, i0_adv, prune_narrow=prune_narrow)
        for pair in cs.pairs:
            key = (pair[0].key(), pair[1].key())
            if key not in seen:
                seen.add(key)
                merged.pairs.append(pair)
        merged.diagnostics.extend(cs.diagnostics)
    return merged


def algorithm2(chain, class_states):
    """States of a recurrent class to visit often in steady state.

    For every acceptance pair whose L set misses the class, the class
    states projecting into that pair's K set are collected.
    """
    proj = {m: chain.proj_product(m) for m in class_states}
    out = set()
    for L, K in chain.pairs:
        if any(proj[m] in L for m in class_states):
            continue
        out |= {m for m in class_states if proj[m] in K}
    return out


def enumerate_structures(agent, n_internal, obs, actions, g_init=0):
    """All viable indicators of the given size (exponential; tiny use only)."""
    rows = n_internal * len(obs)
    per_row = n_internal * len(actions)
    cells = list(range(per_row))
    row_choices = [
        c for r in range(1, per_row + 1) for c in combinations(cells, r)
    ]
    out = []
    for combo in iter_product(row_choices, repeat=rows):
        ind = np.zeros((n_internal, len(obs), n_internal, len(actions)), dtype=np.int8)
        flat = ind.reshape(rows, per_row)
        for r, chosen in enumerate(combo):
            for c in chosen:
                flat[r, c] = 1
        out.append(FSCStructure(agent, tuple(obs), tuple(actions), ind, g_init))
    return out


def _value(p, st_def, st_adv):
    return satisfaction_probability(
        compose_gmc(p, uniform_policy(st_def), uniform_policy(st_adv))
    )


def maxmin_select(p: ProductPOSG, candidates: CandidateSet, exhaustive_adv=False):
    """Pick the defender structure with the best worst-case value.

    The adversary ranges over structures seen in the candidate set plus
    the fully connected one of the same size (or over every viable
    structure of that size when exhaustive_adv is set).  Ties break
    lexicographically on the flattened indicator.
    """
    if not candidates.pairs:
        raise SynthesisError("empty candidate set")
    def_structs, seen = [], set()
    for st_def, _ in candidates.pairs:
        if st_def.key() not in seen:
            seen.add(st_def.key())
            def_structs.append(st_def)
    adv0 = candidates.pairs[0][1]
    if exhaustive_adv:
        adv_structs = enumerate_structures(
            "adv", adv0.n_internal, adv0.obs, adv0.actions, adv0.g_init
        )
    else:
        adv_structs, seen_a = [], set()
        for _, st_adv in candidates.pairs:
            if st_adv.key() not in seen_a:
                seen_a.add(st_adv.key())
                adv_structs.append(st_adv)
        full = fully_connected_structure(
            "adv", adv0.n_internal, adv0.obs, adv0.actions, adv0.g_init
        )
        if full.key() not in seen_a:
            adv_structs.append(full)

    best = None
    for st_def in def_structs:
        responses = [(_value(p, st_def, st_adv), st_adv) for st_adv in adv_structs]
        worst, response = min(responses, key=lambda t: t[0])
        entry = (worst, tuple(st_def.indicator.flatten()), st_def, response)
        if best is None or entry[0] > best[0] or (
            entry[0] == best[0] and entry[1] < best[1]
        ):
            best = entry
    return best[2], best[0], best[3]


def optimize_parameters(
    p: ProductPOSG,
    st_def: FSCStructure,
    st_adv: FSCStructure,
    steps: int,
    step_size: float,
    fd_eps: float,
    seed: int = 0,
    inner_steps: int = 5,
):
    """Finite-difference alternation on softmax parameters.

    The defender ascends its worst-case value by central differences on
    its parameter table; the adversary replies with the same descent
    scheme on its own table, warm-started across outer iterations.  A
    proposal is accepted only when the recomputed worst case does not
    drop, so the returned trace is nondecreasing.  Deterministic for a
    given seed (the seed is folded into nothing stochastic today but is
    part of the interface for reproducibility).
    """
    if step_size <= 0 or fd_eps <= 0:
        raise SynthesisError("step_size and fd_eps must be positive")
    if not st_def.viable() or not st_adv.viable():
        raise SynthesisError("structures must be viable")
    del seed  # scheme is deterministic
    supp_d = np.argwhere(st_def.indicator > 0)
    supp_a = np.argwhere(st_adv.indicator > 0)
    phi_d = np.zeros(st_def.indicator.shape)
    phi_a = np.zeros(st_adv.indicator.shape)

    def value(pd, pa):
        return satisfaction_probability(
            compose_gmc(p, softmax_policy(st_def, pd), softmax_policy(st_adv, pa))
        )

    def grad(f, params, support):
        g = np.zeros_like(params)
        for idx in support:
            idx = tuple(idx)
            hi, lo = params.copy(), params.copy()
            hi[idx] += fd_eps
            lo[idx] -= fd_eps
            g[idx] = (f(hi) - f(lo)) / (2 * fd_eps)
        return g

    def best_response(pd, pa):
        v = value(pd, pa)
        for _ in range(inner_steps):
            g = grad(lambda x: value(pd, x), pa, supp_a)
            cand = pa - step_size * g
            vc = value(pd, cand)
            if vc < v:
                pa, v = cand, vc
            else:
                break
        return pa, v

    trace = [value(phi_d, phi_a)]
    for _ in range(steps):
        g = grad(lambda x: value(x, phi_a), phi_d, supp_d)
        cand_d = phi_d + step_size * g
        pa_new, v_new = best_response(cand_d, phi_a)
        if v_new >= trace[-1]:
            phi_d, phi_a = cand_d, pa_new
            trace.append(v_new)
        else:
            trace.append(trace[-1])
    return phi_d, trace
