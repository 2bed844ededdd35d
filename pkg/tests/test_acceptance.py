"""End-to-end acceptance checks.

Each test prints one "criterion NN: PASS/FAIL" line with its headline
measurement, then asserts.  Expected values come from independent
oracles computed inside the test, never from the code under test.
"""

import time
from fractions import Fraction
from itertools import product as iter_product

import numpy as np

from fscsynth.chain import (
    absorption_probabilities,
    check_proposition1,
    compose_gmc,
    recurrent_classes,
    satisfaction_probability,
    strongly_connected_components,
)
from fscsynth.dra import all_letters, builtin_paper_dra, dra_accepts_lasso
from fscsynth.fsc import (
    fully_connected_structure,
    softmax_policy,
    uniform_policy,
)
from fscsynth.ltl import LassoWord, eval_lasso, parse_ltl
from fscsynth.posg import GridSpec, make_grid_posg
from fscsynth.product import ProductPOSG, build_product, prune_unreachable
from fscsynth.simulate import estimate_satisfaction
from fscsynth.synthesis import (
    CandidateSet,
    enumerate_structures,
    generate_candidates,
    maxmin_select,
    optimize_parameters,
)
from helpers import (
    oracle_recurrent_classes,
    oracle_scc_partition,
    random_chain,
    random_dra,
    random_fsc,
    random_posg,
    random_structure,
)

AP = frozenset({"goal", "unsafe"})


def report(number, ok, detail):
    print(f"criterion {number:02d}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


def grid_product():
    g = make_grid_posg(GridSpec(m=3, n=2, unsafe=4, goal=5))
    return prune_unreachable(build_product(g, builtin_paper_dra()))


def test_criterion_01_grid_fidelity():
    started = time.monotonic()
    g = make_grid_posg(GridSpec(m=3, n=2, unsafe=4, goal=5))
    R, L, U, D = range(4)
    A, NA = range(2)
    half = float((1 - Fraction(4, 5)) / 2)
    half_a = float((1 - Fraction(3, 5)) / 2)
    third = float((1 - Fraction(4, 5)) / 3)
    third_a = float((1 - Fraction(3, 5)) / 3)
    ok = (
        g.trans[0, R, NA, 1] == 0.8
        and g.trans[0, R, NA, 0] == half
        and g.trans[0, R, NA, 3] == half
        and g.trans[0, R, A, 1] == 0.6
        and g.trans[0, R, A, 0] == half_a
        and g.trans[0, R, A, 3] == half_a
        and g.trans[1, U, NA, 4] == 0.8
        and g.trans[1, U, NA, 0] == third
        and g.trans[1, U, NA, 2] == third
        and g.trans[1, U, NA, 1] == third
        and g.trans[1, U, A, 4] == 0.6
        and g.trans[1, U, A, 0] == third_a
        and g.trans[0, L, NA, 0] == 1.0
        and g.trans[0, D, A, 0] == 1.0
        and bool((g.o_def[:, 0] == 0.8).all())
        and bool((g.o_def[:, 1] == 0.2).all())
        and bool((g.o_adv[:, 0] == 0.6).all())
        and bool((g.o_adv[:, 1] == 0.4).all())
    )
    elapsed = time.monotonic() - started
    report(1, ok and elapsed < 1.0, f"grid kernel fidelity, {elapsed:.3f}s")


def test_criterion_02_ltl_dra_cross_oracle():
    started = time.monotonic()
    formula = parse_ltl("(G ! unsafe) & (G F goal)", AP)
    automaton = builtin_paper_dra()
    letters = all_letters(AP)
    words = checked = agreed = 0
    for plen in range(0, 4):
        for clen in range(1, 4):
            for prefix in iter_product(letters, repeat=plen):
                for cycle in iter_product(letters, repeat=clen):
                    w = LassoWord(prefix, cycle)
                    words += 1
                    checked += 1
                    if eval_lasso(formula, w, ap=AP) == dra_accepts_lasso(
                        automaton, w
                    ):
                        agreed += 1
    elapsed = time.monotonic() - started
    ok = words == 85 * 84 and agreed == checked and elapsed < 10.0
    report(2, ok, f"{agreed}/{checked} lasso words agree, {elapsed:.2f}s")


def test_criterion_03_scc_partition_oracle():
    started = time.monotonic()
    rng = np.random.default_rng(100)
    mismatches = 0
    for _ in range(200):
        n = int(rng.integers(2, 51))
        adj = rng.random((n, n)) < rng.uniform(0.05, 0.5)
        succ = [list(np.nonzero(adj[i])[0]) for i in range(n)]
        _, comps = strongly_connected_components(succ)
        if {frozenset(c) for c in comps} != oracle_scc_partition(adj):
            mismatches += 1
    elapsed = time.monotonic() - started
    ok = mismatches == 0 and elapsed < 10.0
    report(3, ok, f"200 digraphs, {mismatches} mismatches, {elapsed:.2f}s")


def test_criterion_04_composition_brute_force():
    started = time.monotonic()
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(50):
        p = build_product(random_posg(rng, max_states=3), random_dra(rng))
        g_d = int(rng.integers(1, 3))
        g_a = int(rng.integers(1, 3))
        c_def = random_fsc(rng, "def", g_d, p.obs_def, p.u_def)
        c_adv = random_fsc(rng, "adv", g_a, p.obs_adv, p.u_adv)
        chain = compose_gmc(p, c_def, c_adv)
        n_o_d, n_o_a = len(p.obs_def), len(p.obs_adv)
        n_u_d, n_u_a = len(p.u_def), len(p.u_adv)
        for m in range(chain.n_states):
            pq, gd, ga = chain.decode(m)
            for m2 in range(chain.n_states):
                pq2, gd2, ga2 = chain.decode(m2)
                total = 0.0
                for od in range(n_o_d):
                    for oa in range(n_o_a):
                        for ud in range(n_u_d):
                            for ua in range(n_u_a):
                                total += (
                                    p.o_def[pq, od]
                                    * p.o_adv[pq, oa]
                                    * c_def.policy[gd, od, gd2, ud]
                                    * c_adv.policy[ga, oa, ga2, ua]
                                    * p.trans[pq, ud, ua, pq2]
                                )
                worst = max(worst, abs(chain.trans[m, m2] - total))
    elapsed = time.monotonic() - started
    ok = worst <= 1e-12
    report(4, ok, f"50 instances, max entry error {worst:.2e}, {elapsed:.2f}s")


def test_criterion_05_monte_carlo_consistency():
    rng = np.random.default_rng(102)
    instances = []
    p = grid_product()
    st_def, _, st_adv = maxmin_select(p, generate_candidates(p, 2, 1))
    instances.append((p, uniform_policy(st_def), uniform_policy(st_adv)))
    for _ in range(20):
        q = prune_unreachable(
            build_product(random_posg(rng, max_states=4), builtin_paper_dra())
        )
        instances.append(
            (
                q,
                random_fsc(rng, "def", 2, q.obs_def, q.u_def),
                random_fsc(rng, "adv", 2, q.obs_adv, q.u_adv),
            )
        )
    worst_diff = worst_mass = 0.0
    worst_time = 0.0
    for k, (q, c_def, c_adv) in enumerate(instances):
        started = time.monotonic()
        chain = compose_gmc(q, c_def, c_adv)
        exact = satisfaction_probability(chain)
        analysis = recurrent_classes(chain)
        probs = absorption_probabilities(chain, analysis)
        worst_mass = max(worst_mass, abs(probs.sum() - 1.0))
        estimate, _, _ = estimate_satisfaction(
            q, c_def, c_adv, n_runs=10**5, seed=k
        )
        worst_diff = max(worst_diff, abs(estimate - exact))
        worst_time = max(worst_time, time.monotonic() - started)
    ok = worst_diff <= 0.01 and worst_mass <= 1e-9 and worst_time < 60.0
    report(
        5,
        ok,
        f"21 instances, max |MC-exact| {worst_diff:.4f}, "
        f"max mass defect {worst_mass:.1e}, slowest {worst_time:.1f}s",
    )


def test_criterion_06_qualitative_iff():
    rng = np.random.default_rng(103)
    bad = 0
    for _ in range(100):
        chain = random_chain(rng, max_states=12)
        analysis = recurrent_classes(chain)
        value = satisfaction_probability(chain)
        verdict, _ = check_proposition1(chain, analysis)
        if (value > 0) != verdict:
            bad += 1
    report(6, bad == 0, f"100 chains, {bad} iff violations")


def test_criterion_07_candidate_soundness():
    rng = np.random.default_rng(104)
    unsound = emitted = 0
    for _ in range(50):
        q = prune_unreachable(
            build_product(random_posg(rng, max_states=5), builtin_paper_dra())
        )
        for st_def, st_adv in generate_candidates(q, 1, 1).pairs:
            emitted += 1
            chain = compose_gmc(q, uniform_policy(st_def), uniform_policy(st_adv))
            feasible = False
            for cls in oracle_recurrent_classes(chain.trans):
                proj = {chain.proj_product(m) for m in cls}
                for L, K in chain.pairs:
                    if proj & K and not proj & L:
                        feasible = True
            if not feasible:
                unsound += 1
    started = time.monotonic()
    p = grid_product()
    cands = generate_candidates(p, 2, 1)
    _, value, _ = maxmin_select(p, cands)
    grid_elapsed = time.monotonic() - started
    ok = (
        unsound == 0
        and len(cands.pairs) >= 1
        and value > 0
        and grid_elapsed < 60.0
    )
    report(
        7,
        ok,
        f"{emitted} random-game pairs all feasible ({unsound} unsound), "
        f"grid: {len(cands.pairs)} pairs, value {value:.4f}, {grid_elapsed:.1f}s",
    )


def toy_product():
    # each single defender action can be pinned at state 0 by one
    # adversary action, so only a mixed defender support wins
    trans = np.array(
        [
            [[[1.0, 0.0], [0.1, 0.9]], [[0.2, 0.8], [1.0, 0.0]]],
            [[[0.0, 1.0], [0.5, 0.5]], [[0.3, 0.7], [0.0, 1.0]]],
        ]
    )
    return ProductPOSG(
        n_states=2,
        initial=0,
        u_def=("a", "b"),
        u_adv=("x", "y"),
        obs_def=("o0", "o1"),
        obs_adv=("o0", "o1"),
        ap=frozenset(),
        labels=(frozenset(), frozenset()),
        trans=trans,
        o_def=np.array([[0.7, 0.3], [0.4, 0.6]]),
        o_adv=np.array([[0.5, 0.5], [0.8, 0.2]]),
        pairs=((frozenset(), frozenset({1})),),
        origin=((0, 0), (1, 0)),
    )


def test_criterion_08_maxmin_brute_force():
    p = toy_product()
    defs = enumerate_structures("def", 1, p.obs_def, p.u_def)
    advs = enumerate_structures("adv", 1, p.obs_adv, p.u_adv)
    best_brute = -1.0
    for st_def in defs:
        worst = min(
            satisfaction_probability(
                compose_gmc(p, uniform_policy(st_def), uniform_policy(st_adv))
            )
            for st_adv in advs
        )
        best_brute = max(best_brute, worst)
    adv_full = fully_connected_structure("adv", 1, p.obs_adv, p.u_adv)
    cands = CandidateSet(pairs=[(st_def, adv_full) for st_def in defs])
    _, value, _ = maxmin_select(p, cands, exhaustive_adv=True)
    ok = value == best_brute and best_brute > 0
    report(8, ok, f"max-min {value:.6f} equals brute force {best_brute:.6f}")


def test_criterion_09_softmax_properties():
    rng = np.random.default_rng(105)
    worst_zero = worst_shift = 0.0
    for _ in range(100):
        st = random_structure(rng, "def", 2, ("o0", "o1"), ("a", "b", "c"))
        uni = uniform_policy(st).policy
        zero = softmax_policy(st, np.zeros(st.indicator.shape)).policy
        worst_zero = max(worst_zero, float(np.abs(zero - uni).max()))
        params = rng.normal(size=st.indicator.shape)
        shift = rng.normal(size=(st.indicator.shape[0], st.indicator.shape[1], 1, 1))
        a = softmax_policy(st, params).policy
        b = softmax_policy(st, params + shift).policy
        worst_shift = max(worst_shift, float(np.abs(a - b).max()))
    ok = worst_zero <= 1e-12 and worst_shift <= 1e-12
    report(
        9,
        ok,
        f"zero-vs-uniform gap {worst_zero:.1e}, shift gap {worst_shift:.1e}",
    )


def test_criterion_10_optimizer_monotone():
    started = time.monotonic()
    p = grid_product()
    st_def, _, st_adv = maxmin_select(p, generate_candidates(p, 2, 1))
    both_uniform = satisfaction_probability(
        compose_gmc(p, uniform_policy(st_def), uniform_policy(st_adv))
    )
    _, trace = optimize_parameters(
        p, st_def, st_adv, steps=50, step_size=0.5, fd_eps=1e-3
    )
    elapsed = time.monotonic() - started
    monotone = all(b >= a for a, b in zip(trace, trace[1:]))
    anchored = abs(trace[0] - both_uniform) <= 1e-9
    ok = monotone and anchored and len(trace) == 51
    report(
        10,
        ok,
        f"trace {trace[0]:.4f} -> {trace[-1]:.4f} over 50 steps, "
        f"monotone={monotone}, {elapsed:.1f}s",
    )
