"""Monte Carlo rollouts against the exact chain analysis.

Rollouts stop as soon as they enter a recurrent class of the composed
chain, whose feasibility decides acceptance.  The empirical frequency
must land on the absorption probability computed by linear algebra.
"""

from fscsynth.chain import (
    compose_gmc,
    phi_feasible_sets,
    recurrent_classes,
    satisfaction_probability,
)
from fscsynth.dra import builtin_paper_dra
from fscsynth.fsc import uniform_policy
from fscsynth.posg import GridSpec, make_grid_posg
from fscsynth.product import build_product, prune_unreachable
from fscsynth.simulate import estimate_satisfaction, simulate_episode
from fscsynth.synthesis import generate_candidates, maxmin_select

game = make_grid_posg(GridSpec(m=3, n=2, unsafe=4, goal=5))
product = prune_unreachable(build_product(game, builtin_paper_dra()))
st_def, value, st_adv = maxmin_select(product, generate_candidates(product, 2, 1))
c_def, c_adv = uniform_policy(st_def), uniform_policy(st_adv)

chain = compose_gmc(product, c_def, c_adv)
analysis = recurrent_classes(chain)
phi_feasible_sets(chain, analysis)
print(f"recurrent classes: {len(analysis.classes)}, feasible: {analysis.feasible}")
print(f"exact satisfaction probability: {satisfaction_probability(chain):.4f}")

episode = simulate_episode(product, c_def, c_adv, seed=42, analysis=analysis, chain=chain)
print(
    f"\none rollout (seed 42): {len(episode.states) - 1} steps, "
    f"entered class {episode.entered_class}, accepted={episode.accepted}"
)
print(f"first samples (o_def, o_adv, u_def, u_adv): {episode.samples[:3]}")

for runs in (1_000, 10_000, 100_000):
    estimate, (lo, hi), counts = estimate_satisfaction(
        product, c_def, c_adv, n_runs=runs, seed=7
    )
    print(f"{runs:7d} runs: estimate {estimate:.4f}, 95% interval [{lo:.4f}, {hi:.4f}]")
