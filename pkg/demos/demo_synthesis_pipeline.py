"""The full synthesis pipeline on the grid benchmark.

Game -> product with the Rabin automaton -> candidate controller
structures -> max-min selection -> parameter optimization.  The
worst-case satisfaction probability never decreases along the way.
"""

from fscsynth.chain import compose_gmc, satisfaction_probability
from fscsynth.dra import builtin_paper_dra
from fscsynth.fsc import softmax_policy, uniform_policy
from fscsynth.posg import GridSpec, make_grid_posg
from fscsynth.product import build_product, prune_unreachable
from fscsynth.synthesis import generate_candidates, maxmin_select, optimize_parameters

game = make_grid_posg(GridSpec(m=3, n=2, unsafe=4, goal=5))
product = prune_unreachable(build_product(game, builtin_paper_dra()))
print(f"product: {product.n_states} reachable states")

candidates = generate_candidates(product, g_def=2, g_adv=1)
print(f"candidate structure pairs: {len(candidates.pairs)}")

st_def, value, st_adv = maxmin_select(product, candidates)
used = sorted({st_def.actions[u] for u in st_def.indicator.nonzero()[3]})
print(f"selected defender supports actions {used}")
print(f"worst-case value under uniform policies: {value:.4f}")

chain = compose_gmc(product, uniform_policy(st_def), uniform_policy(st_adv))
print(f"check: composed chain satisfaction = {satisfaction_probability(chain):.4f}")

phi, trace = optimize_parameters(
    product, st_def, st_adv, steps=20, step_size=0.5, fd_eps=1e-3
)
print(f"optimizer: {trace[0]:.4f} -> {trace[-1]:.4f} over {len(trace) - 1} steps")
tuned = compose_gmc(
    product, softmax_policy(st_def, phi), uniform_policy(st_adv)
)
print(f"tuned defender vs uniform adversary: {satisfaction_probability(tuned):.4f}")
