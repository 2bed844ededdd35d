"""Build the grid benchmark game and look at its moving parts.

A defender walks an M x N grid toward a goal cell while avoiding an
unsafe cell; an adversary can degrade the defender's actuation.  Both
players only see a noisy "correct"/"wrong" signal about the position.
"""

from fscsynth.posg import GridSpec, make_grid_posg, validate_posg

spec = GridSpec(m=3, n=2, unsafe=4, goal=5)
game = make_grid_posg(spec)

print(f"grid {spec.m}x{spec.n}: {game.n_states} states, initial {game.initial}")
print(f"defender actions: {game.u_def}, adversary actions: {game.u_adv}")
print(f"labels: goal at 5 -> {sorted(game.labels[5])}, unsafe at 4 -> {sorted(game.labels[4])}")

# moving right from the corner succeeds with 0.8, or 0.6 under attack;
# the remainder spreads over the cell and its other neighbors
R, A, NA = 0, 0, 1
print("\nfrom cell 0, action R, not attacked:")
for s2, p in enumerate(game.trans[0, R, NA]):
    if p > 0:
        print(f"  -> cell {s2} with probability {p}")
print("from cell 0, action R, attacked:")
for s2, p in enumerate(game.trans[0, R, A]):
    if p > 0:
        print(f"  -> cell {s2} with probability {p}")

# stepping off the edge keeps the defender in place with certainty
L = 1
print(f"\nfrom cell 0, action L (off the grid): stays with {game.trans[0, L, NA, 0]}")

print(f"\nobservation likelihoods: defender {game.o_def[0]}, adversary {game.o_adv[0]}")
print(f"validation report: {validate_posg(game) or 'clean'}")
