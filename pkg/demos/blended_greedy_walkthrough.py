"""
Greedy uncertainty-diversity blending, step by step
===================================================

The blended strategy scores each candidate as z = (1 - a) * u + a * v,
where u is detector uncertainty and v is the mean embedding distance to
everything already labelled plus everything picked so far. The weight a
starts neutral at 0.5 and decays every iteration by B / (2 * unlabelled),
shifting trust from diversity to the maturing detector's uncertainty.
"""

import numpy as np

from alsel import AlphaState, SelectorConfig, select_method2, update_alpha
from alsel.cli import alpha_schedule
from helpers_demo import toy_pool

pool, uncertainty = toy_pool()
print("pool of 8 images, 2-D embeddings, 2 already labelled\n")

config = SelectorConfig(budget=3, diversity_norm="max")
result = select_method2(pool, uncertainty, AlphaState(0.5), budget=3, config=config)

print("greedy audit trail (v is the raw mean distance; z blends its "
      "max-normalized form):")
print(f"{'pick':>4}  {'id':8s} {'u':>6} {'v':>6} {'z':>6}")
for rank, entry in enumerate(result.audit, start=1):
    v = "-" if entry["v"] is None else f"{entry['v']:.3f}"
    z = "-" if entry["z"] is None else f"{entry['z']:.3f}"
    print(f"{rank:>4}  {entry['id']:8s} {entry['u']:>6.3f} {v:>6} {z:>6}")
print("(the first pick is pure argmax uncertainty; v kicks in afterwards)\n")

# the weight schedule across a six-iteration campaign
state = AlphaState(0.5)
unlabelled, budget = 24344 - 2434, 1712
print("diversity-weight decay at campaign scale:")
print(f"  iteration 1 selects with a = {state.value:.6f}")
for step in range(1, 7):
    state = update_alpha(state, budget, unlabelled)
    unlabelled -= budget
    print(f"  iteration {step + 1} selects with a = {state.value:.6f}")

# the same sequence, via the one-call helper the CLI uses
print("\nalpha_schedule(0.5, 1712, 24344, 2434, 6) ->")
print(" ", np.round(alpha_schedule(0.5, 1712, 24344, 2434, 6), 6).tolist())
