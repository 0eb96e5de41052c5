"""Critical node detection on a scale-free graph with SixDST and PC fitness.

Run: python tutorials/03_network_dismantling.py
"""
import numpy as np

from gapa.datasets import load_dataset
from gapa.fitness import PCFitness, SixDSTFitness, mcn
from gapa.ga import GAParams, run_ga
from gapa.graph import NODE_REMOVAL, Perturbation, apply_perturbation, budget, build_gene_pool

g = load_dataset("ba500")
pool = build_gene_pool(g, NODE_REMOVAL)
k = budget(g, NODE_REMOVAL, 0.1)
print(f"{g}, removing {k} nodes")

rng = np.random.default_rng(0)
random_mcn = [mcn(apply_perturbation(g.adjacency(), Perturbation(pool, rng.choice(g.n, k, replace=False))))
              for _ in range(20)]
print("random removals, median MCN:", np.median(random_mcn))

params = GAParams(pc=0.5, pm=0.3, s=80, k=k, iterations=150, direction="minimize", seed=0)
result = run_ga(params, pool, SixDSTFitness(g, pool))
print(f"SixDST GA: MCN {result.best_fitness:g} after {params.iterations} generations")

result = run_ga(params, pool, PCFitness(g, pool))
print(f"pairwise-connectivity GA: PC {result.best_fitness:g} (intact graph: {g.n * (g.n - 1) // 2})")
