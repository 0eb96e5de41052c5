"""Same seed, five topologies, one answer; plus where the time goes.

Run: python tutorials/06_parallel_modes.py
"""
import numpy as np

from gapa.datasets import load_dataset
from gapa.fitness import SixDSTFitness
from gapa.ga import GAParams
from gapa.graph import NODE_REMOVAL, budget, build_gene_pool
from gapa.parallel import ModeTopology, overhead_report, run

g = load_dataset("ba100")
pool = build_gene_pool(g, NODE_REMOVAL)
params = GAParams(pc=0.5, pm=0.3, s=40, k=budget(g, NODE_REMOVAL, 0.1), iterations=30,
                  direction="minimize", seed=5)

results = {}
for topo in (ModeTopology("serial"), ModeTopology("S"), ModeTopology("SM", pn=4),
             ModeTopology("M", pn=2), ModeTopology("MNM", pn=2, qn=2)):
    r = run(params, pool, SixDSTFitness(g, pool), topo)
    results[topo.mode] = r
    print(f"{topo.mode:6s} pn={r.pn} qn={r.qn}  best MCN {r.best_fitness:g}  wall {r.wall_time:.3f}s")

ref = results["S"].population
print("identical final populations:", all(np.array_equal(r.population, ref) for r in results.values()))

for mode in ("SM", "M"):
    rows = overhead_report(results[mode])
    totals = {key: sum(row[key] for row in rows) for key in ("compute", "exchange", "lifecycle")}
    print(mode, "time split:", ", ".join(f"{key} {value:.3f}s" for key, value in totals.items()))
