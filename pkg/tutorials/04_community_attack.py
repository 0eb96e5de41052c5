"""Lower the modularity a greedy detector finds on Karate by rewiring 8 pairs.

Run: python tutorials/04_community_attack.py   (about 20 s)
"""
from gapa.community import detect_communities, modularity, nmi
from gapa.datasets import load_dataset
from gapa.fitness import CDAFitness
from gapa.ga import GAParams, run_ga
from gapa.graph import EDGE_FLIP, Perturbation, apply_perturbation, budget, build_gene_pool

g = load_dataset("karate")
A = g.adjacency()
before = detect_communities(A)
print(f"unattacked: Q = {modularity(A, before):.4f}, {before.n_communities} communities")

pool = build_gene_pool(g, EDGE_FLIP)
k = budget(g, EDGE_FLIP, 0.1)
params = GAParams(pc=0.8, pm=0.1, s=100, k=k, iterations=300, direction="minimize", seed=0)
result = run_ga(params, pool, CDAFitness(g, pool))

A_att = apply_perturbation(A, Perturbation(pool, result.best))
after = detect_communities(A_att)
print(f"attacked:   Q = {modularity(A_att, after):.4f}, {after.n_communities} communities, "
      f"NMI to the original partition = {nmi(before, after):.3f}")
for gene in sorted(set(result.best.tolist())):
    u, v = pool.genes[gene]
    action = "remove" if pool.present[gene] else "add"
    print(f"  {action} {g.labels[u]}-{g.labels[v]}")
