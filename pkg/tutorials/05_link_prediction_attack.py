"""Hide 10% of edges, then remove training edges to blunt the RA predictor.

Run: python tutorials/05_link_prediction_attack.py
"""
from gapa.datasets import load_dataset
from gapa.fitness import LPAFitness
from gapa.ga import GAParams, run_ga
from gapa.graph import EDGE_REMOVAL, Perturbation, apply_perturbation, budget, build_gene_pool
from gapa.linkpred import build_lp_split, lp_auc_precision, ra_scores

g = load_dataset("lesmis")
split = build_lp_split(g, 0.1, seed=0)
train = split.train
auc, precision = lp_auc_precision(split, ra_scores(train.adjacency()))
print(f"{len(split.test_edges)} hidden edges; unattacked AUC {auc:.3f}, precision {precision:.3f}")

pool = build_gene_pool(train, EDGE_REMOVAL)
params = GAParams(pc=0.7, pm=0.1, s=50, k=budget(train, EDGE_REMOVAL, 0.1), iterations=200,
                  direction="minimize", seed=0)
result = run_ga(params, pool, LPAFitness(split, pool))
A_att = apply_perturbation(train.adjacency(), Perturbation(pool, result.best))
auc, precision = lp_auc_precision(split, ra_scores(A_att))
print(f"after removing {params.k} edges: AUC {auc:.3f}, precision {precision:.3f}")
