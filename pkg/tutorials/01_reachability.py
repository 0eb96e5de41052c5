"""Reachability closure by repeated squaring, and what it says about components.

Run: python tutorials/01_reachability.py
"""
import math

import numpy as np

from gapa.datasets import load_dataset
from gapa.fitness import accessibility_matrix
from gapa.graph import Graph, NODE_REMOVAL, Perturbation, apply_perturbation, build_gene_pool, connected_components

# a path of 17 nodes has diameter 16, so squaring needs log2(16) = 4 products
# plus one more to notice nothing changed
path = Graph.from_edges(17, [(i, i + 1) for i in range(16)])
M, steps = accessibility_matrix(path.adjacency(), return_steps=True)
print(f"P17: closure all ones = {M.all()}, squarings = {steps}, bound = {math.ceil(math.log2(16)) + 1}")

karate = load_dataset("karate")
M = accessibility_matrix(karate.adjacency())
print("karate row sums (component sizes):", sorted(set(M.sum(axis=1).tolist())))

# knock out the two hubs and read the largest component off the row sums
pool = build_gene_pool(karate, NODE_REMOVAL)
hubs = np.argsort(-karate.degrees())[:2]
A = apply_perturbation(karate.adjacency(), Perturbation(pool, hubs))
M = accessibility_matrix(A)
print(f"without nodes {karate.labels[hubs[0]]} and {karate.labels[hubs[1]]}: "
      f"MCN = {M.sum(axis=1).max()}, components = {len(connected_components(A))}")

# the six-degrees shortcut stops after three squarings
_, fast_steps = accessibility_matrix(karate.adjacency(), fast=True, return_steps=True)
print("fast mode squarings:", fast_steps)
