"""The population-matrix operators one at a time on a tiny problem.

Run: python tutorials/02_ga_operators.py
"""
import numpy as np

from gapa.ga import MAXIMIZE, crossover, eda_sample, elitism, init_population, mutate, roulette_select
from gapa.rng import RngPolicy

rng = RngPolicy(seed=3)
pool_size, s, k = 12, 6, 4
target = 30


def fitness(pop):
    return -np.abs(pop.sum(axis=1) - target).astype(float)


pop = init_population(pool_size, s, k, rng)
fit = fitness(pop)
print("initial population\n", pop, "\nfitness", fit)

partners = roulette_select(pop, fit, MAXIMIZE, rng, generation=1)
c_pop = crossover(pop, partners, 0.6, rng, generation=1)
m_pop = mutate(c_pop, 0.2, pool_size, rng, generation=1)
pop, fit = elitism(pop, m_pop, fit, fitness(m_pop), MAXIMIZE)
print("after one generation\n", pop, "\nfitness", fit)

# the estimation-of-distribution step resamples each locus from the elite
sampled = eda_sample(pop, 3, pool_size, rng, generation=2)
print("EDA sample from the top 3 rows\n", sampled)
