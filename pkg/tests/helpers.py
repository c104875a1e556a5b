"""Random instance builders and brute-force references shared by the tests."""

from fractions import Fraction
from itertools import product

import numpy as np

from dynamo_drift.dynclust import DynamicCluster, MicroCluster

DYADIC_SPANS = (0.5, 1.0, 2.0, 4.0)


def micro(count, spans, centre=None, t=1.0):
    spans = np.asarray(spans, dtype=float)
    centre = np.zeros(spans.size) if centre is None else np.asarray(centre, dtype=float)
    return MicroCluster(np.tile(centre, (count, 1)), t, t, spans)


def random_clusters(rng, exact=True):
    """Up to 10 clusters of up to 8 micro-clusters each.

    With ``exact`` the densities are small dyadic rationals, so ties between
    cluster means are common and representable.
    """
    out = []
    for c in range(int(rng.integers(1, 11))):
        members = []
        for _ in range(int(rng.integers(1, 9))):
            m = 2
            if exact:
                spans = rng.choice(DYADIC_SPANS, size=m)
            else:
                spans = rng.uniform(0.01, 3.0, size=m)
            members.append(micro(int(rng.integers(1, 9)), spans))
        out.append(DynamicCluster(tuple(members), 1, c + 1))
    return out


def brute_force_densest(clusters):
    """Index of the cluster with the largest exact mean member density."""
    means = []
    for c in clusters:
        dens = [Fraction(mc.count) / Fraction(float(np.prod(mc.spans))) for mc in c.members]
        means.append(sum(dens) / len(dens))
    best = max(means)
    return next(i for i, v in enumerate(means) if v == best)


def components_by_enumeration(n_nodes, edge):
    """Connected components by transitive closure over all node pairs."""
    reach = [[i == j or edge(i, j) for j in range(n_nodes)] for i in range(n_nodes)]
    for k, i, j in product(range(n_nodes), repeat=3):
        if reach[i][k] and reach[k][j]:
            reach[i][j] = True
    comps, seen = [], set()
    for i in range(n_nodes):
        if i not in seen:
            comp = sorted(j for j in range(n_nodes) if reach[i][j])
            seen.update(comp)
            comps.append(comp)
    return comps
