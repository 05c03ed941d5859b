"""Shared helpers for the test modules."""

import numpy as np


def random_measure(gen, n, lo=-3.0, hi=3.0):
    from betaforge.tridiag import AtomicMeasure

    while True:
        x = gen.uniform(lo, hi, size=n)
        if n == 1 or np.min(np.diff(np.sort(x))) > 1e-2 * (hi - lo):
            break
    w = gen.dirichlet(np.full(n, 2.0))
    return AtomicMeasure(x, w / w.sum())
