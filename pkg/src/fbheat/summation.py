"""Compensated (Neumaier) accumulation for scalar and array-valued series."""

from __future__ import annotations

import numpy as np


def two_sum(a, b):
    """Error-free transformation: returns (s, e) with s = fl(a + b), a + b = s + e."""
    s = a + b
    bp = s - a
    e = (a - (s - bp)) + (b - bp)
    return s, e


class Accumulator:
    """Running compensated sum; works elementwise on numpy arrays.

    The compensation term is kept separately so that adding many terms of
    alternating sign does not lose the low-order bits of the partial sum.
    """

    def __init__(self, shape=()):
        self.s = np.zeros(shape)
        self.c = np.zeros(shape)

    def add(self, term):
        s, e = two_sum(self.s, term)
        self.s = s
        self.c = self.c + e

    @property
    def value(self):
        return self.s + self.c


def compensated_sum(terms, axis=0):
    """Sum ``terms`` along ``axis`` with Neumaier compensation."""
    terms = np.moveaxis(np.asarray(terms, dtype=float), axis, 0)
    acc = Accumulator(terms.shape[1:])
    for term in terms:
        acc.add(term)
    return acc.value
