"""Brute-force oracles shared by the unit and acceptance suites.

These deliberately avoid the package's QR/reduceat code paths: coefficients
via explicit normal equations, covariance via an elementwise triple product
with Python-loop cluster sums.
"""

import numpy as np

from copolicy.estimators import DesignMatrix


def wls_normal_equation_oracle(X, y, w):
    XtW = X.T * w
    return np.linalg.solve(XtW @ X, XtW @ y)


def sandwich_oracle(X, y, w, clusters):
    beta = wls_normal_equation_oracle(X, y, w)
    resid = y - X @ beta
    n, k = X.shape
    bread = np.linalg.inv((X.T * w) @ X)
    labels = sorted(set(clusters))
    g = len(labels)
    meat = np.zeros((k, k))
    for lab in labels:
        s = np.zeros(k)
        for i in range(n):
            if clusters[i] == lab:
                s += w[i] * resid[i] * X[i]
        meat += np.outer(s, s)
    factor = (g / (g - 1)) * ((n - 1) / (n - k))
    return factor * bread @ meat @ bread


def random_instance(rng, n=None, k=None, clustered=True):
    n = n or int(rng.integers(20, 200))
    k = k or int(rng.integers(2, 10))
    X = rng.normal(size=(n, k))
    X[:, 0] = 1.0
    beta = rng.normal(size=k)
    y = X @ beta + rng.normal(size=n)
    w = rng.uniform(0.1, 10.0, size=n)
    if clustered:
        g = int(rng.integers(2, max(3, n // 4)))
        clusters = rng.integers(0, g, size=n)
    else:
        clusters = np.arange(n)
    return DesignMatrix(y=y, X=X, columns=[f"c{j}" for j in range(k)],
                        weights=w, cluster_ids=clusters)
