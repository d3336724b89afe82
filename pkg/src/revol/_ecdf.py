"""Order-statistic forms of the one-sample KS and Cramer-von Mises statistics.

Both operate on probability-integral transforms u_(1) <= ... <= u_(n): under
the null the u's are uniform on [0, 1].
"""

import numpy as np


def sup_gap_to_uniform(u_sorted):
    """sup |F_n - u| for the empirical CDF of sorted uniforms ``u_sorted``.

    Supports a trailing sample axis: for a 2-d input the statistic is computed
    row-wise over axis 1.
    """
    u = np.asarray(u_sorted, dtype=float)
    n = u.shape[-1]
    if n == 0:
        raise ValueError("empty sample")
    i = np.arange(1, n + 1, dtype=float)
    upper = i / n - u
    lower = u - (i - 1.0) / n
    return np.maximum(upper, lower).max(axis=-1)


def cvm_to_uniform(u_sorted):
    """W^2 = 1/(12n) + sum_i (u_(i) - (2i-1)/(2n))^2, row-wise on the last axis."""
    u = np.asarray(u_sorted, dtype=float)
    n = u.shape[-1]
    if n == 0:
        raise ValueError("empty sample")
    i = np.arange(1, n + 1, dtype=float)
    return 1.0 / (12.0 * n) + ((u - (2.0 * i - 1.0) / (2.0 * n)) ** 2).sum(axis=-1)
