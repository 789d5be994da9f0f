"""Pure-numpy fallback for the CRP Gibbs sweep.

Mirrors the compiled kernel in swipeguard._crp operation-for-operation: one
uniform draw per sample, removal before weighting, swap-delete of emptied
components, cumulative-sum sampling. Kept importable everywhere so the
package works without a C toolchain.
"""

import numpy as np


def crp_gibbs_sweep(data, assign, counts, sums, k_active, log_alpha,
                    mu0, mu0_tau0, tau0, tau, vary, new_logconst, new_inv, u):
    """Run one full Gibbs sweep in fixed ascending sample order.

    All state arrays are mutated in place; returns the new active component
    count. counts/sums have capacity n + 1 so a new component can always be
    opened. log_alpha / new_logconst / new_inv are precomputed by the caller
    so both backends score against identical constants.
    """
    n, d = data.shape

    for i in range(n):
        x = data[i]
        k_old = assign[i]
        counts[k_old] -= 1
        sums[k_old] -= x
        if counts[k_old] == 0:
            last = k_active - 1
            if k_old != last:
                counts[k_old] = counts[last]
                sums[k_old] = sums[last]
                assign[assign == last] = k_old
            counts[last] = 0
            sums[last] = 0.0
            k_active = last

        k = k_active
        nk = counts[:k].astype(float)[:, None]          # (k, 1)
        denom = nk * tau + tau0                          # (k, d)
        m = (sums[:k] * tau + mu0_tau0) / denom
        v = 1.0 / denom + vary
        diff = x - m
        logw = np.empty(k + 1)
        logw[:k] = (
            np.log(counts[:k])
            - 0.5 * np.sum(np.log(2.0 * np.pi * v) + diff * diff / v, axis=1)
        )
        dx = x - mu0
        logw[k] = log_alpha + new_logconst - 0.5 * np.sum(dx * dx * new_inv)

        w = np.exp(logw - logw.max())
        cum = np.cumsum(w)
        pick = int(np.searchsorted(cum, u[i] * cum[-1], side="right"))
        if pick > k:
            pick = k

        assign[i] = pick
        counts[pick] += 1
        sums[pick] += x
        if pick == k:
            k_active += 1

    return k_active
