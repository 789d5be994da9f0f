# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled CRP Gibbs sweep. Semantics mirror swipeguard._crp_py; the
sequential per-sample loop is the hot path that pure numpy cannot batch."""

from libc.math cimport log, exp, M_PI

import numpy as np


def crp_gibbs_sweep(double[:, ::1] data, long[::1] assign, long[::1] counts,
                    double[:, ::1] sums, int k_active, double log_alpha,
                    double[::1] mu0, double[::1] mu0_tau0, double[::1] tau0,
                    double[::1] tau, double[::1] vary, double new_logconst,
                    double[::1] new_inv, double[::1] u):
    cdef int n = data.shape[0]
    cdef int d = data.shape[1]
    cdef int i, j, k, k_old, last, pick
    cdef double acc, denom, m, v, diff, nk_tau, maxlog, total, r, cum
    cdef double[::1] logw = np.empty(n + 1, dtype=np.float64)

    for i in range(n):
        k_old = assign[i]
        counts[k_old] -= 1
        for j in range(d):
            sums[k_old, j] -= data[i, j]
        if counts[k_old] == 0:
            last = k_active - 1
            if k_old != last:
                counts[k_old] = counts[last]
                for j in range(d):
                    sums[k_old, j] = sums[last, j]
                for j in range(n):
                    if assign[j] == last:
                        assign[j] = k_old
            counts[last] = 0
            for j in range(d):
                sums[last, j] = 0.0
            k_active = last

        for k in range(k_active):
            nk_tau = <double>counts[k]
            acc = 0.0
            for j in range(d):
                denom = nk_tau * tau[j] + tau0[j]
                m = (sums[k, j] * tau[j] + mu0_tau0[j]) / denom
                v = 1.0 / denom + vary[j]
                diff = data[i, j] - m
                acc += log(2.0 * M_PI * v) + diff * diff / v
            logw[k] = log(<double>counts[k]) - 0.5 * acc
        acc = 0.0
        for j in range(d):
            diff = data[i, j] - mu0[j]
            acc += diff * diff * new_inv[j]
        logw[k_active] = log_alpha + new_logconst - 0.5 * acc

        maxlog = logw[0]
        for k in range(1, k_active + 1):
            if logw[k] > maxlog:
                maxlog = logw[k]
        total = 0.0
        for k in range(k_active + 1):
            logw[k] = exp(logw[k] - maxlog)
            total += logw[k]

        r = u[i] * total
        pick = k_active
        cum = 0.0
        for k in range(k_active + 1):
            cum += logw[k]
            if cum > r:
                pick = k
                break

        assign[i] = pick
        counts[pick] += 1
        for j in range(d):
            sums[pick, j] += data[i, j]
        if pick == k_active:
            k_active += 1

    return k_active
