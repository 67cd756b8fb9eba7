"""Compiled inner loops.

Both loops consume a pre-drawn block of gradient samples of shape
``(S, m, n)``; drawing the block in one call is equivalent to drawing the
samples one at a time, so the loops stay faithful to a one-sample-per-step
oracle.  If numba is unavailable the same code runs as plain Python.
"""
import math

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


@njit(cache=True)
def smd_tail_average(samples, gammas, radius, pref_w, mu, tail_start, d0, lam0, floor, trace):
    """Run mirror-descent steps ``s = 1..S`` and return the gamma-weighted tail average.

    ``trace`` must have length ``S`` (or 0 to skip) and receives ``||d_s||``.
    """
    S, m, n = samples.shape
    d = d0.copy()
    lam = lam0.copy()
    d_acc = np.zeros(n)
    lam_acc = np.zeros(m)
    w_acc = 0.0
    g_d = np.zeros(n)
    expo = np.zeros(m)
    for s in range(S):
        G = samples[s]
        gamma = gammas[s]
        for j in range(n):
            acc = 0.0
            for i in range(m):
                acc += lam[i] * G[i, j]
            if mu != 0.0:
                pref = 0.0
                for i in range(m):
                    pref += pref_w[i] * G[i, j]
                acc += mu * pref
            g_d[j] = acc + d[j]
        for i in range(m):
            acc = 0.0
            for j in range(n):
                acc += G[i, j] * d[j]
            expo[i] = gamma * acc
        # d update: projected descent step
        norm_sq = 0.0
        for j in range(n):
            d[j] = d[j] - gamma * g_d[j]
            norm_sq += d[j] * d[j]
        norm = math.sqrt(norm_sq)
        if norm > radius:
            scale = radius / norm
            for j in range(n):
                d[j] *= scale
        # lam update: exponentiated ascent step, max-shifted
        top = expo[0]
        for i in range(1, m):
            if expo[i] > top:
                top = expo[i]
        total = 0.0
        for i in range(m):
            lam[i] = lam[i] * math.exp(expo[i] - top)
            total += lam[i]
        for i in range(m):
            lam[i] = lam[i] / total
            if lam[i] < floor:
                lam[i] = floor
        if trace.shape[0] > 0:
            tn = 0.0
            for j in range(n):
                tn += d[j] * d[j]
            trace[s] = math.sqrt(tn)
        if s + 1 >= tail_start:
            w_acc += gamma
            for j in range(n):
                d_acc[j] += gamma * d[j]
            for i in range(m):
                lam_acc[i] += gamma * lam[i]
    for j in range(n):
        d_acc[j] /= w_acc
    for i in range(m):
        lam_acc[i] /= w_acc
    return d_acc, lam_acc


@njit(cache=True)
def simplex_projection(v):
    """Euclidean projection onto the probability simplex (sort-based)."""
    m = v.shape[0]
    u = np.sort(v)[::-1]
    css = 0.0
    theta = 0.0
    for i in range(m):
        css += u[i]
        t = (css - 1.0) / (i + 1)
        if u[i] - t > 0:
            theta = t
    out = np.empty(m)
    for i in range(m):
        out[i] = max(v[i] - theta, 0.0)
    return out


@njit(cache=True)
def sdmgrad_lite_loop(samples, gamma, lam0):
    """Projected SGD on the min-norm weights with three draws per step.

    ``samples`` has shape ``(S, 3, m, n)``: draws one and two form the Gram
    estimate ``G1 G2^T`` used for the weight step; draw three feeds the running
    direction ``-mean_s G3_s^T lam_s``.
    """
    S = samples.shape[0]
    m = samples.shape[2]
    n = samples.shape[3]
    lam = lam0.copy()
    direction = np.zeros(n)
    for s in range(S):
        G1 = samples[s, 0]
        G2 = samples[s, 1]
        G3 = samples[s, 2]
        v = np.zeros(n)
        for j in range(n):
            acc = 0.0
            for i in range(m):
                acc += lam[i] * G2[i, j]
            v[j] = acc
        step = np.empty(m)
        for i in range(m):
            acc = 0.0
            for j in range(n):
                acc += G1[i, j] * v[j]
            step[i] = lam[i] - gamma * acc
        lam = simplex_projection(step)
        for j in range(n):
            acc = 0.0
            for i in range(m):
                acc += lam[i] * G3[i, j]
            direction[j] -= acc
    for j in range(n):
        direction[j] /= S
    return lam, direction
