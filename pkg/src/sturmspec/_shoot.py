"""Fixed-step sixth-order Runge-Kutta kernels for the quasi-derivative system.

State per spectral parameter: ``u`` and ``v = u' - sigma*u``, with

    u' = sigma*u + v,    v' = -sigma*v - (sigma**2 + lam)*u.

``tab[i, c]`` holds sigma at ``x_i + OFFSETS[c]*h_i``; the node set is
symmetric under c -> 1-c, so the same table serves backward sweeps.
"""
import math

import numpy as np
from numba import njit

OFFSETS = np.array([0.0, 1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0])

# Butcher's 7-stage method of order 6
_A = np.array([
    [0, 0, 0, 0, 0, 0],
    [1 / 3, 0, 0, 0, 0, 0],
    [0, 2 / 3, 0, 0, 0, 0],
    [1 / 12, 1 / 3, -1 / 12, 0, 0, 0],
    [-1 / 16, 9 / 8, -3 / 16, -3 / 8, 0, 0],
    [0, 9 / 8, -3 / 8, -3 / 4, 1 / 2, 0],
    [9 / 44, -9 / 11, 63 / 44, 18 / 11, 0, -16 / 11],
])
_B = np.array([11 / 120, 0, 27 / 40, 27 / 40, -4 / 15, -4 / 15, 11 / 120])
# stage -> table column (forward: c = 0,1/3,2/3,1/3,1/2,1/2,1)
_COL_FWD = np.array([0, 1, 3, 1, 2, 2, 4])
_COL_BWD = np.array([4, 3, 1, 3, 2, 2, 0])


@njit(cache=True)
def _step(u, v, lam, sig, h, A, B, ku, kv, su):
    """One RK6 step for a single lam; fills stage values of u in ``su``."""
    for s in range(7):
        us = u
        vs = v
        for j in range(s):
            a = A[s, j]
            if a != 0.0:
                us += h * a * ku[j]
                vs += h * a * kv[j]
        sg = sig[s]
        su[s] = us
        ku[s] = sg * us + vs
        kv[s] = -sg * vs - (sg * sg + lam) * us
    du = 0.0
    dv = 0.0
    for s in range(7):
        du += B[s] * ku[s]
        dv += B[s] * kv[s]
    return u + h * du, v + h * dv


@njit(cache=True)
def shoot_end(lam, tab, hs, scale, A, B, col):
    """Integrate from x=0 with u=0, v=1; return (u(pi), v(pi), phase(pi)).

    The phase is the continuously unwrapped angle of (scale*u, v); it equals
    k*pi exactly at the k-th Dirichlet eigenvalue.
    """
    n = hs.shape[0]
    ku = np.empty(7)
    kv = np.empty(7)
    su = np.empty(7)
    sig = np.empty(7)
    u = 0.0
    v = 1.0
    phase = 0.0
    prev = 0.0
    for i in range(n):
        for s in range(7):
            sig[s] = tab[i, col[s]]
        u, v = _step(u, v, lam, sig, hs[i], A, B, ku, kv, su)
        ang = math.atan2(scale * u, v)
        d = ang - prev
        if d > math.pi:
            d -= 2 * math.pi
        elif d < -math.pi:
            d += 2 * math.pi
        phase += d
        prev = ang
    return u, v, phase


@njit(cache=True)
def shoot_batch(lams, tab, hs, out_idx, backward, full_gram, A, B, col):
    """Integrate a batch of parameters simultaneously.

    Returns U, V of shape (R, nout) at mesh nodes ``out_idx`` and running
    integrals of u_i*u_j (all pairs if ``full_gram``, else the diagonal only)
    taken in the direction of integration. Backward sweeps start at x=pi
    with u=0, v=1 and step through the mesh in reverse.
    """
    R = lams.shape[0]
    n = hs.shape[0]
    nout = out_idx.shape[0]
    U = np.zeros((R, nout))
    V = np.zeros((R, nout))
    if full_gram:
        G = np.zeros((R, R, nout))
    else:
        G = np.zeros((R, 1, nout))
    u = np.zeros(R)
    v = np.ones(R)
    g = np.zeros((R, R)) if full_gram else np.zeros((R, 1))
    ku = np.empty(7)
    kv = np.empty(7)
    sig = np.empty(7)
    stage_u = np.empty((R, 7))
    su = np.empty(7)

    # output slot lookup: node index -> slot
    slot = -np.ones(n + 1, dtype=np.int64)
    for k in range(nout):
        slot[out_idx[k]] = k

    start = n if backward else 0
    k0 = slot[start]
    if k0 >= 0:
        for r in range(R):
            U[r, k0] = 0.0
            V[r, k0] = 1.0

    for step in range(n):
        if backward:
            i = n - 1 - step
            h = -hs[i]
            node = i
        else:
            i = step
            h = hs[i]
            node = i + 1
        for s in range(7):
            sig[s] = tab[i, col[s]]
        for r in range(R):
            u[r], v[r] = _step(u[r], v[r], lams[r], sig, h, A, B, ku, kv, su)
            for s in range(7):
                stage_u[r, s] = su[s]
        if full_gram:
            for a in range(R):
                for b in range(a, R):
                    acc = 0.0
                    for s in range(7):
                        acc += B[s] * stage_u[a, s] * stage_u[b, s]
                    g[a, b] += h * acc
                    g[b, a] = g[a, b]
        else:
            for a in range(R):
                acc = 0.0
                for s in range(7):
                    acc += B[s] * stage_u[a, s] * stage_u[a, s]
                g[a, 0] += h * acc
        k = slot[node]
        if k >= 0:
            for r in range(R):
                U[r, k] = u[r]
                V[r, k] = v[r]
            G[:, :, k] = g
    return U, V, G
