"""Pure-numpy coordinate sweep; reference twin of the compiled ``_sweep`` kernel."""

import math

import numpy as np


def _sigmoid(u):
    if u >= 0:
        return 1.0 / (1.0 + math.exp(-u))
    e = math.exp(u)
    return e / (1.0 + e)


def _logit(p):
    if p <= 0.0:
        return -math.inf
    if p >= 1.0:
        return math.inf
    return math.log(p) - math.log1p(-p)


def update_one(i, level, parent,
               x_ptr, x_idx, x_val, y_ptr, y_idx, y_val, modmask, colnorm,
               alpha, alpha0, lo_level, pm1, pm0, pin_roots,
               mu, prec, q, theta, resid):
    n_x, n_y = resid.shape
    ix = i % n_x
    iy = (i // n_x) % n_y
    it = i // (n_x * n_y)
    sx = x_idx[x_ptr[ix]:x_ptr[ix + 1]]
    sy = y_idx[y_ptr[iy]:y_ptr[iy + 1]]
    win = np.ix_(sx, sy)
    atom = np.outer(x_val[x_ptr[ix]:x_ptr[ix + 1]], y_val[y_ptr[iy]:y_ptr[iy + 1]]) * modmask[it][win]

    cn = colnorm[i]
    old = theta[i]
    # <psi_i, r_{-i}> with r_{-i} = r + psi_i * theta_i
    dot = float(np.vdot(atom, resid[win])) + cn * old
    lvl = level[i]
    a_l = alpha[lvl]
    p = alpha0 * cn + a_l
    if not p > 0:
        raise FloatingPointError(f"non-positive precision {p} at coefficient {i}")
    m = alpha0 * dot / p

    if lvl == 0 and pin_roots:
        qi = 1.0
    else:
        if lvl <= 1:
            lp = lo_level[lvl]
        else:
            qp = q[parent[i]]
            lp = _logit(qp * pm1[lvl] + (1.0 - qp) * pm0[lvl])
        qi = _sigmoid(lp + 0.5 * (math.log(a_l) - math.log(p)) + 0.5 * p * m * m)

    mu[i] = m
    prec[i] = p
    q[i] = qi
    new = qi * m
    theta[i] = new
    delta = new - old
    if delta != 0.0:
        resid[win] -= delta * atom


def sweep(order, *args):
    for i in order:
        update_one(int(i), *args)
