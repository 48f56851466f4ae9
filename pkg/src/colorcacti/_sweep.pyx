# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled coordinate sweep over all coefficients; mirrors ``_pysweep``."""

from libc.math cimport exp, log, log1p, INFINITY


cdef inline double _sigmoid(double u) noexcept nogil:
    cdef double e
    if u >= 0:
        return 1.0 / (1.0 + exp(-u))
    e = exp(u)
    return e / (1.0 + e)


cdef inline double _logit(double p) noexcept nogil:
    if p <= 0.0:
        return -INFINITY
    if p >= 1.0:
        return INFINITY
    return log(p) - log1p(-p)


def sweep(const Py_ssize_t[::1] order, const Py_ssize_t[::1] level, const Py_ssize_t[::1] parent,
          const Py_ssize_t[::1] x_ptr, const Py_ssize_t[::1] x_idx, const double[::1] x_val,
          const Py_ssize_t[::1] y_ptr, const Py_ssize_t[::1] y_idx, const double[::1] y_val,
          const double[:, :, ::1] modmask, const double[::1] colnorm,
          const double[::1] alpha, double alpha0,
          const double[::1] lo_level, const double[::1] pm1, const double[::1] pm0, bint pin_roots,
          double[::1] mu, double[::1] prec, double[::1] q, double[::1] theta,
          double[:, ::1] resid):
    cdef Py_ssize_t n_x = resid.shape[0]
    cdef Py_ssize_t n_y = resid.shape[1]
    cdef Py_ssize_t n = order.shape[0]
    cdef Py_ssize_t k, i, ix, iy, it, a, b, xa, yb, lvl
    cdef double cn, old, dot, rowdot, fx, a_l, p, m, qi, qp, lp, new, delta
    cdef Py_ssize_t bad = -1

    with nogil:
        for k in range(n):
            i = order[k]
            ix = i % n_x
            iy = (i // n_x) % n_y
            it = i // (n_x * n_y)
            cn = colnorm[i]
            old = theta[i]

            dot = 0.0
            for a in range(x_ptr[ix], x_ptr[ix + 1]):
                xa = x_idx[a]
                rowdot = 0.0
                for b in range(y_ptr[iy], y_ptr[iy + 1]):
                    yb = y_idx[b]
                    rowdot = rowdot + y_val[b] * modmask[it, xa, yb] * resid[xa, yb]
                dot = dot + x_val[a] * rowdot
            dot = dot + cn * old

            lvl = level[i]
            a_l = alpha[lvl]
            p = alpha0 * cn + a_l
            if not p > 0:
                bad = i
                break
            m = alpha0 * dot / p

            if lvl == 0 and pin_roots:
                qi = 1.0
            else:
                if lvl <= 1:
                    lp = lo_level[lvl]
                else:
                    qp = q[parent[i]]
                    lp = _logit(qp * pm1[lvl] + (1.0 - qp) * pm0[lvl])
                qi = _sigmoid(lp + 0.5 * (log(a_l) - log(p)) + 0.5 * p * m * m)

            mu[i] = m
            prec[i] = p
            q[i] = qi
            new = qi * m
            theta[i] = new
            delta = new - old
            if delta != 0.0:
                for a in range(x_ptr[ix], x_ptr[ix + 1]):
                    xa = x_idx[a]
                    fx = delta * x_val[a]
                    for b in range(y_ptr[iy], y_ptr[iy + 1]):
                        yb = y_idx[b]
                        resid[xa, yb] = resid[xa, yb] - fx * y_val[b] * modmask[it, xa, yb]

    if bad >= 0:
        raise FloatingPointError(f"non-positive precision at coefficient {bad}")
