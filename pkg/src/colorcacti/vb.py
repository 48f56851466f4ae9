"""Tree-structured spike-and-slab model and its mean-field variational inversion.

Generative model for the coefficients ``theta = z * w`` of the video::

    y | theta, alpha0     ~ N(Psi theta, 1/alpha0 I)
    w_i                   ~ N(0, 1/alpha_l),  alpha_l = prod_{j<=l} tau_j
    z_i                   ~ Bernoulli(pi_i)
    pi_i = pi^0 (l = 0), pi^1 (l = 1), pi^p1_l / pi^p0_l (l >= 2, parent on / off)
    alpha0 ~ Gamma(a0, b0),  tau_l ~ Gamma(c0, d0),  pi's ~ Beta(e, f)

The posterior is approximated by ``q(alpha0) q(tau) q(pi) prod_i q(z_i, w_i)``
with ``q(w_i | z_i = 1) = N(mu_i, 1/p_i)`` and ``q(w_i | z_i = 0)`` equal to
the prior; ``q_i = q(z_i = 1)``.  Conjugacy gives closed-form coordinate
updates; see :func:`update_coefficient`.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logit

from . import _backend, _pysweep
from .errors import DimensionError, NumericalFailure
from .transforms import PsiOperator, Transform3D
from .forward import unvec, vec

log = logging.getLogger(__name__)

TAU_MODES = ("verbatim", "mgp")


@dataclass
class HyperParams:
    """Gamma and Beta hyperparameters.

    Beta parameters are stored per level (length ``depth + 1``); entry ``l``
    of ``e_p0``/``f_p0``/``e_p1``/``f_p1`` is meaningful for ``l >= 2`` only.
    """

    a0: float
    b0: float
    c0: float
    d0: float
    e0: float
    f0: float
    e1: float
    f1: float
    e_p0: np.ndarray
    f_p0: np.ndarray
    e_p1: np.ndarray
    f_p1: np.ndarray

    @classmethod
    def from_level_counts(cls, counts, a0=1e-6, b0=1e-6, c0=1e-6, d0=1e-6):
        """Defaults: ``e0=1, f0=0; e1=0.9 N_1, f1=0.1 N_1;
        e_p0 = N_l / N, f_p0 = (N - 1) N_l / N; e_p1 = f_p1 = 0.5 N_l``."""
        counts = np.asarray(counts, dtype=float)
        N = counts.sum()
        n1 = counts[1] if counts.size > 1 else 0.0
        return cls(
            a0=a0, b0=b0, c0=c0, d0=d0,
            e0=1.0, f0=0.0,
            e1=0.9 * n1, f1=0.1 * n1,
            e_p0=counts / N, f_p0=(N - 1.0) * counts / N,
            e_p1=0.5 * counts, f_p1=0.5 * counts,
        )

    @property
    def pin_roots(self):
        return self.f0 == 0


@dataclass
class InferenceOptions:
    max_sweeps: int = 200
    tol: float = 1e-4
    tau_update: str = "verbatim"
    learn_alpha0: bool = True
    learn_tau: bool = True
    learn_pi: bool = True
    refresh_every: int = 20
    trace: bool = True
    backend: str | None = None

    def __post_init__(self):
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.tau_update not in TAU_MODES:
            raise ValueError(f"tau_update must be one of {TAU_MODES}")


@dataclass
class Problem:
    """A single inversion: measurement image, sensing operator, coefficient tree."""

    y: np.ndarray
    op: PsiOperator
    tree: object

    def __post_init__(self):
        n_x, n_y, _ = self.op.shape
        y = np.asarray(self.y, dtype=float)
        if y.ndim == 1:
            y = unvec(y, (n_x, n_y))
        if y.shape != (n_x, n_y):
            raise DimensionError(f"measurement {y.shape} does not match sensor {(n_x, n_y)}")
        if tuple(self.tree.dims) != tuple(self.op.shape):
            raise DimensionError(f"tree {self.tree.dims} does not match operator {self.op.shape}")
        self.y = y

    @property
    def n_meas(self):
        return self.y.size

    def residual(self, theta):
        """``y - Psi theta`` as a C-contiguous image."""
        n_x, n_y, _ = self.op.shape
        return np.ascontiguousarray(self.y - unvec(self.op.apply(theta), (n_x, n_y)))


@dataclass
class TraceRow:
    sweep: int
    residual_norm: float
    active_count: float
    alpha0: float


@dataclass
class VBState:
    mu: np.ndarray
    prec: np.ndarray
    q: np.ndarray
    theta: np.ndarray
    resid: np.ndarray
    alpha0: float
    tau: np.ndarray
    # Beta posterior parameters, same layout as HyperParams
    e0: float
    f0: float
    e1: float
    f1: float
    e_p0: np.ndarray
    f_p0: np.ndarray
    e_p1: np.ndarray
    f_p1: np.ndarray
    pin_roots: bool
    pi_fixed: dict | None = None
    sweep: int = 0
    trace: list = field(default_factory=list)

    @property
    def alpha(self):
        """Per-level slab precisions ``prod_{j<=l} tau_j``."""
        return np.cumprod(self.tau)

    @property
    def w2(self):
        return self.mu**2 + 1.0 / self.prec

    def pi_means(self):
        if self.pi_fixed is not None:
            return dict(self.pi_fixed)
        with np.errstate(invalid="ignore", divide="ignore"):
            return {
                "pi0": self.e0 / (self.e0 + self.f0),
                "pi1": self.e1 / (self.e1 + self.f1),
                "p0": self.e_p0 / (self.e_p0 + self.f_p0),
                "p1": self.e_p1 / (self.e_p1 + self.f_p1),
            }


def prior_terms(state, depth):
    """Prior pieces consumed by the sweep kernels: ``(lo_level, pm1, pm0)``.

    ``lo_level[l]`` is ``logit <pi>`` for the parentless levels 0 and 1;
    ``pm1[l]``/``pm0[l]`` are the mean parent-on/off transition probabilities
    for ``l >= 2``, which the kernel mixes by ``q_parent``.
    """
    size = max(depth + 1, 2)
    lo_level = np.zeros(size)
    pm1 = np.zeros(size)
    pm0 = np.zeros(size)
    means = state.pi_means()
    with np.errstate(divide="ignore"):
        if not state.pin_roots:
            lo_level[0] = logit(means["pi0"])
        if depth >= 1:
            lo_level[1] = logit(means["pi1"])
    if depth >= 2:
        sl = slice(2, depth + 1)
        pm1[sl] = np.broadcast_to(means["p1"], (depth + 1,))[sl]
        pm0[sl] = np.broadcast_to(means["p0"], (depth + 1,))[sl]
    return lo_level, pm1, pm0


def init_state(problem, hyper, alpha0=None, tau=None, pi_fixed=None):
    """Backprojection start: ``mu = Psi^T y / ||psi_i||^2``, ``q`` at prior means.

    ``alpha0``, ``tau`` and ``pi_fixed`` (dict with ``pi0, pi1, p0, p1``)
    override the learned quantities, e.g. for fixed-hyperparameter runs.
    """
    tree = problem.tree
    depth = tree.depth
    op = problem.op
    cn = op.column_sq_norms()
    bp = np.zeros(op.n_coeffs)
    nz = cn > 0
    bp[nz] = op.adjoint(vec(problem.y))[nz] / cn[nz]

    pin = hyper.pin_roots if pi_fixed is None else pi_fixed["pi0"] == 1.0
    if pi_fixed is not None:
        pi0 = pi_fixed["pi0"]
        pi1 = pi_fixed["pi1"]
        m1 = np.broadcast_to(pi_fixed["p1"], (depth + 1,))
        m0 = np.broadcast_to(pi_fixed["p0"], (depth + 1,))
    else:
        pi0 = 1.0 if pin else hyper.e0 / (hyper.e0 + hyper.f0)
        pi1 = hyper.e1 / (hyper.e1 + hyper.f1) if depth >= 1 else 0.0
        m1 = hyper.e_p1 / (hyper.e_p1 + hyper.f_p1)
        m0 = hyper.e_p0 / (hyper.e_p0 + hyper.f_p0)

    level = tree.level
    q = np.empty(op.n_coeffs)
    q[level == 0] = pi0
    q[level == 1] = pi1
    for lvl in range(2, depth + 1):
        sel = level == lvl
        qp = q[tree.parent[sel]]
        q[sel] = qp * m1[lvl] + (1.0 - qp) * m0[lvl]

    theta = q * bp
    resid = problem.residual(theta)
    if alpha0 is None:
        alpha0 = (hyper.a0 + 0.5 * problem.n_meas) / (hyper.b0 + 0.5 * float(np.sum(resid**2)))
    tau = np.ones(depth + 1) if tau is None else np.array(tau, dtype=float)
    if tau.shape != (depth + 1,):
        raise DimensionError(f"tau needs {depth + 1} entries, got {tau.shape}")
    alpha = np.cumprod(tau)
    prec = alpha0 * cn + alpha[level]

    return VBState(
        mu=bp, prec=prec, q=q, theta=theta, resid=resid,
        alpha0=float(alpha0), tau=tau,
        e0=hyper.e0, f0=hyper.f0, e1=hyper.e1, f1=hyper.f1,
        e_p0=np.array(hyper.e_p0, dtype=float), f_p0=np.array(hyper.f_p0, dtype=float),
        e_p1=np.array(hyper.e_p1, dtype=float), f_p1=np.array(hyper.f_p1, dtype=float),
        pin_roots=bool(pin), pi_fixed=pi_fixed,
    )


def _kernel_args(problem, state):
    tree = problem.tree
    (x_ptr, x_idx, x_val), (y_ptr, y_idx, y_val) = problem.op.atoms()
    lo_level, pm1, pm0 = prior_terms(state, tree.depth)
    return (
        tree.level, tree.parent,
        x_ptr, x_idx, x_val, y_ptr, y_idx, y_val,
        problem.op.modulated_masks, problem.op.column_sq_norms(),
        np.ascontiguousarray(state.alpha), float(state.alpha0),
        lo_level, pm1, pm0, bool(state.pin_roots),
        state.mu, state.prec, state.q, state.theta, state.resid,
    )


def update_coefficient(i, state, problem):
    """Closed-form update of ``q(z_i, w_i)`` holding everything else fixed.

    With ``r_{-i}`` the residual without coefficient ``i``::

        p_i  = alpha0 ||psi_i||^2 + alpha_l
        mu_i = alpha0 <psi_i, r_{-i}> / p_i
        q_i  = sigmoid(logit pi_i + 1/2 ln(alpha_l / p_i) + 1/2 p_i mu_i^2)

    Below level 2, ``pi_i`` is the level's mean inclusion probability; deeper
    down it is ``q_parent <pi^p1_l> + (1 - q_parent) <pi^p0_l>``.  The
    residual is updated in place.
    """
    args = _kernel_args(problem, state)
    _pysweep.update_one(int(i), *args)
    return state.mu[i], state.w2[i], state.q[i]


def expected_sq_residual(state, problem):
    """``E ||y - Psi theta||^2`` including the coefficient variances."""
    cn = problem.op.column_sq_norms()
    var = state.q * state.w2 - (state.q * state.mu) ** 2
    return float(np.sum(state.resid**2) + np.dot(cn, var))


def update_alpha0(state, problem, hyper):
    """``alpha0 = (a0 + M/2) / (b0 + E||y - Psi theta||^2 / 2)``."""
    eres = expected_sq_residual(state, problem)
    state.alpha0 = (hyper.a0 + 0.5 * problem.n_meas) / (hyper.b0 + 0.5 * eres)
    return state.alpha0


def level_sums(values, level, depth):
    return np.bincount(level, weights=values, minlength=depth + 1)


def update_tau(lvl, state, tree, hyper, mode="verbatim"):
    """Posterior mean of ``tau_l``; refreshes ``state.tau[lvl]`` in place.

    ``verbatim``: ``(c0 + 1/2 sum_{j<=l} N_j) / (d0 + 1/2 sum_{j<=l} sum_i <w_ji^2>)``.
    ``mgp``: the usual multiplicative-gamma update, with shape over levels
    ``j >= l`` and each level's ``<w^2>`` weighted by ``prod_{m<=j, m!=l} tau_m``.
    """
    depth = tree.depth
    counts = tree.level_counts.astype(float)
    sums = level_sums(state.w2, tree.level, depth)
    if mode == "verbatim":
        num = hyper.c0 + 0.5 * counts[: lvl + 1].sum()
        den = hyper.d0 + 0.5 * sums[: lvl + 1].sum()
    elif mode == "mgp":
        others = np.cumprod(state.tau) / state.tau[lvl]
        num = hyper.c0 + 0.5 * counts[lvl:].sum()
        den = hyper.d0 + 0.5 * np.dot(others[lvl:], sums[lvl:])
    else:
        raise ValueError(f"unknown tau update mode {mode!r}")
    state.tau[lvl] = num / den
    return state.tau[lvl]


def update_pi(state, tree, hyper):
    """Conjugate soft-count updates of the Beta posteriors; returns the means."""
    q = state.q
    level = tree.level
    depth = tree.depth
    if not state.pin_roots:
        s = q[level == 0]
        state.e0 = hyper.e0 + s.sum()
        state.f0 = hyper.f0 + (1.0 - s).sum()
    if depth >= 1:
        s = q[level == 1]
        state.e1 = hyper.e1 + s.sum()
        state.f1 = hyper.f1 + (1.0 - s).sum()
    deep = level >= 2
    qc = q[deep]
    qp = q[tree.parent[deep]]
    lv = level[deep]
    on = np.bincount(lv, weights=qp * qc, minlength=depth + 1)
    on_off = np.bincount(lv, weights=qp * (1.0 - qc), minlength=depth + 1)
    off_on = np.bincount(lv, weights=(1.0 - qp) * qc, minlength=depth + 1)
    off_off = np.bincount(lv, weights=(1.0 - qp) * (1.0 - qc), minlength=depth + 1)
    state.e_p1 = hyper.e_p1 + on
    state.f_p1 = hyper.f_p1 + on_off
    state.e_p0 = hyper.e_p0 + off_on
    state.f_p0 = hyper.f_p0 + off_off
    return state.pi_means()


def run_sweep(problem, state, backend=None):
    """One coarse-to-fine pass of :func:`update_coefficient` over every coefficient."""
    sweep = _backend.get_sweep(backend)
    try:
        sweep(problem.tree.sweep_order(), *_kernel_args(problem, state))
    except FloatingPointError as exc:
        raise NumericalFailure(str(exc), sweep=state.sweep + 1) from None


@dataclass
class InferenceResult:
    theta: np.ndarray
    state: VBState
    trace: list
    converged: bool


def run_inference(problem, hyper=None, opts=None, state=None):
    """Coordinate ascent: coefficients, then alpha0, every tau_l, the pi's.

    Stops when the relative change of ``<theta>`` drops below ``opts.tol``
    or after ``opts.max_sweeps`` sweeps.
    """
    tree = problem.tree
    if hyper is None:
        hyper = HyperParams.from_level_counts(tree.level_counts)
    opts = opts or InferenceOptions()
    if state is None:
        state = init_state(problem, hyper)
    order = tree.sweep_order()
    sweep = _backend.get_sweep(opts.backend)
    converged = False

    for _ in range(opts.max_sweeps):
        prev = state.theta.copy()
        try:
            sweep(order, *_kernel_args(problem, state))
        except FloatingPointError as exc:
            raise NumericalFailure(str(exc), sweep=state.sweep + 1) from None
        state.sweep += 1
        if opts.refresh_every and state.sweep % opts.refresh_every == 0:
            state.resid = problem.residual(state.theta)
        if opts.learn_alpha0:
            update_alpha0(state, problem, hyper)
        if opts.learn_tau:
            for lvl in range(tree.depth + 1):
                update_tau(lvl, state, tree, hyper, opts.tau_update)
        if opts.learn_pi and state.pi_fixed is None:
            update_pi(state, tree, hyper)

        rnorm = float(np.linalg.norm(state.resid))
        active = float(state.q.sum())
        if not (np.isfinite(rnorm) and np.isfinite(state.alpha0) and np.all(np.isfinite(state.theta))
                and np.all(np.isfinite(state.tau))):
            raise NumericalFailure("non-finite posterior moments", sweep=state.sweep)
        if opts.trace:
            state.trace.append(TraceRow(state.sweep, rnorm, active, float(state.alpha0)))

        change = np.linalg.norm(state.theta - prev)
        scale = np.linalg.norm(prev)
        rel = change / scale if scale > 0 else change
        log.debug("sweep %d: |r|=%.4g active=%.1f alpha0=%.4g rel=%.3g",
                  state.sweep, rnorm, active, state.alpha0, rel)
        if rel < opts.tol:
            converged = True
            break

    return InferenceResult(state.theta.copy(), state, list(state.trace), converged)


def reconstruct(theta, transform: Transform3D, clamp=False):
    """Inverse 3-D transform of ``theta`` as an ``(n_x, n_y, n_t)`` cube."""
    theta = np.asarray(theta, dtype=float)
    if theta.size != transform.size:
        raise DimensionError(f"theta has {theta.size} entries, transform expects {transform.size}")
    cube = transform.inverse_cube(unvec(theta, transform.shape))
    return np.clip(cube, 0.0, 1.0) if clamp else cube


def backprojection(problem):
    """Zero-iteration estimate ``F (Psi^T y / ||psi_i||^2)``."""
    cn = problem.op.column_sq_norms()
    theta = np.zeros_like(cn)
    nz = cn > 0
    theta[nz] = problem.op.adjoint(vec(problem.y))[nz] / cn[nz]
    return reconstruct(theta, problem.op.transform)
