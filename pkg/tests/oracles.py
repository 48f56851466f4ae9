"""Independent reference implementations used only by the tests."""

import itertools
from collections import deque

import numpy as np

from colorcacti.forward import MaskStack
from colorcacti.transforms import Basis1D, PsiOperator, Transform3D
from colorcacti.tree import TreeIndex
from colorcacti.vb import HyperParams, InferenceOptions, Problem, init_state, run_inference


def dct_matrix(n):
    """Orthonormal DCT-II analysis matrix from the cosine formula."""
    k = np.arange(n)[:, None]
    m = np.arange(n)[None, :]
    C = np.cos(np.pi * (2 * m + 1) * k / (2 * n))
    C[0] *= np.sqrt(1.0 / n)
    C[1:] *= np.sqrt(2.0 / n)
    return C


# 8-tap Daubechies scaling filter (four vanishing moments), published values
DB4_LOWPASS = np.array([
    0.2303778133088964, 0.7148465705529154, 0.6308807679298587, -0.0279837694168599,
    -0.1870348117190931, 0.0308413818355607, 0.0328830116668852, -0.0105974017850690,
])


def enumerate_tree(dims, scaling):
    """Walk the linkage rules from every root; returns ``{node: (parent, bfs_depth)}``.

    Works purely on integer coordinates: roots are the scaling block, a root
    spawns the 7 offsets by the scaling sizes, every other node spawns
    ``(2i + a, 2j + b, 2t + c)``.
    """
    n = dims
    b = scaling
    info = {}
    queue = deque()
    for i in range(b[0]):
        for j in range(b[1]):
            for t in range(b[2]):
                info[(i, j, t)] = (None, 0)
                queue.append((i, j, t))
    while queue:
        node = queue.popleft()
        _, depth = info[node]
        if depth == 0:
            kids = [
                tuple(node[a] + b[a] * bits[a] for a in range(3))
                for bits in itertools.product((0, 1), repeat=3)
                if any(bits)
            ]
        else:
            kids = [
                (2 * node[0] + a, 2 * node[1] + c, 2 * node[2] + d)
                for a, c, d in itertools.product((0, 1), repeat=3)
            ]
        for kid in kids:
            if all(kid[a] < n[a] for a in range(3)) and kid not in info:
                info[kid] = (node, depth + 1)
                queue.append(kid)
    return info


def custom_tree(dims, parent):
    """TreeIndex from an explicit parent array; levels are tree depths."""
    parent = np.asarray(parent, dtype=np.intp)
    N = parent.size
    level = np.zeros(N, dtype=np.intp)
    for i in range(N):
        j = i
        while parent[j] >= 0:
            level[i] += 1
            j = parent[j]
    has = parent >= 0
    order = np.argsort(np.where(has, parent, N), kind="stable")
    counts = np.bincount(parent[has], minlength=N)
    ptr = np.zeros(N + 1, dtype=np.intp)
    np.cumsum(counts, out=ptr[1:])
    return TreeIndex(tuple(dims), level, parent, ptr, order[: int(has.sum())].astype(np.intp), (1, 1, 1), None)


def dense_operator(op):
    N = op.n_coeffs
    eye = np.eye(N)
    return np.column_stack([op.apply(eye[i]) for i in range(N)])


def exact_inclusion(Psi, y, tree, alpha0, alpha, pi):
    """Marginal ``P(z_i = 1 | y)`` by summing all ``2^N`` supports.

    For each support the slab weights integrate out exactly:
    ``y ~ N(0, I / alpha0 + Psi_S diag(1 / alpha_S) Psi_S^T)``.
    """
    M, N = Psi.shape
    supports = np.array(list(itertools.product((0, 1), repeat=N)))
    logp = np.empty(len(supports))
    for s, z in enumerate(supports):
        lp = 0.0
        for i in range(N):
            lvl = tree.level[i]
            if lvl == 0:
                pr = pi["pi0"]
            elif lvl == 1:
                pr = pi["pi1"]
            else:
                pr = pi["p1"] if z[tree.parent[i]] else pi["p0"]
            with np.errstate(divide="ignore"):
                lp += np.log(pr if z[i] else 1.0 - pr)
        S = z > 0
        C = np.eye(M) / alpha0 + (Psi[:, S] / alpha[tree.level[S]]) @ Psi[:, S].T
        _, logdet = np.linalg.slogdet(C)
        lp += -0.5 * logdet - 0.5 * y @ np.linalg.solve(C, y)
        logp[s] = lp
    w = np.exp(logp - logp.max())
    w /= w.sum()
    return w @ supports


def vb_vs_exact(dims, parent, alpha0, tau, pi, seed, masks=None, density=0.5):
    """Run fixed-hyperparameter VB on a toy problem and the exact oracle.

    Returns ``(q_vb, q_exact)``.
    """
    rng = np.random.default_rng(seed)
    tr = Transform3D(*(Basis1D("dct", n) for n in dims))
    if masks is None:
        masks = MaskStack((rng.random(dims) < density).astype(float))
    op = PsiOperator(masks, tr)
    tree = custom_tree(dims, parent)
    N = op.n_coeffs
    Psi = dense_operator(op)
    alpha = np.cumprod(tau)
    theta = rng.normal(size=N) / np.sqrt(alpha[tree.level]) * (rng.random(N) < 0.5)
    y = Psi @ theta + rng.normal(size=Psi.shape[0]) / np.sqrt(alpha0)
    prob = Problem(y, op, tree)
    hyper = HyperParams.from_level_counts(tree.level_counts)
    state = init_state(prob, hyper, alpha0=alpha0, tau=tau, pi_fixed=pi)
    opts = InferenceOptions(learn_alpha0=False, learn_tau=False, learn_pi=False, tol=1e-12, max_sweeps=2000)
    res = run_inference(prob, hyper, opts, state=state)
    return res.state.q, exact_inclusion(Psi, y, tree, alpha0, alpha, pi)
