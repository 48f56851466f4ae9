"""Time one coefficient sweep with the compiled kernel and the numpy fallback.

    python3 benchmarks/bench_sweep.py --sizes 16 32 64 --repeat 3
"""

import argparse
import time

import numpy as np

from colorcacti import _backend
from colorcacti.forward import build_mask_stack, forward_measure, gen_mask, horizontal_schedule
from colorcacti.pipeline import make_problem
from colorcacti.synthetic import moving_pattern_video
from colorcacti.vb import HyperParams, init_state, run_sweep


def time_sweep(prob, backend, repeat):
    hyper = HyperParams.from_level_counts(prob.tree.level_counts)
    best = np.inf
    for _ in range(repeat):
        state = init_state(prob, hyper)
        t0 = time.perf_counter()
        run_sweep(prob, state, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, state


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[16, 32, 64])
    ap.add_argument("--nt", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    backends = ["python"] + (["cython"] if _backend.BACKEND == "cython" else [])
    print(f"{'size':>10} {'coeffs':>8} " + " ".join(f"{b + ' [s]':>12}" for b in backends) + f" {'speedup':>8} {'max diff':>9}")
    for n in args.sizes:
        z = moving_pattern_video(n, n, args.nt, seed=0)
        masks = build_mask_stack(gen_mask(n, n + args.nt, 0.5, 0), horizontal_schedule(args.nt), n, n)
        prob = make_problem(forward_measure(z, masks).data, masks)
        prob.op.column_sq_norms()
        prob.op.atoms()
        times, states = [], []
        for b in backends:
            t, s = time_sweep(prob, b, args.repeat)
            times.append(t)
            states.append(s)
        speed = f"{times[0] / times[-1]:8.1f}" if len(times) > 1 else f"{'-':>8}"
        diff = f"{np.max(np.abs(states[0].theta - states[-1].theta)):9.1e}" if len(states) > 1 else f"{'-':>9}"
        print(f"{f'{n}x{n}x{args.nt}':>10} {prob.op.n_coeffs:>8} " + " ".join(f"{t:12.4f}" for t in times)
              + f" {speed} {diff}")


if __name__ == "__main__":
    main()
