"""Compare the numba kernels with the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--points 2001] [--steps 200000]

Each backend runs in its own interpreter because the choice is made at
import time from PULSECPT_DISABLE_NUMBA.
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from pulsecpt import _kernels as K
from pulsecpt._backend import BACKEND

points, steps, repeats = (int(a) for a in sys.argv[1:4])
u = K.kick_unitary(1e-3, 1e-3, 0.0)
det = np.linspace(-2e5, 2e5, points)
periods = 1.0 / (525.7e6 + det / 13)
args = (3.6e7, 0.5, 5.4e4, 0.0, np.inf)
rng = np.random.default_rng(0)
walk = (np.diag([0.5, 0.5, 0.0]).astype(complex), rng.integers(0, 2, steps), rng.uniform(0, 3, steps),
        rng.uniform(0, 3, steps), rng.uniform(-3, 3, steps), rng.uniform(1e-10, 1e-6, steps), 3.6e7,
        rng.uniform(0, 1, steps), np.full(steps, 5e4), np.zeros(steps), rng.normal(0, 1e6, steps),
        np.full(steps, np.inf))

def best(fn):
    fn()  # warm-up (JIT compilation for numba)
    times = []
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)

out = {
    "backend": BACKEND,
    "scan_numba_s": best(lambda: K.scan_numba(u, det, periods, *args)),
    "scan_numpy_s": best(lambda: K.scan_numpy(u, det, periods, *args)),
    "random_walk_s": best(lambda: K.random_walk(*walk)),
}
print(json.dumps(out))
"""


def run(disable: bool, points: int, steps: int, repeats: int) -> dict:
    env = dict(os.environ, PULSECPT_DISABLE_NUMBA="1" if disable else "0")
    proc = subprocess.run([sys.executable, "-c", WORKER, str(points), str(steps), str(repeats)],
                          env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=2001, help="detunings per scan")
    parser.add_argument("--steps", type=int, default=200_000, help="random-walk steps")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    fast = run(False, args.points, args.steps, args.repeats)
    slow = run(True, args.points, min(args.steps, 20_000), args.repeats)
    per_step_fast = fast["random_walk_s"] / args.steps
    per_step_slow = slow["random_walk_s"] / min(args.steps, 20_000)
    print(f"scan, {args.points} points")
    print(f"  numba loop          {fast['scan_numba_s'] * 1e3:9.2f} ms")
    print(f"  numpy batched       {fast['scan_numpy_s'] * 1e3:9.2f} ms")
    print(f"  python loop         {slow['scan_numba_s'] * 1e3:9.2f} ms  (njit disabled)")
    print("random walk, per step")
    print(f"  numba               {per_step_fast * 1e6:9.3f} us")
    print(f"  python              {per_step_slow * 1e6:9.3f} us  (x{per_step_slow / per_step_fast:.0f})")


if __name__ == "__main__":
    main()
