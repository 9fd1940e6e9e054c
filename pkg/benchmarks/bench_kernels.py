"""Time the compiled kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [--n 256] [--steps 200] [--repeat 5] [--json out.json]

Each row times one RK4 run of ``steps`` steps on an ``n``-sample closed
curve or sphere map and reports the best of ``repeat`` runs, the speedup
and the largest difference between the two backends' results.
"""
import argparse
import json
import sys
import timeit

import numpy as np

from geoflow._kernels import compiled_backend, python_backend


def _trefoil(n):
    t = 2 * np.pi * np.arange(n) / n
    return np.stack([np.sin(t) + 2 * np.sin(2 * t), np.cos(t) - 2 * np.cos(2 * t), -np.sin(3 * t)], axis=1)


def _wobbly(n):
    x = 2 * np.pi * np.arange(n) / n
    v = np.stack([np.cos(x), np.sin(x), 0.5 + 0.3 * np.sin(2 * x) + 0.2 * np.cos(3 * x)], axis=1)
    return v / np.linalg.norm(v, axis=1)[:, None]


def cases(n, steps):
    p = _trefoil(n)
    hc = float(np.mean(np.linalg.norm(np.roll(p, -1, axis=0) - p, axis=1)))
    u = _wobbly(n)
    hs = 2 * np.pi / n
    return {
        "lie": lambda k: k.curve_advance(p, hc, 0.1 * hc**2, steps, 1.0, 0.0),
        "axial": lambda k: k.curve_advance(p, hc, 0.1 * hc**3, steps, 1.0, 0.3),
        "schrodinger": lambda k: k.sphere_advance(u, hs, 0.1 * hs**2, steps, "schrodinger"),
        "kdv": lambda k: k.sphere_advance(u, hs, 0.1 * hs**3, steps, "kdv"),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write the rows as JSON")
    args = ap.parse_args(argv)
    if compiled_backend is None:
        print("compiled kernels are not built; nothing to compare", file=sys.stderr)
        return 1
    rows = []
    print(f"{'kernel':<12} {'python [ms]':>12} {'cython [ms]':>12} {'speedup':>8} {'max diff':>10}")
    for name, run in cases(args.n, args.steps).items():
        diff = float(np.max(np.abs(run(python_backend)[0] - run(compiled_backend)[0])))
        t_py = min(timeit.repeat(lambda: run(python_backend), number=1, repeat=args.repeat))
        t_c = min(timeit.repeat(lambda: run(compiled_backend), number=1, repeat=args.repeat))
        rows.append({"kernel": name, "n": args.n, "steps": args.steps, "python_s": t_py, "cython_s": t_c,
                     "speedup": t_py / t_c, "max_diff": diff})
        print(f"{name:<12} {1e3 * t_py:>12.2f} {1e3 * t_c:>12.2f} {t_py / t_c:>8.1f} {diff:>10.1e}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
