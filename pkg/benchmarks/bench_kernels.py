#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy reference.

Times each kernel on representative grids, then a full solver step with
either backend swapped in, and prints a speedup table.

    python benchmarks/bench_kernels.py [--sizes 32x32x16,64x64x32] [--repeat 200]
"""

import argparse
import time

import numpy as np

import hylm.kernels as kernels
import hylm.kernels._numpy as knp

try:
    import hylm.kernels._compiled as kcy
except ImportError:
    kcy = None


def make_args(shape, rng):
    def rc():
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    def rr():
        return np.ascontiguousarray(rng.standard_normal(shape))

    c = [np.ascontiguousarray(rc()) for _ in range(5)]
    r = [rr() for _ in range(6)]
    w = np.abs(rr())
    mask = (rr() > 0).astype(float)
    inv_den = np.abs(rr())
    inv_den.flat[0] = 0.0
    inv_pil = np.ascontiguousarray(rng.standard_normal(shape[2]))
    inv_pil[0] = 0.0
    return [
        ("dot3", (r[0], r[1], r[2], r[3], r[4], r[5])),
        ("div_spectral", (c[0], c[1], c[2], r[0], r[1], r[2])),
        ("skew_combine", (c[0], c[1], c[2], c[3], r[0], r[1], r[2], mask)),
        ("project_aniso", (c[0], c[1], c[2], r[0], r[1], r[2], inv_den, 25.0)),
        ("stage_a", (c[0], c[1], w, 0.37)),
        ("rk_final", (c[0], c[1], c[2], c[3], c[4], w, np.abs(r[0]), 0.01)),
        ("parity_project_z", (c[0], -1.0)),
        ("weighted_sumsq", (c[0], w)),
        ("antiderive_z", (c[0], inv_pil)),
    ]


def best_of(fn, args, repeat):
    best = float("inf")
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(repeat):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / repeat)
    return best


def bench_kernels(sizes, repeat):
    rng = np.random.default_rng(0)
    for shape in sizes:
        print(f"\nkernels on grid {shape[0]}x{shape[1]}x{shape[2]} "
              f"(best of 5, {repeat} calls each):")
        print(f"{'kernel':<18}{'numpy':>12}{'cython':>12}{'speedup':>9}")
        for name, args in make_args(shape, rng):
            t_np = best_of(getattr(knp, name), args, repeat)
            if kcy is None:
                print(f"{name:<18}{t_np * 1e6:>10.1f}us{'n/a':>12}")
                continue
            t_cy = best_of(getattr(kcy, name), args, repeat)
            print(f"{name:<18}{t_np * 1e6:>10.1f}us{t_cy * 1e6:>10.1f}us"
                  f"{t_np / t_cy:>8.2f}x")


def bench_full_step(shape, steps):
    """Time the scaled solver with each backend patched in."""
    from hylm.initial import DataSpec, build_initial_data
    from hylm.nse import NseParams, run_nse
    from hylm.spectral import make_grid

    grid = make_grid(*shape)
    spec = DataSpec(kind="random", smoothness_class="H2", seed=1,
                    max_mode=min(shape) // 3, h2_target=1.0)
    v0, w0 = build_initial_data(spec, grid)
    dt = 1e-3
    params = NseParams(eps=0.1, alpha=3.0, t_end=steps * dt, dt=dt)

    backends = [("python", knp)] + ([("cython", kcy)] if kcy else [])
    print(f"\nfull scaled-solver run, grid {shape[0]}x{shape[1]}x{shape[2]}, "
          f"{steps} steps:")
    results = {}
    saved = {name: getattr(kernels, name) for name in kernels._FUNCS}
    try:
        for label, mod in backends:
            for name in kernels._FUNCS:
                setattr(kernels, name, getattr(mod, name))
            t0 = time.perf_counter()
            run_nse(v0, w0, params, n_outputs=2)
            results[label] = time.perf_counter() - t0
            print(f"  {label:<8}{results[label] * 1e3:>10.1f} ms "
                  f"({results[label] / steps * 1e3:.2f} ms/step)")
    finally:
        for name, fn in saved.items():
            setattr(kernels, name, fn)
    if len(results) == 2:
        print(f"  step speedup: {results['python'] / results['cython']:.2f}x")


def parse_sizes(text):
    out = []
    for part in text.split(","):
        dims = tuple(int(d) for d in part.lower().split("x"))
        if len(dims) != 3:
            raise ValueError(f"bad size {part!r}")
        out.append(dims)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="32x32x16,64x64x32")
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--steps", type=int, default=50)
    args = ap.parse_args()
    print(f"active backend at import: {kernels.backend_name()}")
    sizes = parse_sizes(args.sizes)
    bench_kernels(sizes, args.repeat)
    bench_full_step(sizes[0], args.steps)


if __name__ == "__main__":
    main()
