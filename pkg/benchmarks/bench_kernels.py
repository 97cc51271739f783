"""Times the compiled kernel backend against the NumPy fallback.

Two workloads: the raw hierarchical proximal map on a realistic block of
coefficient paths, and an end-to-end penalized fit at the large dimensions
the package targets (k=16, m=32, p=s=13, T=76).

Run as:  python3 benchmarks/bench_kernels.py [--repeats N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from hvarx import SimDesign, SolverConfig, VarxSpec, build_compact, fit
from hvarx.prox import backend, hier_prox_paths_inplace, set_backend
from hvarx.simulate import generate, random_lag_matrices


def median_time(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return float(np.median(times))


def bench_prox(repeats: int) -> dict:
    # one equation block at the target scale: 16*16 + 16*32 paths, 13 lags
    rng = np.random.default_rng(0)
    paths = rng.standard_normal((16 * 16 + 16 * 32, 13))
    tau = 0.05

    def run():
        work = paths.copy()
        hier_prox_paths_inplace(work, tau)

    out = {}
    for name in ("python", "compiled"):
        set_backend(name)
        out[name] = median_time(run, repeats)
    return out


def large_instance():
    rng = np.random.default_rng(7)
    l_phi, l_b = random_lag_matrices(rng, 16, 32, 2, 2)
    design = SimDesign(
        k=16, m=32, p=13, s=13, T=76,
        true_lag_matrix_phi=l_phi, true_lag_matrix_b=l_b,
        target_spectral_radius=0.8, coefficient_scale=1.0, seed=7,
    )
    dataset, _ = generate(design)
    return build_compact(dataset, VarxSpec(p=13, s=13))


def bench_fit(repeats: int) -> dict:
    data = large_instance()
    from hvarx.select import lambda_max

    anchor = lambda_max(data, "hierarchical")
    config = SolverConfig(
        lambda_phi=0.1 * anchor[0], lambda_b=0.1 * anchor[1],
        penalty_kind="hierarchical", tol=1e-6, max_iter=50000,
    )

    out = {}
    for name in ("python", "compiled"):
        set_backend(name)
        result = fit(data, config)
        out[f"{name}_iterations"] = result.iterations
        out[name] = median_time(lambda: fit(data, config), repeats)
    return out


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repetitions per case (median reported)")
    args = parser.parse_args()

    try:
        set_backend("compiled")
    except ImportError:
        raise SystemExit(
            "compiled backend unavailable; build the extension first "
            "(pip install -e . --no-build-isolation)"
        )
    default = backend()

    prox = bench_prox(args.repeats)
    fit_times = bench_fit(args.repeats)
    set_backend(default)

    print(f"repeats per case: {args.repeats} (median shown)\n")
    print("hierarchical prox, 768 paths x 13 lags:")
    print(f"  python   {prox['python'] * 1e6:9.1f} us")
    print(f"  compiled {prox['compiled'] * 1e6:9.1f} us"
          f"   ({prox['python'] / prox['compiled']:.1f}x faster)")
    print()
    print("full fit, k=16 m=32 p=s=13 T=76 "
          f"({fit_times['python_iterations']} iterations):")
    print(f"  python   {fit_times['python'] * 1e3:9.1f} ms")
    print(f"  compiled {fit_times['compiled'] * 1e3:9.1f} ms"
          f"   ({fit_times['python'] / fit_times['compiled']:.1f}x faster)")


if __name__ == "__main__":
    main()
