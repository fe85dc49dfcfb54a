"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 20]

Shapes match a 64x64 image fit at width 128 (4096 x 128 pre-activations).
Each pair is also checked for agreement before timing.
"""
import argparse
import timeit

import numpy as np

from ssinr import _kernels as K


def cases(rng):
    for dtype in (np.float32, np.float64):
        z = rng.uniform(-1, 1, (4096, 128)).astype(dtype)
        coords = rng.uniform(-1, 1, (4096, 2)).astype(dtype)
        img = rng.uniform(0, 1, (64, 64)).astype(dtype)
        taps = np.hanning(11).astype(dtype)
        taps /= taps.sum()
        name = np.dtype(dtype).name
        yield f"sine {name}", K.sine_act_nb, K.sine_act_np, (z, 30.0)
        yield f"finer {name}", K.finer_act_nb, K.finer_act_np, (z, 30.0)
        yield f"posenc {name}", K.positional_encoding_nb, K.positional_encoding_np, (coords, 10)
        yield f"filter {name}", K.filter_valid_nb, K.filter_valid_np, (img, taps)


def best_ms(fn, args, repeat):
    return 1e3 * min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)
    if not K.HAVE_NUMBA:
        raise SystemExit("numba unavailable (or SSINR_DISABLE_NUMBA set); nothing to compare")

    rng = np.random.default_rng(0)
    print(f"{'kernel':<16}{'numba ms':>10}{'numpy ms':>10}{'speedup':>9}")
    for label, nb, npf, call in cases(rng):
        a, b = nb(*call), npf(*call)
        tol = 1e-4 if call[0].dtype == np.float32 else 1e-10
        for x, y in zip(a if isinstance(a, tuple) else (a,), b if isinstance(b, tuple) else (b,)):
            np.testing.assert_allclose(x, y, rtol=tol, atol=tol * float(np.abs(y).max()))
        t_nb, t_np = best_ms(nb, call, args.repeat), best_ms(npf, call, args.repeat)
        print(f"{label:<16}{t_nb:>10.3f}{t_np:>10.3f}{t_np / t_nb:>8.2f}x")


if __name__ == "__main__":
    main()
