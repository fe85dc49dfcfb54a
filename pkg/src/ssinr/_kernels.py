"""Hot elementwise and stencil kernels.

Each kernel has a numba ``@njit`` implementation and a vectorised numpy
fallback with the same signature. Set ``SSINR_DISABLE_NUMBA=1`` (or run
without numba installed) to force the numpy path. ``BACKEND`` reports which
one is active; ``benchmarks/bench_kernels.py`` times both.
"""
import os

import numpy as np

_DISABLED = os.environ.get("SSINR_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError("numba disabled by SSINR_DISABLE_NUMBA")
    from numba import njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


# ---------------------------------------------------------------- numpy path

def sine_act_np(z, omega):
    wz = z * z.dtype.type(omega)
    return np.sin(wz), z.dtype.type(omega) * np.cos(wz)


def finer_act_np(z, omega):
    w = z.dtype.type(omega)
    az = np.abs(z)
    arg = w * ((az + 1) * z)
    return np.sin(arg), w * (2 * az + 1) * np.cos(arg)


def positional_encoding_np(coords, bands):
    n, d = coords.shape
    freqs = (2.0 ** np.arange(bands)) * np.pi
    ang = coords[:, None, :] * freqs.astype(coords.dtype)[None, :, None]   # n, L, d
    out = np.empty((n, bands, 2, d), dtype=coords.dtype)
    out[:, :, 0, :] = np.sin(ang)
    out[:, :, 1, :] = np.cos(ang)
    return out.reshape(n, 2 * bands * d)


def filter_valid_np(img, taps):
    """Separable 'valid' correlation of a 2-D image with 1-D ``taps`` on both axes."""
    k = taps.size
    rows = np.lib.stride_tricks.sliding_window_view(img, k, axis=1) @ taps
    return np.lib.stride_tricks.sliding_window_view(rows, k, axis=0) @ taps


# ---------------------------------------------------------------- numba path

if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def sine_act_nb(z, omega):
        w = z.dtype.type(omega)
        a = np.empty_like(z)
        da = np.empty_like(z)
        n, m = z.shape
        for i in range(n):
            for j in range(m):
                wz = w * z[i, j]
                a[i, j] = np.sin(wz)
                da[i, j] = w * np.cos(wz)
        return a, da

    @njit(cache=True, nogil=True)
    def finer_act_nb(z, omega):
        w = z.dtype.type(omega)
        a = np.empty_like(z)
        da = np.empty_like(z)
        n, m = z.shape
        for i in range(n):
            for j in range(m):
                v = z[i, j]
                av = abs(v)
                arg = w * ((av + 1) * v)
                a[i, j] = np.sin(arg)
                da[i, j] = w * (2 * av + 1) * np.cos(arg)
        return a, da

    @njit(cache=True, nogil=True)
    def positional_encoding_nb(coords, bands):
        n, d = coords.shape
        out = np.empty((n, 2 * bands * d), dtype=coords.dtype)
        for i in range(n):
            for k in range(bands):
                f = coords.dtype.type((2.0 ** k) * np.pi)
                base = 2 * k * d
                for c in range(d):
                    ang = coords[i, c] * f
                    out[i, base + c] = np.sin(ang)
                    out[i, base + d + c] = np.cos(ang)
        return out

    @njit(cache=True, nogil=True)
    def filter_valid_nb(img, taps):
        k = taps.size
        h, w = img.shape
        oh, ow = h - k + 1, w - k + 1
        rows = np.empty((h, ow), dtype=img.dtype)
        for i in range(h):
            for j in range(ow):
                acc = 0.0
                for t in range(k):
                    acc += img[i, j + t] * taps[t]
                rows[i, j] = acc
        out = np.empty((oh, ow), dtype=img.dtype)
        for i in range(oh):
            for j in range(ow):
                acc = 0.0
                for t in range(k):
                    acc += rows[i + t, j] * taps[t]
                out[i, j] = acc
        return out

    def _by_dtype(nb_impl, np_impl):
        # numpy's SIMD sin/cos beats a scalar numba loop in float32; numba wins in float64
        def dispatch(z, omega):
            if z.dtype == np.float64:
                return nb_impl(z, omega)
            return np_impl(z, omega)
        dispatch.__name__ = np_impl.__name__[:-3]
        return dispatch

    sine_act = _by_dtype(sine_act_nb, sine_act_np)
    finer_act = _by_dtype(finer_act_nb, finer_act_np)
    positional_encoding = positional_encoding_nb
    filter_valid = filter_valid_nb
    BACKEND = "numba"
else:
    sine_act = sine_act_np
    finer_act = finer_act_np
    positional_encoding = positional_encoding_np
    filter_valid = filter_valid_np
    BACKEND = "numpy"
