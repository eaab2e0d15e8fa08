"""Pure numpy implementations of the hot kernels.

Used when the compiled ``_core`` extension is unavailable, and as the
reference the extension is tested against.
"""
import numpy as np


def lindley_sojourns(interarrivals, services):
    """Sojourn times of a FIFO single-server queue via Lindley's recursion.

    ``interarrivals[k]`` is the gap between arrivals ``k-1`` and ``k``
    (``interarrivals[0]`` is ignored; the first task finds an empty queue).
    """
    a = np.asarray(interarrivals, dtype=float)
    s = np.asarray(services, dtype=float)
    n = s.shape[0]
    if n == 0:
        return np.empty(0)
    # W_k = C_k - min_{j<=k} C_j with C the running sum of S_{k-1} - A_k.
    steps = np.empty(n)
    steps[0] = 0.0
    steps[1:] = s[:-1] - a[1:]
    run = np.cumsum(steps)
    waits = run - np.minimum.accumulate(run)
    return waits + s


def scene_interference(fn_d2, own_d2, angle, fade, counts, alpha, eps):
    """Per-scene aggregate interference for concatenated interferer records.

    Each interferer contributes ``h * R^(alpha*eps) * |Y|^(-alpha)`` with
    ``|Y|^2 = X^2 + R^2 - 2 X R cos(angle)``. ``counts[i]`` records how many
    consecutive entries belong to scene ``i``.
    """
    fn_d2 = np.asarray(fn_d2, dtype=float)
    own_d2 = np.asarray(own_d2, dtype=float)
    y2 = fn_d2 + own_d2 - 2.0 * np.sqrt(fn_d2 * own_d2) * np.cos(angle)
    terms = fade * own_d2 ** (0.5 * alpha * eps) * y2 ** (-0.5 * alpha)
    counts = np.asarray(counts, dtype=np.int64)
    scene = np.repeat(np.arange(counts.shape[0]), counts)
    return np.bincount(scene, weights=terms, minlength=counts.shape[0])


def h_kernel_grid(xs, v, tau, alpha, eps, u_nodes, u_weights,
                  y_nodes, y_weights):
    """Angular/offset average of the per-interferer Laplace factor.

    ``xs`` are normalized squared FN distances (``c * |X|^2``); the weights
    must already include the ``1/(2 pi)`` normalization over the angle.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    u = u_nodes[:, None]
    cy = np.cos(y_nodes)[None, :]
    wuy = u_weights[:, None] * y_weights[None, :]
    num = u ** eps * v ** (1.0 - eps)
    out = np.empty(xs.shape[0])
    half = 0.5 * alpha
    for i, x in enumerate(xs):
        d = np.maximum(x + u - 2.0 * np.sqrt(x * u) * cy, 0.0)
        with np.errstate(divide="ignore"):
            ratio = num / d
        val = 1.0 / (1.0 + tau * ratio ** half)
        out[i] = np.sum(wuy * val)
    return out
