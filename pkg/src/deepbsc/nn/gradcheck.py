"""Central finite differences, used as an independent check on hand-written backward passes."""
import numpy as np


def numerical_gradient(f, x, eps=1e-5):
    """d f / d x by central differences; ``x`` is perturbed in place and restored."""
    grad = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        old = x[idx]
        x[idx] = old + eps
        fp = f()
        x[idx] = old - eps
        fm = f()
        x[idx] = old
        grad[idx] = (fp - fm) / (2.0 * eps)
    return grad


def relative_error(analytic, numeric, floor=1e-6):
    """Norm-wise relative disagreement ``|a - n| / max(|a|, |n|, floor)``.

    The floor keeps exactly-zero gradients (e.g. a bias feeding batch norm)
    from turning finite-difference round-off into a huge ratio.
    """
    a = np.asarray(analytic, dtype=np.float64).ravel()
    n = np.asarray(numeric, dtype=np.float64).ravel()
    denom = max(np.linalg.norm(a), np.linalg.norm(n), floor)
    return float(np.linalg.norm(a - n) / denom)
