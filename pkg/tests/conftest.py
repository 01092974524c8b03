import time

import numpy as np
import pytest

from shocknet.panel import TimeSeriesPanel
from shocknet.svar import estimate_svar_multistart, restriction_mask
from shocknet.synthetic import SyntheticSpec, generate_synthetic
from shocknet.var import fit_var

RECOVERY_SPEC = SyntheticSpec(N=6, T=5000, kind="PCPG", radius=0.5, seed=0)
RECOVERY_SEED = 0


def random_panel(n, T, seed, labels=None):
    rng = np.random.default_rng(seed)
    labels = labels or tuple(f"N{i}" for i in range(n))
    return TimeSeriesPanel(labels, rng.standard_normal((n, T)))


def random_correlation(n, seed, T=None):
    """Correlation matrix of a random factor-structured sample."""
    from shocknet.assoc import pearson_matrix

    rng = np.random.default_rng(seed)
    T = T or 4 * n
    loadings = rng.standard_normal((n, 3))
    x = loadings @ rng.standard_normal((3, T)) + rng.standard_normal((n, T))
    return pearson_matrix(TimeSeriesPanel(tuple(f"N{i}" for i in range(n)), x))


@pytest.fixture(scope="session")
def recovery_case():
    """N=6 PCPG-sparse truth, T=5000, estimated with the full 25 x 30 protocol."""
    panel, truth = generate_synthetic(RECOVERY_SPEC)
    var = fit_var(panel, 1)
    mask = restriction_mask(truth.graph)
    t0 = time.perf_counter()
    model = estimate_svar_multistart(var, mask, n_starts=25, n_restarts=30, seed=RECOVERY_SEED)
    elapsed = time.perf_counter() - t0
    return {"panel": panel, "truth": truth, "var": var, "mask": mask, "model": model, "elapsed": elapsed}


def align_column_signs(B, B0):
    """Flip columns of ``B`` to best match ``B0``; the likelihood is sign-invariant per column."""
    B = np.array(B, dtype=float)
    for j in range(B.shape[1]):
        if np.abs(-B[:, j] - B0[:, j]).max() < np.abs(B[:, j] - B0[:, j]).max():
            B[:, j] *= -1
    return B
