import json
from pathlib import Path

import numpy as np
import pytest

from lplab import LpSpace

FIXTURES = Path(__file__).parent / "fixtures"


def load_fixture(name):
    with open(FIXTURES / name) as fh:
        return json.load(fh)


def hilbert_projection(space: LpSpace, basis: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Weighted-l2 orthogonal projection of v onto span(basis), by normal equations."""
    w = space.weights
    gram = basis.T @ (w[:, None] * basis)
    rhs = basis.T @ (w * v)
    return basis @ np.linalg.solve(gram, rhs)


def grid_circumcenter(points: np.ndarray, space: LpSpace, rounds: int = 14, n: int = 27):
    """Brute-force grid-refinement Chebyshev center (dim <= 3).

    Each round keeps the bounding box of every grid point within half a
    cell diameter of the incumbent value (the objective is 1-Lipschitz, so
    a grid neighbor of the true minimizer always survives), padded by half
    a cell per axis.
    """
    pts = np.asarray(points, dtype=float)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    w, p = space.weights, space.p
    best = None
    for _ in range(rounds):
        axes = [np.linspace(lo[i], hi[i], n) for i in range(pts.shape[1])]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, pts.shape[1])
        d = ((np.abs(grid[:, None, :] - pts[None, :, :]) ** p) * w[None, None, :]).sum(axis=2) ** (1.0 / p)
        vals = d.max(axis=1)
        k = int(np.argmin(vals))
        best = grid[k]
        cell = (hi - lo) / (n - 1)
        keep = grid[vals <= vals[k] + 0.5 * space.norm(cell)]
        lo = keep.min(axis=0) - 0.5 * cell
        hi = keep.max(axis=0) + 0.5 * cell
    return best, float(vals[k])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
