"""Deterministic 2D quadrature on rectangles.

Two layers:
  * quad2d_batch: adaptive tensor Gauss-Kronrod (G7/K15) with worst-cell-first
    subdivision, shared across a batch of integrands evaluated at the same
    points. Error control is max(atol, rtol*|integral|) per batch element.
  * PanelRule: a fixed tensor G7/K15 composite rule with an embedded error
    estimate, for inner integrals evaluated at many outer points at once.

All integrands are real-valued callables f(x_flat, y_flat) -> (batch, npts).
Subdivision order is deterministic, so results are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import QuadratureError

# Kronrod-15 abscissae/weights (positive half) and the embedded Gauss-7 rule.
_XK = np.array([
    0.0,
    0.2077849550078985, 0.4058451513773972, 0.5860872354676911,
    0.7415311855993945, 0.8648644233597691, 0.9491079123427585,
    0.9914553711208126,
])
_WK = np.array([
    0.2094821410847278,
    0.2044329400752989, 0.1903505780647854, 0.1690047266392679,
    0.1406532597155259, 0.1047900103222502, 0.0630920926299785,
    0.0229353220105292,
])
_WG7 = np.array([
    0.4179591836734694, 0.3818300505051189, 0.2797053914892767,
    0.1294849661688697,
])

NODES = np.concatenate((-_XK[:0:-1], _XK))            # 15 nodes, ascending
W_KRONROD = np.concatenate((_WK[:0:-1], _WK))
W_GAUSS = np.zeros(15)
W_GAUSS[1::2] = np.concatenate((_WG7[:0:-1], _WG7))   # Gauss nodes interleave


def _eval_cells(func, cell_bounds: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Apply the K15 x K15 rule on each cell; error from the embedded G7 x G7."""
    cx = 0.5 * (cell_bounds[:, 0] + cell_bounds[:, 1])
    hx = 0.5 * (cell_bounds[:, 1] - cell_bounds[:, 0])
    cy = 0.5 * (cell_bounds[:, 2] + cell_bounds[:, 3])
    hy = 0.5 * (cell_bounds[:, 3] - cell_bounds[:, 2])
    px = cx[:, None] + hx[:, None] * NODES[None, :]
    py = cy[:, None] + hy[:, None] * NODES[None, :]
    ncells = cell_bounds.shape[0]
    xx = np.broadcast_to(px[:, :, None], (ncells, 15, 15)).ravel()
    yy = np.broadcast_to(py[:, None, :], (ncells, 15, 15)).ravel()
    vals = np.asarray(func(xx, yy))
    if vals.ndim == 1:
        vals = vals[None, :]
    v = vals.reshape(vals.shape[0], ncells, 15, 15)
    area = (hx * hy)[None, :]
    i_k = np.einsum("bcij,i,j->bc", v, W_KRONROD, W_KRONROD) * area
    i_g = np.einsum("bcij,i,j->bc", v, W_GAUSS, W_GAUSS) * area
    return i_k, np.abs(i_k - i_g)


def _split4(cell_bounds: np.ndarray) -> np.ndarray:
    x0, x1, y0, y1 = (cell_bounds[:, i] for i in range(4))
    xm = 0.5 * (x0 + x1)
    ym = 0.5 * (y0 + y1)
    quads = [
        np.stack([x0, xm, y0, ym], 1), np.stack([xm, x1, y0, ym], 1),
        np.stack([x0, xm, ym, y1], 1), np.stack([xm, x1, ym, y1], 1),
    ]
    return np.concatenate(quads, 0)


def quad2d_batch(
    func,
    bounds: tuple[float, float, float, float],
    rtol: float = 1e-9,
    atol: float | np.ndarray = 0.0,
    max_cells: int = 20000,
    initial_grid: tuple[int, int] = (2, 2),
    max_splits_per_round: int = 32,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Adaptively integrate a batch of integrands over a rectangle.

    func(x, y) with flat coordinate arrays must return (batch, npts) values.
    Returns (integrals, error_estimates, ncells). Every batch element must
    meet max(atol_b, rtol*|I_b|) or QuadratureError is raised.
    """
    x0, x1, y0, y1 = bounds
    xs = np.linspace(x0, x1, initial_grid[0] + 1)
    ys = np.linspace(y0, y1, initial_grid[1] + 1)
    cells = np.array([
        (xs[i], xs[i + 1], ys[j], ys[j + 1])
        for i in range(initial_grid[0]) for j in range(initial_grid[1])
    ])
    vals, errs = _eval_cells(func, cells)
    nbatch = vals.shape[0]
    atol_arr = np.broadcast_to(np.asarray(atol, float), (nbatch,))

    while True:
        total = vals.sum(axis=1)
        total_err = errs.sum(axis=1)
        tol = np.maximum(np.maximum(atol_arr, rtol * np.abs(total)), 1e-300)
        if np.all(total_err <= tol):
            return total, total_err, cells.shape[0]
        if cells.shape[0] >= max_cells:
            worst = float(np.max(total_err / tol))
            raise QuadratureError(
                f"quadrature did not converge within {max_cells} cells: "
                f"worst error ratio {worst:.3e} (error {total_err.max():.3e})"
            )
        score = (errs / tol[:, None]).max(axis=0)
        order = np.argsort(-score, kind="stable")
        nsplit = int(min(max_splits_per_round, cells.shape[0],
                         max(1, np.count_nonzero(score > 1e-3 * score[order[0]]))))
        sel = np.sort(order[:nsplit])
        new_cells = _split4(cells[sel])
        new_vals, new_errs = _eval_cells(func, new_cells)
        keep = np.ones(cells.shape[0], dtype=bool)
        keep[sel] = False
        cells = np.concatenate([cells[keep], new_cells], 0)
        vals = np.concatenate([vals[:, keep], new_vals], 1)
        errs = np.concatenate([errs[:, keep], new_errs], 1)


@dataclass(frozen=True)
class PanelRule:
    """Fixed composite K15 tensor rule with embedded G7 error weights."""

    x: np.ndarray        # (npts,) flattened tensor abscissae
    y: np.ndarray
    w_kronrod: np.ndarray
    w_error: np.ndarray  # w_kronrod - w_gauss, for the embedded estimate

    @property
    def npts(self) -> int:
        return self.x.size


def panel_rule(
    bounds: tuple[float, float, float, float], panels: tuple[int, int]
) -> PanelRule:
    def axis(a: float, b: float, cells: int):
        edges = np.linspace(a, b, cells + 1)
        c = 0.5 * (edges[:-1] + edges[1:])
        h = 0.5 * (edges[1] - edges[0])
        pts = (c[:, None] + h * NODES[None, :]).ravel()
        return pts, np.tile(h * W_KRONROD, cells), np.tile(h * W_GAUSS, cells)

    px, wkx, wgx = axis(bounds[0], bounds[1], panels[0])
    py, wky, wgy = axis(bounds[2], bounds[3], panels[1])
    nx, ny = px.size, py.size
    x = np.broadcast_to(px[:, None], (nx, ny)).ravel()
    y = np.broadcast_to(py[None, :], (nx, ny)).ravel()
    wk = (wkx[:, None] * wky[None, :]).ravel()
    wg = (wgx[:, None] * wgy[None, :]).ravel()
    for arr in (x, y, wk, wg):
        arr.setflags(write=False)
    return PanelRule(x=x, y=y, w_kronrod=wk, w_error=wk - wg)


def panel_integrate(values: np.ndarray, rule: PanelRule) -> tuple[np.ndarray, np.ndarray]:
    """Integrate rows of (batch, npts) values; returns (integrals, error estimates)."""
    return values @ rule.w_kronrod, np.abs(values @ rule.w_error)
