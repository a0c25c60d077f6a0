"""Analytic gain curves behind the standard five plots, emitted as CSV data.

Grids are fixed and documented here: the decay-rate family {0.8, 0.9, 0.95,
0.99} on a near-origin grid (251 points on [0, 0.5]) and a full grid (601
points on [0, pi]); the temporal window family {2, 5, 10, 20} on the full
grid.  Rows are `omega,gain,param`; plotting is out of scope.
"""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .analysis import h_exp, k_temporal_exp, k_temporal_window

RHO_GRID = (0.8, 0.9, 0.95, 0.99)
WINDOW_GRID = (2, 5, 10, 20)
OMEGA_ORIGIN = np.linspace(0.0, 0.5, 251)
OMEGA_FULL = np.linspace(0.0, math.pi, 601)


def _rows(gain_fn, params, omegas):
    return [(w, gain_fn(p, w), p) for p in params for w in omegas]


def figure_tables() -> dict:
    """Figure name -> list of (omega, gain, param) rows."""
    return {
        "fig1_spatial_exp_origin": _rows(h_exp, RHO_GRID, OMEGA_ORIGIN),
        "fig2_spatial_exp_full": _rows(h_exp, RHO_GRID, OMEGA_FULL),
        "fig3_temporal_exp_origin": _rows(lambda p, w: k_temporal_exp(p, w)[0],
                                          RHO_GRID, OMEGA_ORIGIN),
        "fig4_temporal_exp_full": _rows(lambda p, w: k_temporal_exp(p, w)[0],
                                        RHO_GRID, OMEGA_FULL),
        "fig5_temporal_window_full": _rows(lambda p, w: k_temporal_window(p, w)[0],
                                           WINDOW_GRID, OMEGA_FULL),
    }


def table_to_csv(rows) -> str:
    lines = ["omega,gain,param"]
    for omega, gain, param in rows:
        lines.append(f"{format(omega, '.17g')},{format(gain, '.17g')},{param}")
    return "\n".join(lines) + "\n"


def write_figures(out_dir) -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, rows in figure_tables().items():
        path = out / f"{name}.csv"
        path.write_text(table_to_csv(rows))
        written.append(path)
    return written
