import math
import os
from dataclasses import dataclass

import numpy as np

from .base import BaseTool

from src.PerceptronLab.engines import gardner_derrida as gd
from src.PerceptronLab.utils.errors import DomainError


def arange_inclusive(start, stop, step):
    """start, start + step, ... up to stop inclusive; values rounded to 12 decimals."""
    if not step > 0:
        raise DomainError(f"grid step must be positive, got {step}")
    if stop < start:
        raise DomainError(f"grid stop {stop} is below start {start}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(count)]


@dataclass(frozen=True)
class SweepGrid:
    q_values: tuple
    alpha_values: tuple

    def __post_init__(self):
        for name, values in (("q", self.q_values), ("alpha", self.alpha_values)):
            if not values:
                raise DomainError(f"{name} grid is empty")
            if any(b <= a for a, b in zip(values, values[1:])):
                raise DomainError(f"{name} grid must be strictly increasing")
        if not (0.0 <= self.q_values[0] and self.q_values[-1] < 1.0):
            raise DomainError("q grid must lie in [0, 1)")
        if not (0.0 < self.alpha_values[0] and self.alpha_values[-1] < gd.SPHERICAL_CAPACITY):
            raise DomainError(f"alpha grid must lie in (0, {gd.SPHERICAL_CAPACITY:g})")

    @classmethod
    def from_ranges(cls, q_range, alpha_range):
        return cls(tuple(arange_inclusive(*q_range)), tuple(arange_inclusive(*alpha_range)))


def minima_crossing(alpha_values, minima_bits, level=-1.0):
    """Linear interpolation of the first alpha where the per-alpha minimum drops below `level`."""
    for (a0, v0), (a1, v1) in zip(zip(alpha_values, minima_bits), zip(alpha_values[1:], minima_bits[1:])):
        if v0 > level >= v1:
            return a0 + (a1 - a0) * (v0 - level) / (v0 - v1)
    return None


class Sweep_Tool(BaseTool):

    def __init__(self, config=None):
        super().__init__(
            tool_name="Sweep_Tool",
            tool_description="Evaluates GD(alpha, q) on a full (alpha, q) grid and writes the grid and the per-alpha minima as CSV.",
            tool_version="1.0.0",
            input_types={
                "out": "str - grid CSV path (default <out_dir>/sweep.csv); minima go to <stem>.minima.csv.",
                "q_range": "tuple - (start, stop, step), default .001:.001:.999.",
                "alpha_range": "tuple - (start, stop, step), default .846:.00005:.847.",
                "alpha_values": "list - explicit alpha grid, overrides alpha_range (optional).",
                "q_values": "list - explicit q grid, overrides q_range (optional).",
            },
            output_type="dict - { success, message, exit_code, payload: {rows, crossing_alpha, minima_monotone, outputs} }",
            demo_commands=[
                {
                    "command": "tool.execute(out='runs/sweep.csv')",
                    "description": "999 x 21 grid; the per-alpha minimum crosses -1 bit near alpha = .84655.",
                },
                {
                    "command": "tool.execute(alpha_values=[0.847], q_values=[0.5])",
                    "description": "Single-point grid, one data row.",
                },
            ],
            config=config,
        )

    def grid(self, q_range=None, alpha_range=None, q_values=None, alpha_values=None):
        cfg = {
            key: float(self.setting("sweep", key, None, default))
            for key, default in (
                ("q_start", 0.001), ("q_stop", 0.999), ("q_step", 0.001),
                ("alpha_start", 0.846), ("alpha_stop", 0.847), ("alpha_step", 0.00005),
            )
        }
        q_range = q_range or (cfg["q_start"], cfg["q_stop"], cfg["q_step"])
        alpha_range = alpha_range or (cfg["alpha_start"], cfg["alpha_stop"], cfg["alpha_step"])
        qs = tuple(float(q) for q in q_values) if q_values else tuple(arange_inclusive(*q_range))
        alphas = tuple(float(a) for a in alpha_values) if alpha_values else tuple(arange_inclusive(*alpha_range))
        return SweepGrid(q_values=qs, alpha_values=alphas)

    def run(self, out=None, q_range=None, alpha_range=None, q_values=None, alpha_values=None,
            rule=None, node_count=None, abs_tol=None):
        grid = self.grid(q_range, alpha_range, q_values, alpha_values)
        spec = self.quadrature_spec(rule=rule, node_count=node_count, abs_tol=abs_tol)
        out = self.output_path(out, "sweep.csv")
        minima_out = f"{os.path.splitext(out)[0]}.minima.csv"

        self.log.info(f"grid {len(grid.alpha_values)} alpha x {len(grid.q_values)} q")
        scan = gd.gd_scan(grid.alpha_values, grid.q_values, spec)
        rows = [
            (a, q, float(scan.table[i, j]), float(scan.table[i, j]) / gd.LN2)
            for i, a in enumerate(grid.alpha_values)
            for j, q in enumerate(grid.q_values)
        ]
        minima = scan.minima()
        minima_rows = [(a, q, v, v / gd.LN2) for a, q, v in minima]
        minima_bits = [r[3] for r in minima_rows]
        crossing = minima_crossing(grid.alpha_values, minima_bits)
        monotone = bool(np.all(np.diff(minima_bits) < 0)) if len(minima_bits) > 1 else True

        manifest = self.start_manifest("sweep", out, {
            "q_grid": [grid.q_values[0], grid.q_values[-1], len(grid.q_values)],
            "alpha_grid": [grid.alpha_values[0], grid.alpha_values[-1], len(grid.alpha_values)],
            "quadrature": spec.to_dict(),
        })
        self.write_csv(out, "sweep", rows, manifest)
        self.write_csv(minima_out, "sweep_minima", minima_rows, manifest)
        manifest.add_context("crossing_alpha", crossing)
        self.close_manifest(manifest)

        message = f"wrote {len(rows)} rows to {out} and {len(minima_rows)} minima to {minima_out}"
        if crossing is not None:
            message += f"\nper-alpha minimum crosses -1 bit at alpha ~ {crossing:.6f}"
        payload = {
            "rows": len(rows),
            "crossing_alpha": crossing,
            "minima_monotone": monotone,
            "outputs": [out, minima_out],
            "manifest": manifest.path,
        }
        return message, payload
