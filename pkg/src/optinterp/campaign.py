"""Experiment campaign driver: a grid of optimisation runs plus summary
tables shaped like the degree-by-dimension tables of the study.

A campaign file is JSON:

    {
      "defaults": {"starts": 10, "seed": 0},
      "rows": [
        {"domain": "cube", "dim": 1, "degree": 3},
        {"domain": "ball", "dim": 2, "degree": 2, "starts": 5}
      ]
    }

Each row becomes one result file in the output directory; failures are
recorded and the campaign continues.  Summaries hold one line per dimension
with the constants at 2 decimals next to full-precision columns, and
regenerate byte-identically from the stored result files.
"""

import json
import os
from concurrent.futures import ProcessPoolExecutor

from .domains import Domain
from .io import load_result, save_result, _atomic_write_text
from .optimizer import InnerParams, OptimConfig, optimize

_ROW_KEYS = {
    "domain", "dim", "degree", "starts", "seed", "refine_tol", "mesh_cap",
    "max_mesh_points",
}


def parse_campaign(path) -> list:
    """Campaign file -> list of OptimConfig, one per row."""
    try:
        with open(path) as handle:
            data = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot parse campaign file {path}: {exc}") from exc
    rows = data.get("rows", [])
    if not rows:
        raise ValueError(f"campaign file {path} lists no rows")
    defaults = data.get("defaults", {})
    configs = []
    for i, row in enumerate(rows):
        merged = {**defaults, **row}
        unknown = set(merged) - _ROW_KEYS
        if unknown:
            raise ValueError(f"row {i}: unknown keys {sorted(unknown)}")
        try:
            domain = Domain(merged.pop("domain"), int(merged["dim"]))
            cfg = OptimConfig(
                degree=int(merged.pop("degree")),
                dim=int(merged.pop("dim")),
                domain=domain,
                inner=InnerParams(),
                **{k: v for k, v in merged.items()},
            )
            cfg.validate()
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"row {i} is invalid: {exc}") from exc
        configs.append(cfg)
    return configs


def row_filename(cfg: OptimConfig) -> str:
    return f"{cfg.domain.kind}_d{cfg.dim}_n{cfg.degree}.json"


def _run_row(args):
    cfg, out_path = args
    result = optimize(cfg)
    save_result(result, out_path)
    return result.lam


def run_campaign(path, out_dir, jobs: int = 1, progress=None) -> int:
    """Run every campaign row; returns the number of failed rows.

    Per-row results land in out_dir; summary CSVs (one per domain kind) are
    rebuilt from the result files afterwards.
    """
    configs = parse_campaign(path)
    os.makedirs(out_dir, exist_ok=True)
    jobs = max(1, int(jobs))
    tasks = [(cfg, os.path.join(out_dir, row_filename(cfg))) for cfg in configs]
    failures = []
    if jobs == 1:
        for cfg, out_path in tasks:
            try:
                lam = _run_row((cfg, out_path))
                if progress:
                    progress(f"{row_filename(cfg)}: lambda={lam:.6f}")
            except Exception as exc:
                failures.append((row_filename(cfg), str(exc)))
                if progress:
                    progress(f"{row_filename(cfg)}: FAILED ({exc})")
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for (cfg, _), outcome in zip(tasks, pool.map(_try_row, tasks)):
                if outcome is None:
                    if progress:
                        progress(f"{row_filename(cfg)}: done")
                else:
                    failures.append((row_filename(cfg), outcome))
                    if progress:
                        progress(f"{row_filename(cfg)}: FAILED ({outcome})")
    write_summaries(out_dir)
    if failures:
        report = "\n".join(f"{name}: {err}" for name, err in failures)
        _atomic_write_text(os.path.join(out_dir, "failures.txt"), report + "\n")
    return len(failures)


def _try_row(args):
    try:
        _run_row(args)
        return None
    except Exception as exc:
        return str(exc)


def summarize_results(results: list) -> str:
    """Dimension-by-degree CSV with 2-decimal and full-precision columns."""
    by_cell = {}
    for res in results:
        by_cell[(res.config.dim, res.config.degree)] = res.lam
    dims = sorted({d for d, _ in by_cell})
    degrees = sorted({n for _, n in by_cell})
    header = ["d"]
    for n in degrees:
        header += [f"n{n}", f"n{n}_full"]
    lines = [",".join(header)]
    for d in dims:
        cells = [str(d)]
        for n in degrees:
            lam = by_cell.get((d, n))
            if lam is None:
                cells += ["", ""]
            else:
                cells += [f"{lam:.2f}", format(lam, ".17g")]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_summaries(out_dir):
    """Regenerate summary_<domain>.csv files from stored result files."""
    results = []
    for name in sorted(os.listdir(out_dir)):
        if name.endswith(".json"):
            try:
                results.append(load_result(os.path.join(out_dir, name)))
            except Exception:
                continue
    for kind in sorted({r.config.domain.kind for r in results}):
        subset = [r for r in results if r.config.domain.kind == kind]
        _atomic_write_text(
            os.path.join(out_dir, f"summary_{kind}.csv"), summarize_results(subset)
        )
