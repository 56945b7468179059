"""Result-file persistence and point export.

Results are schema-versioned JSON (floats survive the round trip exactly:
python serialises shortest round-trip representations); bulk point and mesh
data go to CSV with 17 significant digits.  Writes are atomic (temp file in
the target directory, then rename).
"""

import json
import os
import platform
import sys
import tempfile

import numpy as np

from . import __version__
from ._kernels import BACKEND
from .domains import Domain
from .fundamentals import PointSet
from .optimizer import OptimConfig, OptimResult, StartTrace
from .polyspace import enumerate_space

SCHEMA_VERSION = 1


class ResultFileError(Exception):
    """The file is not a readable result file."""


class SchemaVersionError(ResultFileError):
    """The file's schema version is not supported."""


def _environment() -> dict:
    import scipy

    return {
        "package": f"optinterp {__version__}",
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "backend": BACKEND,
    }


def result_to_dict(result: OptimResult) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "config": result.config.to_dict(),
        "result": {
            "lambda": result.lam,
            "points": result.best.points.tolist(),
            "mesh_m": result.mesh_m,
            "best_start": result.best.meta.get("start") if result.best.meta else None,
            "per_start": [t.to_dict() for t in result.per_start],
        },
        "environment": {**_environment(), "wall_time": result.wall_time},
        "provenance": {"parent": result.parent},
    }


def result_from_dict(data: dict) -> OptimResult:
    try:
        version = data["schema_version"]
    except (KeyError, TypeError):
        raise ResultFileError("missing schema_version; not a result file")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(
            f"result file has schema_version {version}, expected {SCHEMA_VERSION}"
        )
    try:
        cfg = OptimConfig.from_dict(data["config"])
        payload = data["result"]
        space = enumerate_space(cfg.degree, cfg.dim)
        best = PointSet(
            points=np.asarray(payload["points"], dtype=np.float64),
            space=space,
            domain=cfg.domain,
            meta={"seed": cfg.seed, "start": payload.get("best_start")},
        )
        return OptimResult(
            best=best,
            lam=float(payload["lambda"]),
            per_start=[StartTrace.from_dict(t) for t in payload["per_start"]],
            wall_time=float(data["environment"]["wall_time"]),
            config=cfg,
            mesh_m=int(payload["mesh_m"]),
            parent=data.get("provenance", {}).get("parent"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ResultFileError(f"corrupted result file: {exc}") from exc


def _atomic_write_text(path, text: str):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".json")
    except OSError as exc:
        raise OSError(f"cannot write to {path}: {exc}") from exc
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        os.unlink(tmp)
        raise OSError(f"cannot write to {path}: {exc}") from exc


def save_result(result: OptimResult, path):
    """Write a result file atomically (no partial file on failure)."""
    _atomic_write_text(path, json.dumps(result_to_dict(result), indent=1))


def load_result(path) -> OptimResult:
    try:
        with open(path) as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ResultFileError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ResultFileError(f"{path} is not valid JSON: {exc}") from exc
    return result_from_dict(data)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def export_points(result: OptimResult, path, fmt: str = "csv", proj=None):
    """Dump the best point set to CSV or JSON.

    `proj` selects a pair of 1-based coordinate indices for a
    two-dimensional projection of higher-dimensional sets.
    """
    n, d = result.config.degree, result.config.dim
    pts = result.best.points
    cols = list(range(d))
    if proj is not None:
        cols = [int(i) - 1 for i in proj]
        if len(cols) != 2 or not all(0 <= c < d for c in cols) or cols[0] == cols[1]:
            raise ValueError(f"invalid projection indices {proj} for d={d}")
    if fmt == "csv":
        lines = [
            f"# n={n} d={d} N={pts.shape[0]} lambda={_fmt(result.lam)}",
            ",".join(f"x{c + 1}" for c in cols),
        ]
        for row in pts:
            lines.append(",".join(_fmt(row[c]) for c in cols))
        _atomic_write_text(path, "\n".join(lines) + "\n")
    elif fmt == "json":
        _atomic_write_text(
            path,
            json.dumps(
                {
                    "n": n,
                    "d": d,
                    "N": pts.shape[0],
                    "lambda": result.lam,
                    "columns": [c + 1 for c in cols],
                    "points": [[float(row[c]) for c in cols] for row in pts],
                },
                indent=1,
            ),
        )
    else:
        raise ValueError(f"unknown export format {fmt!r} (use csv or json)")


def load_points(path) -> np.ndarray:
    """Read a points file written by export_points (CSV or JSON)."""
    text = open(path).read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return np.asarray(json.loads(text)["points"], dtype=np.float64)
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#") or line[0].isalpha():
            continue
        rows.append([float(v) for v in line.split(",")])
    if not rows:
        raise ResultFileError(f"no point rows found in {path}")
    return np.asarray(rows, dtype=np.float64)


def export_mesh_csv(mesh, path):
    """One mesh point per CSV row."""
    d = mesh.points.shape[1]
    lines = [",".join(f"x{i + 1}" for i in range(d))]
    for row in mesh.points:
        lines.append(",".join(_fmt(v) for v in row))
    _atomic_write_text(path, "\n".join(lines) + "\n")


def load_point_set(path, degree=None, dim=None, domain_kind=None):
    """Load either a result file or a bare points file as a PointSet.

    Bare CSV/JSON point files need degree and domain information supplied by
    the caller; result files carry their own.
    """
    try:
        result = load_result(path)
        return result.best
    except ResultFileError:
        pass
    if degree is None or dim is None or domain_kind is None:
        raise ResultFileError(
            f"{path} is not a result file; supply --degree/--dim/--domain to "
            "interpret a bare points file"
        )
    pts = load_points(path)
    space = enumerate_space(degree, dim)
    return PointSet(points=pts, space=space, domain=Domain(domain_kind, dim), meta=None)
