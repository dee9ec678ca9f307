"""Problem files, jet files and deterministic report writers.

Problem file (JSON)::

    {"body": {"type": "ball", "center": [0, 0], "radius": 1},
     "field": {"name": "quadratic", "params": {}},      # or "jets": <jet file>
     "pipeline": "smooth", "order": 6,
     "box": {"lo": [-3, -3], "hi": [3, 3]}, "step": 0.05,
     "quad_res": null, "seed": 0,
     "query": [[2, 0]]}                                  # optional, for ``minimal``

Body specs: ``polytope`` (``vertices``), ``ball`` (``center``, ``radius``),
``ovaloid`` (``psi`` catalog name, ``params``, optional ``M``) and ``fio``
(``ovaloids``: list of ovaloid specs).

Jet file (JSON)::

    {"order": 3, "points": [{"y": [0, 0], "coeffs": {"(2,0)": 1.0, "(0,2)": 1.0}}]}
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import InvalidArgument
from .extension import Problem
from .fields import build_field
from .geometry import body_from_json
from .jets import JetFamily


def load_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InvalidArgument(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InvalidArgument(f"{path} is not valid JSON: {exc.msg} (line {exc.lineno})") from None
    if not isinstance(data, dict):
        raise InvalidArgument(f"{path}: top-level JSON value must be an object")
    return data


def is_jet_file(data: dict) -> bool:
    return "points" in data and "order" in data and "body" not in data


def field_from_json(spec):
    if spec is None:
        return None
    if isinstance(spec, str):
        return build_field(spec)
    if not isinstance(spec, dict) or "name" not in spec:
        raise InvalidArgument("field spec must be a catalog name or {'name': ..., 'params': ...}")
    return build_field(spec["name"], spec.get("params"))


def problem_from_json(data: dict, **overrides) -> Problem:
    if "body" not in data:
        raise InvalidArgument("problem file needs a 'body'")
    body = body_from_json(data["body"])
    field = field_from_json(data.get("field"))
    jets = JetFamily.from_json(data["jets"]) if data.get("jets") is not None else None
    box = data.get("box")
    if box is not None:
        try:
            box = (box["lo"], box["hi"])
        except (KeyError, TypeError):
            raise InvalidArgument("box must be {'lo': [...], 'hi': [...]}") from None
    kw = dict(body=body, field=field, jets=jets, order=data.get("order"),
              pipeline=data.get("pipeline", "smooth"), box=box, step=data.get("step"),
              quad_res=data.get("quad_res"), seed=int(data.get("seed", 0)),
              boundary_only=bool(data.get("boundary_only", False)))
    kw.update({k: v for k, v in overrides.items() if v is not None})
    return Problem(**kw)


def _clean(obj):
    """JSON-safe copy: numpy to Python, non-finite floats to ``None``."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                        for v in row])
    return path
