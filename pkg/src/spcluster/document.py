"""PathDocument: a self-describing JSON record of a solution path.

Layout (schema version ``1.0``)::

    {
      "schema_version": "1.0",
      "metadata": {"n": ..., "p": ..., "data_sha256": ..., "xi": ...,
                   "standardized": ..., "config": {...}, "timings": {...}?},
      "solutions": [
        {"delta", "lambda", "k_total", "k_clust", "iterations", "converged",
         "objective", "log_likelihood", "merges", "bvr_triggered", "splits",
         "sizes", "centers", "assignment"}, ...
      ],
      "selection": {"a", "solution_index", "k_star", "k_clust", "ratios"} | null
    }

``assignment`` holds 1-based cluster ids in data row order; ``centers[j]``
is the center of cluster ``j + 1``. Solutions appear in generation order.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict

import numpy as np

from .selection import choose_k, log_likelihood

SCHEMA_VERSION = "1.0"


class SchemaError(ValueError):
    """Document is malformed or of an unsupported major version."""


def data_checksum(values: np.ndarray) -> str:
    arr = np.ascontiguousarray(values, dtype="<f8")
    digest = hashlib.sha256()
    digest.update(f"{arr.shape[0]}x{arr.shape[1]};".encode())
    digest.update(arr.tobytes())
    return digest.hexdigest()


def _record(sol, data) -> dict:
    st = sol.state
    return {
        "delta": sol.params.delta,
        "lambda": sol.params.lam,
        "k_total": int(sol.k_total),
        "k_clust": int(sol.k_clust),
        "iterations": int(sol.report.iterations),
        "converged": bool(sol.report.converged),
        "objective": float(sol.report.final_objective),
        "log_likelihood": log_likelihood(data, st),
        "merges": int(sol.report.merges_performed),
        "bvr_triggered": bool(sol.bvr_triggered),
        "splits": int(sol.splits),
        "sizes": [int(s) for s in st.sizes],
        "centers": st.centers.tolist(),
        "assignment": (st.assignment + 1).tolist(),
    }


def select_records(records: list, a: float = 0.05) -> dict:
    """Selection over stored records; mirrors :func:`spcluster.selection.select`."""
    seen = set()
    best = {}
    for idx, rec in enumerate(records):
        key = (rec["k_total"], tuple(rec["assignment"]))
        if key in seen:
            continue
        seen.add(key)
        cur = best.get(rec["k_total"])
        if cur is None or rec["log_likelihood"] > records[cur]["log_likelihood"]:
            best[rec["k_total"]] = idx
    ks = sorted(best)
    lls = [records[best[k]]["log_likelihood"] for k in ks]
    chosen, k_star, ratios = choose_k(ks, lls, a)
    return {
        "a": a,
        "solution_index": best[k_star],
        "k_star": int(k_star),
        "k_clust": int(records[best[k_star]]["k_clust"]),
        "ratios": [{"k_from": int(k1), "k_to": int(k2), "ratio": float(dr)}
                   for (k1, k2), dr in ratios],
    }


def path_document(path, data, *, a: float = 0.05, standardized: bool = False,
                  timings: dict | None = None) -> dict:
    records = [_record(sol, data) for sol in path.solutions]
    metadata = {
        "n": int(data.n),
        "p": int(data.p),
        "data_sha256": data_checksum(data.values),
        "xi": float(path.xi),
        "standardized": bool(standardized),
        "config": asdict(path.config) if path.config is not None else None,
    }
    if timings is not None:
        metadata["timings"] = timings
    distinct_k = {r["k_total"] for r in records}
    selection = select_records(records, a) if len(distinct_k) >= 2 else None
    return {"schema_version": SCHEMA_VERSION, "metadata": metadata,
            "solutions": records, "selection": selection}


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=1, allow_nan=True) + "\n"


def loads(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not a JSON document: {exc}") from exc
    version = str(doc.get("schema_version", "")) if isinstance(doc, dict) else ""
    if version.split(".")[0] != SCHEMA_VERSION.split(".")[0]:
        raise SchemaError(f"unsupported schema version {version!r}")
    if not isinstance(doc.get("solutions"), list):
        raise SchemaError("document has no solutions list")
    n = doc.get("metadata", {}).get("n")
    for rec in doc["solutions"]:
        if len(rec.get("assignment", ())) != n:
            raise SchemaError("solution assignment length differs from n")
    return doc
