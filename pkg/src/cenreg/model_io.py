"""Model persistence and the one-value-per-line CSV vector format.

The model file is versioned JSON with sorted keys.  Floats are written as
their shortest exact decimal form (Python repr), which parses back to the
identical float64, so write -> read -> write is byte-identical except for
the provenance timestamp.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .errors import ParseError
from .moments import StandardizationPlan
from .solver import FitResult
from .sparse import SymmetricDenseMatrix

FORMAT_VERSION = 1


@dataclass
class ModelFile:
    p: int
    plan: StandardizationPlan
    beta_transformed: np.ndarray
    beta_original: np.ndarray
    k_hat_sq: float
    covariance: SymmetricDenseMatrix | None
    covariance_kind: str
    provenance: dict = field(default_factory=dict)
    format_version: int = FORMAT_VERSION


def model_from_fit(result: FitResult, provenance: dict) -> ModelFile:
    return ModelFile(
        p=result.plan.n_cols,
        plan=result.plan,
        beta_transformed=result.beta_transformed,
        beta_original=result.beta_original,
        k_hat_sq=result.k_hat_sq,
        covariance=result.covariance,
        covariance_kind=result.covariance_kind,
        provenance=dict(provenance),
    )


def _vec(a: np.ndarray) -> list[float]:
    return [float(x) for x in a]


def write_model(path: str, model: ModelFile) -> None:
    doc = {
        "format_version": model.format_version,
        "p": model.p,
        "plan": {
            "means": _vec(model.plan.means),
            "stddevs": _vec(model.plan.stddevs),
            "scale": _vec(model.plan.scale),
            "center_enabled": model.plan.center_enabled,
            "scale_enabled": model.plan.scale_enabled,
            "intercept_col": model.plan.intercept_col,
        },
        "beta_transformed": _vec(model.beta_transformed),
        "beta_original": _vec(model.beta_original),
        "k_hat_sq": float(model.k_hat_sq),
        "covariance": (
            None if model.covariance is None else _vec(model.covariance.packed)
        ),
        "covariance_kind": model.covariance_kind,
        "provenance": model.provenance,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_model(path: str) -> ModelFile:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as err:
            raise ParseError(path, err.lineno, err.msg) from err
    try:
        version = doc["format_version"]
        if version != FORMAT_VERSION:
            raise ParseError(
                path, 1, f"unsupported model format version {version}"
            )
        raw_plan = doc["plan"]
        plan = StandardizationPlan(
            means=np.asarray(raw_plan["means"], dtype=np.float64),
            stddevs=np.asarray(raw_plan["stddevs"], dtype=np.float64),
            scale=np.asarray(raw_plan["scale"], dtype=np.float64),
            center_enabled=bool(raw_plan["center_enabled"]),
            scale_enabled=bool(raw_plan["scale_enabled"]),
            intercept_col=raw_plan["intercept_col"],
        )
        p = int(doc["p"])
        cov = doc["covariance"]
        covariance = (
            None if cov is None
            else SymmetricDenseMatrix(p, np.asarray(cov, dtype=np.float64))
        )
        return ModelFile(
            p=p,
            plan=plan,
            beta_transformed=np.asarray(doc["beta_transformed"], dtype=np.float64),
            beta_original=np.asarray(doc["beta_original"], dtype=np.float64),
            k_hat_sq=float(doc["k_hat_sq"]),
            covariance=covariance,
            covariance_kind=doc["covariance_kind"],
            provenance=doc.get("provenance", {}),
        )
    except (KeyError, TypeError, ValueError) as err:
        if isinstance(err, ParseError):
            raise
        raise ParseError(path, 1, f"malformed model file: {err}") from err


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def read_vector_csv(path: str) -> np.ndarray:
    """One value per line; a single leading header line is auto-detected."""
    values: list[float] = []
    with open(path) as fh:
        lines = fh.readlines()
    start = 0
    if lines:
        try:
            float(lines[0].strip())
        except ValueError:
            start = 1  # header line
    for k in range(start, len(lines)):
        text = lines[k].strip()
        if not text:
            continue
        try:
            values.append(float(text))
        except ValueError:
            raise ParseError(
                path, k + 1, f"could not parse {text!r} as a number"
            ) from None
    if not values:
        raise ParseError(path, 1, "no numeric values found")
    return np.asarray(values, dtype=np.float64)


def write_vector_csv(path: str, values: np.ndarray, header: str) -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for v in values:
            fh.write(f"{float(v)!r}\n")
