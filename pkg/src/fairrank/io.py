"""CSV/JSON readers and writers for matrices, merit models and lotteries."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .errors import DataError, InvariantError
from .merit import DirichletMultinomialModel, EmpiricalMeritDistribution, GaussianRelevanceModel


def matrix_to_csv(M, prefix: str = "k=") -> str:
    """Rows are agents, columns positions; header ``k=1..k=n``."""
    M = np.asarray(M, dtype=float)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"{prefix}{k}" for k in range(1, M.shape[1] + 1)])
    for row in M:
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def matrix_from_csv(text: str) -> np.ndarray:
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows:
        raise DataError("empty matrix file")
    if rows[0] and rows[0][0].startswith("k="):
        rows = rows[1:]
    try:
        M = np.array([[float(v) for v in r] for r in rows])
    except ValueError as exc:
        raise DataError(f"malformed matrix CSV: {exc}") from None
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DataError(f"matrix must be square, got shape {M.shape}")
    return M


def read_matrix(path) -> np.ndarray:
    try:
        return matrix_from_csv(Path(path).read_text())
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def model_from_dict(data: dict):
    """Merit model from its JSON form.

    ``{"kind": "empirical", "support": [[...], ...], "probs": [...]}``,
    ``{"kind": "dirichlet", "alpha": [[...], ...]}`` or
    ``{"kind": "gaussian", "mean": [...], "std": [...]}``.
    """
    kind = data.get("kind")
    try:
        if kind == "empirical":
            return EmpiricalMeritDistribution(data["support"], data["probs"])
        if kind == "dirichlet":
            return DirichletMultinomialModel(data["alpha"])
        if kind == "gaussian":
            return GaussianRelevanceModel(data["mean"], data["std"])
    except KeyError as exc:
        raise DataError(f"merit model of kind {kind!r} is missing field {exc}") from None
    raise DataError(f"unknown merit model kind {kind!r}")


def model_to_dict(model) -> dict:
    if isinstance(model, EmpiricalMeritDistribution):
        return {"kind": "empirical", "support": model.support.tolist(), "probs": model.probs.tolist()}
    if isinstance(model, DirichletMultinomialModel):
        return {"kind": "dirichlet", "alpha": model.alpha.tolist()}
    if isinstance(model, GaussianRelevanceModel):
        return {"kind": "gaussian", "mean": model.mean.tolist(), "std": model.std.tolist()}
    raise InvariantError(f"cannot serialise {type(model).__name__}")


def read_model(path):
    try:
        return model_from_dict(json.loads(Path(path).read_text()))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None


def read_vector(source: str) -> np.ndarray:
    """A vector given inline (``"1,0.5,0.5"``) or as a JSON/CSV file path."""
    p = Path(source)
    text = p.read_text() if p.exists() else source
    text = text.strip()
    try:
        if text.startswith("["):
            return np.asarray(json.loads(text), dtype=float)
        return np.array([float(v) for v in text.replace("\n", ",").split(",") if v.strip()])
    except ValueError as exc:
        raise DataError(f"cannot parse vector {source!r}: {exc}") from None
