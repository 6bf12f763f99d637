"""Model (de)serialization.

Every fitted model round-trips through one JSON document carrying all
coefficients, diagnostics and the training span. Floats are rendered with
17 significant digits, so a save/load/save cycle is byte-identical.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .. import jsonio
from ..errors import ValidationError
from ..numerics.gaussian import GaussianModel
from ..numerics.ols import OlsFit
from .anomaly import AnomalyDetector
from .parx import ParxModel
from .threeline import LinePiece, PercentileLines, ThreeLineModel

FORMAT_VERSION = 1


def _ols_to_doc(fit: OlsFit | None) -> dict | None:
    if fit is None:
        return None
    return {
        "coefficients": fit.coefficients.tolist(),
        "std_errors": fit.std_errors.tolist(),
        "t_values": fit.t_values.tolist(),
        "p_values": fit.p_values.tolist(),
        "adjusted_r2": fit.adjusted_r2,
        "n": fit.n,
        "residuals": fit.residuals.tolist(),
    }


def _ols_from_doc(doc: dict | None) -> OlsFit | None:
    if doc is None:
        return None
    return OlsFit(
        coefficients=np.asarray(doc["coefficients"], dtype=np.float64),
        std_errors=np.asarray(doc["std_errors"], dtype=np.float64),
        t_values=np.asarray(doc["t_values"], dtype=np.float64),
        p_values=np.asarray(doc["p_values"], dtype=np.float64),
        adjusted_r2=float(doc["adjusted_r2"]),
        n=int(doc["n"]),
        residuals=np.asarray(doc["residuals"], dtype=np.float64),
    )


def parx_to_doc(model: ParxModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "parx",
        "meter_id": model.meter_id,
        "order": model.order,
        "train_start_hour": model.train_start_hour,
        "train_days": model.train_days,
        "intercepts": model.intercepts.tolist(),
        "ar": model.ar.tolist(),
        "exo": model.exo.tolist(),
        "fitted": [bool(f) for f in model.fitted],
        "diagnostics": [_ols_to_doc(d) for d in model.diagnostics],
    }


def parx_from_doc(doc: dict) -> ParxModel:
    _check(doc, "parx")
    return ParxModel(
        meter_id=doc["meter_id"],
        order=int(doc["order"]),
        intercepts=np.asarray(doc["intercepts"], dtype=np.float64),
        ar=np.asarray(doc["ar"], dtype=np.float64),
        exo=np.asarray(doc["exo"], dtype=np.float64),
        fitted=np.asarray(doc["fitted"], dtype=bool),
        diagnostics=tuple(_ols_from_doc(d) for d in doc["diagnostics"]),
        train_start_hour=int(doc["train_start_hour"]),
        train_days=int(doc["train_days"]),
    )


def _piece_to_doc(piece: LinePiece | None) -> dict | None:
    if piece is None:
        return None
    return {"slope": piece.slope, "intercept": piece.intercept}


def _piece_from_doc(doc: dict | None) -> LinePiece | None:
    if doc is None:
        return None
    return LinePiece(slope=float(doc["slope"]), intercept=float(doc["intercept"]))


def _family_to_doc(family: PercentileLines) -> dict:
    return {
        "low": _piece_to_doc(family.low),
        "mid": _piece_to_doc(family.mid),
        "high": _piece_to_doc(family.high),
    }


def _family_from_doc(doc: dict) -> PercentileLines:
    return PercentileLines(
        low=_piece_from_doc(doc["low"]),
        mid=_piece_from_doc(doc["mid"]),
        high=_piece_from_doc(doc["high"]),
    )


def three_line_to_doc(model: ThreeLineModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "three_line",
        "meter_id": model.meter_id,
        "train_start_hour": model.train_start_hour,
        "train_hours": model.train_hours,
        "p90": _family_to_doc(model.p90),
        "p10": _family_to_doc(model.p10),
        "cooling_gradient": model.cooling_gradient,
        "heating_gradient": model.heating_gradient,
        "base_load": model.base_load,
        "temp_lo": model.temp_lo,
        "temp_hi": model.temp_hi,
        "n_obs": model.n_obs,
        "train_mean": model.train_mean,
    }


def three_line_from_doc(doc: dict) -> ThreeLineModel:
    _check(doc, "three_line")
    return ThreeLineModel(
        meter_id=doc["meter_id"],
        p90=_family_from_doc(doc["p90"]),
        p10=_family_from_doc(doc["p10"]),
        cooling_gradient=doc["cooling_gradient"],
        heating_gradient=doc["heating_gradient"],
        base_load=doc["base_load"],
        temp_lo=float(doc["temp_lo"]),
        temp_hi=float(doc["temp_hi"]),
        n_obs=int(doc["n_obs"]),
        train_mean=float(doc["train_mean"]),
        train_start_hour=int(doc["train_start_hour"]),
        train_hours=int(doc["train_hours"]),
    )


def detector_to_doc(detector: AnomalyDetector) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "anomaly_detector",
        "meter_id": detector.meter_id,
        "epsilon": detector.epsilon,
        "train_start_hour": detector.train_start_hour,
        "train_days": detector.train_days,
        "gaussian": {
            "mu": detector.gaussian.mu,
            "sigma2": detector.gaussian.sigma2,
            "n_train": detector.gaussian.n_train,
        },
        "parx": parx_to_doc(detector.parx),
    }


def detector_from_doc(doc: dict) -> AnomalyDetector:
    _check(doc, "anomaly_detector")
    g = doc["gaussian"]
    return AnomalyDetector(
        meter_id=doc["meter_id"],
        parx=parx_from_doc(doc["parx"]),
        gaussian=GaussianModel(
            mu=float(g["mu"]), sigma2=float(g["sigma2"]), n_train=int(g["n_train"])
        ),
        epsilon=float(doc["epsilon"]),
        train_start_hour=int(doc["train_start_hour"]),
        train_days=int(doc["train_days"]),
    )


def _check(doc: dict, kind: str) -> None:
    if doc.get("kind") != kind:
        raise ValidationError(f"expected a {kind} document, got {doc.get('kind')!r}")
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValidationError(f"unsupported format_version {doc.get('format_version')!r}")


def save_model(doc: dict, path: str | Path) -> None:
    Path(path).write_text(jsonio.dumps(doc))


def load_model(path: str | Path) -> dict:
    doc = jsonio.loads(Path(path).read_text())
    if not isinstance(doc, dict) or "kind" not in doc or "format_version" not in doc:
        raise ValidationError(f"{path}: not a model document")
    return doc


def model_from_doc(doc: dict):
    kind = doc.get("kind")
    if kind == "parx":
        return parx_from_doc(doc)
    if kind == "three_line":
        return three_line_from_doc(doc)
    if kind == "anomaly_detector":
        return detector_from_doc(doc)
    raise ValidationError(f"unknown model kind {kind!r}")
