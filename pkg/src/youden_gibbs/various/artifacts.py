"""
Output artifacts: JSON and CSV writers with a reproducibility stamp

Every file carries the tool version, a hash of the resolved configuration,
the seed, the learning rate, the prior, the probability mode and the worker
count. JSON keys are sorted and CSV floats written with 17 significant digits
so reruns with the same seed are byte-identical.
"""
from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def to_jsonable(obj: Any) -> Any:
    """Recursively convert numpy scalars/arrays and tuples into JSON types"""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if np.isfinite(value) else None
    return obj


def canonical_json(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), ensure_ascii=False, indent=2, sort_keys=True)


def config_hash(config: Dict[str, Any]) -> str:
    """First 16 hex digits of the sha256 of the canonical configuration JSON"""
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()[:16]


def metadata(config: Dict[str, Any], seed: int, omega: Optional[float] = None,
             prior: Optional[dict] = None, probs_mode: Optional[str] = None,
             threads: int = 1, scaling: Optional[dict] = None) -> dict:
    """Run metadata; scaling (covariate rescaling map) only when the covariate was rescaled"""
    from youden_gibbs import __version__

    meta = {"version": __version__, "config_hash": config_hash(config), "seed": seed,
            "omega": omega, "prior": prior, "probs_mode": probs_mode, "threads": threads}
    if scaling is not None:
        meta["scaling"] = scaling
    return meta


def write_json(path: Path, payload: Dict[str, Any], meta: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(canonical_json({"metadata": meta, **payload}) + "\n", encoding="utf-8")
    logger.info("wrote %s", path)
    return path


def write_csv(path: Path, frame: pd.DataFrame, meta: dict) -> Path:
    """CSV with one leading '# metadata' comment line (read back with comment='#')"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = "# metadata " + json.dumps(to_jsonable(meta), sort_keys=True) + "\n"
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(header)
        frame.to_csv(fh, index=False, float_format=FLOAT_FORMAT)
    logger.info("wrote %s (%d rows)", path, len(frame))
    return path


def read_csv(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")
