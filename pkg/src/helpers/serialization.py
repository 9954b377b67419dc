from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any
import json

import numpy as np
from pydantic import BaseModel


def to_jsonable(obj: Any) -> Any:
    """Serialize objects for JSON output.

    Recurses through dicts, lists, tuples and pydantic models and converts numpy
    arrays and scalars, enums, paths and datetimes to plain JSON values. Non-finite
    floats become strings ("inf", "-inf", "nan") so the output stays valid JSON.
    """
    if isinstance(obj, BaseModel):
        return to_jsonable(obj.model_dump())
    if isinstance(obj, Enum):
        return to_jsonable(obj.value)
    if isinstance(obj, datetime):
        return obj.isoformat()
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, np.ndarray):
        return [to_jsonable(item) for item in obj.tolist()]
    if isinstance(obj, np.generic):
        return to_jsonable(obj.item())
    if isinstance(obj, float):
        if np.isfinite(obj):
            return obj
        return "nan" if np.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(item) for item in obj]
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=False)
