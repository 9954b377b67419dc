from datetime import datetime, timezone
from pydantic import BaseModel, ConfigDict


def utcnow():
    return datetime.now(timezone.utc)


class LabModel(BaseModel):
    """Base model for records that carry numpy arrays.

    Numpy arrays are admitted as field values (``arbitrary_types_allowed``) and are
    never coerced or copied by validation, so grids and fields keep their buffers.
    Use this base for mutable containers such as fields and run results.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)


class FrozenModel(BaseModel):
    """Base model for immutable parameter records.

    Unknown keys are rejected so that a misspelled configuration key surfaces as an
    error instead of being silently ignored.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")
