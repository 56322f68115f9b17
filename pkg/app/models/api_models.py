from typing import Any, Dict, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from app.models.report_models import TheoremId


class ConfigRequest(BaseModel):
    """Body carrying a config document in the same schema as the CLI's --config file."""

    model_config = ConfigDict(extra="forbid")

    config: Dict[str, Any]


class EvalRequest(ConfigRequest):
    k_start: int = 1
    k_end: int = 10


class VerifyRequest(ConfigRequest):
    theorem: TheoremId
    budget: Optional[int] = Field(default=None, ge=1)
    restrict: Literal["all", "odd", "torsion"] = "all"


class DegeneracyRequest(ConfigRequest):
    allow_minus_one: bool = False
