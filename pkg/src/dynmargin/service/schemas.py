from pydantic import BaseModel, ConfigDict


class MarginRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    t0: str
    t: str
    T: str
    delta_T: int
    direction: str
    proba_mw: float
    det_mw: float
    final_mw: float


class Health(BaseModel):
    status: str
    rows: int
    loaded_at: str
    series: str | None = None


class ErrorBody(BaseModel):
    detail: str
