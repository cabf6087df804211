"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    backend: str


class ConfigResponse(BaseModel):
    backend: str
    k: int
    enable_retune: bool
    enable_debug: bool
    completion_model: str
    embed_model: str
    databases: list[str]
    library_size: int


class ParseRequest(BaseModel):
    text: str


class ComponentsModel(BaseModel):
    vis: str
    axes: str
    data: str


class ParseResponse(BaseModel):
    canonical: str
    chart: str
    components: ComponentsModel


class EqualRequest(BaseModel):
    a: str
    b: str


class EqualResponse(BaseModel):
    equal: bool
    a_parse_ok: bool
    b_parse_ok: bool


class PairItem(BaseModel):
    pred: str
    gold: str
    id: str = ""


class EvaluateRequest(BaseModel):
    pairs: list[PairItem] = Field(min_length=1)


class EvaluateResponse(BaseModel):
    n: int
    n_c: int
    n_vis: int
    n_axis: int
    n_data: int
    acc: float
    vis_acc: float
    axis_acc: float
    data_acc: float


class TranslateRequest(BaseModel):
    nlq: str
    db_id: str
    include_prompts: bool = False


class RetrievedItem(BaseModel):
    entry_id: str
    example_id: str
    score: float


class PromptMessage(BaseModel):
    role: str
    content: str


class StageDetail(BaseModel):
    prompt: list[PromptMessage]
    reply: str


class TranslateResponse(BaseModel):
    nlq: str
    db_id: str
    dvq_gen: str | None = None
    dvq_rtn: str | None = None
    dvq_dbg: str | None = None
    final: str
    error: str | None = None
    retrieved_nlq: list[RetrievedItem] = []
    retrieved_dvq: list[RetrievedItem] = []
    stages: dict[str, StageDetail] | None = None
