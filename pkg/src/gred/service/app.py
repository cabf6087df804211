"""FastAPI application wrapping the core package.

The service holds one prepared runtime (schemas, vector library, annotations,
chat backend) and exposes translation plus the parser/evaluator utilities to
any number of clients. Batch corpus runs stay in the CLI; this surface is for
interactive and multi-client use.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from ..dvq import DvqError, canonical_equal, decompose, parse_dvq, render_canonical
from ..metrics import GoldUnparsable, match_pair, summarize
from ..runtime import RuntimeBundle
from . import schemas as api


def _parse_error_detail(exc: DvqError) -> dict:
    detail = {"type": type(exc).__name__, "message": str(exc)}
    offset = getattr(exc, "offset", None)
    if offset is not None:
        detail["offset"] = offset
    return detail


def create_app(bundle: RuntimeBundle) -> FastAPI:
    app = FastAPI(title="gred", version="0.1.0")
    pipeline = bundle.pipeline

    @app.get("/health", response_model=api.HealthResponse)
    def health():
        return api.HealthResponse(status="ok", backend=bundle.backend_spec.describe())

    @app.get("/config", response_model=api.ConfigResponse)
    def config():
        return api.ConfigResponse(
            backend=bundle.backend_spec.describe(),
            k=bundle.config.k,
            enable_retune=bundle.config.enable_retune,
            enable_debug=bundle.config.enable_debug,
            completion_model=bundle.config.gen_params.model_id,
            embed_model=bundle.config.embed_model_id,
            databases=sorted(bundle.dataset.schemas),
            library_size=len(bundle.library),
        )

    @app.post("/dvq/parse", response_model=api.ParseResponse)
    def dvq_parse(request: api.ParseRequest):
        try:
            query = parse_dvq(request.text)
        except DvqError as exc:
            raise HTTPException(status_code=422, detail=_parse_error_detail(exc))
        parts = decompose(query)
        return api.ParseResponse(
            canonical=render_canonical(query),
            chart=query.chart.value,
            components=api.ComponentsModel(vis=parts.vis, axes=parts.axes, data=parts.data),
        )

    @app.post("/dvq/equal", response_model=api.EqualResponse)
    def dvq_equal(request: api.EqualRequest):
        def parses(text: str) -> bool:
            try:
                parse_dvq(text)
                return True
            except DvqError:
                return False

        a_ok = parses(request.a)
        b_ok = parses(request.b)
        return api.EqualResponse(equal=canonical_equal(request.a, request.b), a_parse_ok=a_ok, b_parse_ok=b_ok)

    @app.post("/evaluate", response_model=api.EvaluateResponse)
    def evaluate(request: api.EvaluateRequest):
        try:
            records = [
                match_pair(pair.pred, pair.gold, pair_id=pair.id or str(i))
                for i, pair in enumerate(request.pairs)
            ]
            summary = summarize(records)
        except GoldUnparsable as exc:
            raise HTTPException(status_code=422, detail={"type": "GoldUnparsable", "message": str(exc)})
        return api.EvaluateResponse(**summary.to_dict())

    @app.post("/translate", response_model=api.TranslateResponse)
    def translate(request: api.TranslateRequest):
        if request.db_id not in bundle.dataset.schemas:
            raise HTTPException(status_code=404, detail=f"unknown db_id {request.db_id!r}")
        if not request.nlq.strip():
            raise HTTPException(status_code=422, detail="nlq must be non-empty")
        trace = pipeline.translate(request.nlq, request.db_id)
        stages = None
        if request.include_prompts:
            stages = {}
            for name, evidence in (("gen", trace.gen), ("rtn", trace.rtn), ("dbg", trace.dbg)):
                if evidence is not None:
                    stages[name] = api.StageDetail(
                        prompt=[
                            api.PromptMessage(role=m.role.value, content=m.content)
                            for m in evidence.prompt
                        ],
                        reply=evidence.reply,
                    )
        return api.TranslateResponse(
            nlq=trace.nlq,
            db_id=trace.db_id,
            dvq_gen=trace.dvq_gen,
            dvq_rtn=trace.dvq_rtn,
            dvq_dbg=trace.dvq_dbg,
            final=trace.final,
            error=trace.error,
            retrieved_nlq=[
                api.RetrievedItem(entry_id=e, example_id=x, score=s)
                for e, x, s in (trace.gen.retrieved or [] if trace.gen else [])
            ],
            retrieved_dvq=[
                api.RetrievedItem(entry_id=e, example_id=x, score=s)
                for e, x, s in (trace.rtn.retrieved or [] if trace.rtn else [])
            ],
            stages=stages,
        )

    return app
