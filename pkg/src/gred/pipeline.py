"""Three-stage translation pipeline: retrieval-backed generation, style retuning,
and annotation-based schema debugging, with full per-example traces.

Every example is processed independently: a backend failure is recorded in the
example's trace and scored as a mismatch, never aborting the corpus. With a
deterministic backend and embedder, trace output is byte-identical regardless
of the worker count (traces carry no timing data).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .llm import ChatBackend, GenerationParams, annotation_params
from .metrics import EvalSummary, match_pair, summarize
from .prompts import (
    ChatMessage,
    annotation_prompt,
    debug_prompt,
    generation_prompt,
    retune_prompt,
)
from .schemadb import (
    AnnotatedDatabase,
    AnnotationRecord,
    DatabaseSchema,
    Example,
    MissingAnnotation,
)
from .vectorlib import KIND_DVQ, KIND_NLQ, Embedder, LibraryEntry, VectorLibrary


class ExtractionFailure(RuntimeError):
    """No DVQ candidate line was found in a completion reply."""


def extract_dvq_from_reply(reply: str) -> str:
    """Pull the first DVQ line out of a reply.

    Strips markdown header markers and leading ``#`` comment markers; a reply
    that is itself a bare DVQ is returned as-is.
    """
    if not reply or not reply.strip():
        raise ExtractionFailure("reply is empty")
    for raw_line in reply.splitlines():
        line = raw_line.strip()
        line = line.lstrip("#").strip()
        if line.lower().startswith("visualize "):
            return line
    raise ExtractionFailure("reply contains no line starting with 'Visualize'")


@dataclass(frozen=True)
class PipelineConfig:
    k: int = 10
    enable_retune: bool = True
    enable_debug: bool = True
    gen_params: GenerationParams = field(default_factory=GenerationParams)
    embed_model_id: str = ""

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass
class StageEvidence:
    prompt: list[ChatMessage]
    reply: str
    retrieved: list[tuple[str, str, float]] | None = None  # (entry_id, example_id, score)
    fallback: bool = False


@dataclass
class PipelineTrace:
    example_id: str
    nlq: str
    db_id: str
    gen: StageEvidence | None = None
    dvq_gen: str | None = None
    rtn: StageEvidence | None = None
    dvq_rtn: str | None = None
    dbg: StageEvidence | None = None
    dvq_dbg: str | None = None
    final: str = ""
    error: str | None = None

    def to_dict(self) -> dict:
        """Stable-field-order dict for JSONL traces; disabled stages are absent."""
        record: dict = {
            "example_id": self.example_id,
            "nlq": self.nlq,
            "db_id": self.db_id,
        }
        if self.gen is not None:
            record["retrieved_nlq"] = _retrieved_dicts(self.gen.retrieved)
            record["gen_prompt"] = _prompt_dicts(self.gen.prompt)
            record["gen_reply"] = self.gen.reply
        if self.dvq_gen is not None:
            record["dvq_gen"] = self.dvq_gen
        if self.rtn is not None:
            record["retrieved_dvq"] = _retrieved_dicts(self.rtn.retrieved)
            record["rtn_prompt"] = _prompt_dicts(self.rtn.prompt)
            record["rtn_reply"] = self.rtn.reply
            if self.rtn.fallback:
                record["rtn_fallback"] = True
        if self.dvq_rtn is not None:
            record["dvq_rtn"] = self.dvq_rtn
        if self.dbg is not None:
            record["dbg_prompt"] = _prompt_dicts(self.dbg.prompt)
            record["dbg_reply"] = self.dbg.reply
            if self.dbg.fallback:
                record["dbg_fallback"] = True
        if self.dvq_dbg is not None:
            record["dvq_dbg"] = self.dvq_dbg
        record["final"] = self.final
        if self.error is not None:
            record["error"] = self.error
        return record


def _prompt_dicts(messages: Sequence[ChatMessage]) -> list[dict]:
    return [{"role": m.role.value, "content": m.content} for m in messages]


def _retrieved_dicts(retrieved) -> list[dict]:
    return [
        {"entry_id": entry_id, "example_id": example_id, "score": score}
        for entry_id, example_id, score in (retrieved or [])
    ]


class Pipeline:
    """Runs the enabled stages over single examples or whole corpora."""

    def __init__(
        self,
        library: VectorLibrary,
        train_examples: Mapping[str, Example],
        schemas: Mapping[str, DatabaseSchema],
        annotations: Mapping[str, str],
        embedder: Embedder,
        backend: ChatBackend,
        config: PipelineConfig,
    ):
        self.library = library
        self.train_examples = dict(train_examples)
        self.schemas = dict(schemas)
        self.annotations = dict(annotations)
        self.embedder = embedder
        self.backend = backend
        self.config = config
        for entry in library.entries:
            if entry.example_id not in self.train_examples:
                raise ValueError(f"library entry {entry.entry_id} references unknown example {entry.example_id!r}")

    # -------------------------------------------------------------- stages

    def _ascending(self, hits: list[tuple[LibraryEntry, float]]):
        """top_k returns best-first; prompts want the most similar last."""
        return list(reversed(hits))

    def stage_generate(self, nlq: str, db_id: str) -> tuple[str, StageEvidence]:
        schema = self.schemas[db_id]
        query = self.embedder.embed(nlq)
        hits = self.library.top_k(query, KIND_NLQ, self.config.k)
        ascending = self._ascending(hits)
        shots = [(self.train_examples[entry.example_id], score) for entry, score in ascending]
        prompt = generation_prompt(nlq, schema, shots, self.schemas)
        result = self.backend.complete(prompt, self.config.gen_params)
        evidence = StageEvidence(
            prompt=prompt,
            reply=result.text,
            retrieved=[(e.entry_id, e.example_id, s) for e, s in hits],
        )
        return extract_dvq_from_reply(result.text), evidence

    def stage_retune(self, dvq_gen: str) -> tuple[str, StageEvidence]:
        query = self.embedder.embed(dvq_gen)
        hits = self.library.top_k(query, KIND_DVQ, self.config.k)
        references = [self.train_examples[entry.example_id].dvq for entry, _ in self._ascending(hits)]
        prompt = retune_prompt(references, dvq_gen)
        result = self.backend.complete(prompt, self.config.gen_params)
        evidence = StageEvidence(
            prompt=prompt,
            reply=result.text,
            retrieved=[(e.entry_id, e.example_id, s) for e, s in hits],
        )
        try:
            return extract_dvq_from_reply(result.text), evidence
        except ExtractionFailure:
            evidence.fallback = True
            return dvq_gen, evidence

    def stage_debug(self, dvq: str, db_id: str) -> tuple[str, StageEvidence]:
        annotation = self.annotations.get(db_id)
        if annotation is None:
            raise MissingAnnotation(f"no annotation for database {db_id!r}")
        db = AnnotatedDatabase(self.schemas[db_id], annotation)
        prompt = debug_prompt(db, dvq)
        result = self.backend.complete(prompt, self.config.gen_params)
        evidence = StageEvidence(prompt=prompt, reply=result.text)
        try:
            return extract_dvq_from_reply(result.text), evidence
        except ExtractionFailure:
            evidence.fallback = True
            return dvq, evidence

    # ------------------------------------------------------------- corpora

    def translate(self, nlq: str, db_id: str, trace_id: str = "adhoc") -> PipelineTrace:
        """Translate one NLQ through every enabled stage; errors are captured in the trace."""
        trace = PipelineTrace(trace_id, nlq, db_id)
        try:
            if db_id not in self.schemas:
                raise KeyError(f"unknown db_id {db_id!r}")
            dvq_gen, trace.gen = self.stage_generate(nlq, db_id)
            trace.dvq_gen = dvq_gen
            current = dvq_gen
            if self.config.enable_retune:
                current, trace.rtn = self.stage_retune(current)
                trace.dvq_rtn = current
            if self.config.enable_debug:
                current, trace.dbg = self.stage_debug(current, db_id)
                trace.dvq_dbg = current
            trace.final = current
        except Exception as exc:  # per-example isolation: record, score as mismatch
            trace.error = f"{type(exc).__name__}: {exc}"
            trace.final = ""
        return trace

    def run_example(self, example: Example) -> PipelineTrace:
        return self.translate(example.nlq, example.db_id, trace_id=example.example_id)

    def run_corpus(
        self,
        examples: Sequence[Example],
        workers: int = 1,
        on_trace: Callable[[PipelineTrace], None] | None = None,
    ) -> tuple[list[PipelineTrace], EvalSummary]:
        """Run every example (optionally in parallel) and score finals against golds.

        Traces are delivered to ``on_trace`` in input order regardless of worker
        count, so checkpointed output files are deterministic.
        """
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                traces = []
                for trace in pool.map(self.run_example, examples):
                    if on_trace is not None:
                        on_trace(trace)
                    traces.append(trace)
        else:
            traces = []
            for example in examples:
                trace = self.run_example(example)
                if on_trace is not None:
                    on_trace(trace)
                traces.append(trace)
        records = [
            match_pair(trace.final, example.dvq, pair_id=example.example_id)
            for trace, example in zip(traces, examples)
        ]
        return traces, summarize(records)


# ----------------------------------------------------------------- preparation


def annotate_databases(
    schemas: Mapping[str, DatabaseSchema],
    backend: ChatBackend,
    model_id: str = "gpt-3.5-turbo",
    existing: Mapping[str, AnnotationRecord] | None = None,
) -> tuple[list[AnnotationRecord], list[tuple[str, str]]]:
    """Generate one annotation per database, skipping databases already annotated.

    Returns (new records, failures) where each failure is (db_id, reason).
    """
    existing = existing or {}
    params = annotation_params(model_id)
    records: list[AnnotationRecord] = []
    failures: list[tuple[str, str]] = []
    for db_id in sorted(schemas):
        if db_id in existing:
            continue
        try:
            prompt = annotation_prompt(schemas[db_id])
            result = backend.complete(prompt, params)
            if not result.text.strip():
                raise ValueError("annotation reply is empty")
            records.append(AnnotationRecord(db_id, model_id, result.text.strip()))
        except Exception as exc:
            failures.append((db_id, f"{type(exc).__name__}: {exc}"))
    return records, failures
