"""Assembly helpers shared by the CLI and the HTTP service.

Turns a dataset directory plus preparation artifacts into a ready-to-run
pipeline: settings resolution (config file < explicit overrides), backend
construction from a ``remote|scripted:<path>|replay:<path>`` spec, and
embedder selection.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from .llm import GenerationParams, RemoteBackend, ReplayBackend, ScriptedBackend
from .pipeline import Pipeline, PipelineConfig
from .schemadb import DatabaseSchema, Example, FileMissing, load_annotations, load_examples, load_schemas
from .vectorlib import LocalEmbedder, RemoteEmbedder, VectorLibrary


class ConfigError(ValueError):
    """Bad configuration or missing input artifacts; maps to exit code 2."""


@dataclass(frozen=True)
class Settings:
    model_id: str = "gpt-3.5-turbo"
    embed_model_id: str = "text-embedding-3-large"
    base_url: str = "https://api.openai.com/v1"
    api_key_env: str = "GRED_API_KEY"
    k: int = 10
    workers: int = 1
    timeout: float = 60.0
    max_attempts: int = 3
    max_in_flight: int = 4
    embed_dim: int = 256
    embedder: str = "auto"  # auto | local | remote
    seed: int = 0


def load_settings(config_path: str | None = None, **overrides) -> Settings:
    """Settings from an optional JSON config file; explicit overrides win."""
    values: dict = {}
    if config_path:
        path = Path(config_path)
        if not path.exists():
            raise ConfigError(f"config file {path} does not exist")
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        known = {f.name for f in dataclasses.fields(Settings)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        values.update(raw)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return Settings(**values)


@dataclass(frozen=True)
class BackendSpec:
    mode: str  # remote | scripted | replay
    path: str | None = None

    def describe(self) -> str:
        return self.mode if self.path is None else f"{self.mode}:{self.path}"


def parse_backend_spec(spec: str) -> BackendSpec:
    if spec == "remote":
        return BackendSpec("remote")
    for mode in ("scripted", "replay"):
        prefix = f"{mode}:"
        if spec.startswith(prefix):
            path = spec[len(prefix):]
            if not path:
                raise ConfigError(f"backend spec {spec!r} is missing a path")
            return BackendSpec(mode, path)
    raise ConfigError(f"unknown backend spec {spec!r}; expected remote|scripted:<script>|replay:<cache>")


def build_backend(spec: BackendSpec, settings: Settings):
    if spec.mode == "remote":
        return RemoteBackend(
            settings.base_url,
            api_key_env=settings.api_key_env,
            timeout=settings.timeout,
            max_attempts=settings.max_attempts,
            max_in_flight=settings.max_in_flight,
        )
    if spec.mode == "scripted":
        path = Path(spec.path)
        if not path.exists():
            raise ConfigError(f"script file {path} does not exist")
        return ScriptedBackend.from_file(path)
    if spec.mode == "replay":
        path = Path(spec.path)
        if not path.exists():
            raise ConfigError(f"replay cache {path} does not exist")
        return ReplayBackend(path)
    raise ConfigError(f"unknown backend mode {spec.mode!r}")


def build_embedder(settings: Settings, backend_mode: str):
    choice = settings.embedder
    if choice == "auto":
        choice = "remote" if backend_mode == "remote" else "local"
    if choice == "local":
        return LocalEmbedder(dim=settings.embed_dim)
    if choice == "remote":
        return RemoteEmbedder(
            settings.base_url,
            model_id=settings.embed_model_id,
            api_key_env=settings.api_key_env,
            timeout=settings.timeout,
        )
    raise ConfigError(f"unknown embedder {choice!r}; expected auto|local|remote")


# ------------------------------------------------------------------ datasets


@dataclass
class Dataset:
    schemas: dict[str, DatabaseSchema]
    train: list[Example]
    test: list[Example]


def load_dataset(dataset_dir: str, test_path: str | None = None, need_train: bool = True) -> Dataset:
    root = Path(dataset_dir)
    schemas_path = root / "schemas.json"
    if not schemas_path.exists():
        raise ConfigError(f"dataset dir {root} has no schemas.json")
    schemas = load_schemas(schemas_path)
    train: list[Example] = []
    if need_train:
        train_path = root / "train.jsonl"
        if not train_path.exists():
            raise ConfigError(f"dataset dir {root} has no train.jsonl")
        train = load_examples(train_path, schemas)
    test: list[Example] = []
    resolved_test = Path(test_path) if test_path else root / "test.jsonl"
    if resolved_test.exists():
        test = load_examples(resolved_test, schemas)
    elif test_path is not None:
        raise ConfigError(f"test file {resolved_test} does not exist")
    return Dataset(schemas=schemas, train=train, test=test)


@dataclass
class RuntimeBundle:
    dataset: Dataset
    library: VectorLibrary
    annotations: dict[str, str]
    pipeline: Pipeline
    backend_spec: BackendSpec
    settings: Settings
    config: PipelineConfig


def load_prepared(
    dataset_dir: str,
    prep_dir: str,
    backend_spec: BackendSpec,
    settings: Settings,
    *,
    test_path: str | None = None,
    k: int | None = None,
    enable_retune: bool = True,
    enable_debug: bool = True,
) -> RuntimeBundle:
    """Load dataset + preparation artifacts and assemble a pipeline."""
    dataset = load_dataset(dataset_dir, test_path=test_path)
    prep = Path(prep_dir)
    embeddings_path = prep / "embeddings.jsonl"
    annotations_path = prep / "annotations.jsonl"
    if not embeddings_path.exists():
        raise ConfigError(f"prep dir {prep} has no embeddings.jsonl (run prepare first)")
    if not annotations_path.exists():
        raise ConfigError(f"prep dir {prep} has no annotations.jsonl (run prepare first)")
    library = VectorLibrary.load(embeddings_path)
    try:
        annotation_records = load_annotations(annotations_path)
    except FileMissing as exc:
        raise ConfigError(str(exc)) from exc
    annotations = {db_id: record.annotation for db_id, record in annotation_records.items()}

    backend = build_backend(backend_spec, settings)
    embedder = build_embedder(settings, backend_spec.mode)
    if library.model_id != embedder.model_id:
        raise ConfigError(
            f"embedding cache was built with {library.model_id!r} but the configured embedder is "
            f"{embedder.model_id!r}"
        )
    config = PipelineConfig(
        k=k if k is not None else settings.k,
        enable_retune=enable_retune,
        enable_debug=enable_debug,
        gen_params=GenerationParams(model_id=settings.model_id),
        embed_model_id=embedder.model_id,
    )
    pipeline = Pipeline(
        library=library,
        train_examples={e.example_id: e for e in dataset.train},
        schemas=dataset.schemas,
        annotations=annotations,
        embedder=embedder,
        backend=backend,
        config=config,
    )
    return RuntimeBundle(dataset, library, annotations, pipeline, backend_spec, settings, config)
