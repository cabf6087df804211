from __future__ import annotations

import json

import pytest

from gred.dvq import ChartType
from gred.llm import ScriptedBackend
from gred.pipeline import Pipeline, PipelineConfig
from gred.schemadb import Example, schema_to_dict
from gred.vectorlib import LocalEmbedder, build_library

from fixture_corpus import PETS_DVQ
from fixture_schemas import employees_schema, pets_schema

PETS_SHOT_NLQ = (
    "Find the id and weight of all pets whose age is older than 1 "
    "Visualize by bar chart, sort by the Y-axis from high to low."
)

TRAIN_EXAMPLES = [
    Example("t1", PETS_SHOT_NLQ, PETS_DVQ, "pets_1", ChartType.BAR),
    Example(
        "t2",
        "Show the number of pets per type in a pie chart.",
        "Visualize PIE SELECT PetType , COUNT(*) FROM Pets GROUP BY PetType",
        "pets_1",
        ChartType.PIE,
    ),
    Example(
        "t3",
        "Scatter the age and weight of each pet.",
        "Visualize SCATTER SELECT pet_age , weight FROM Pets",
        "pets_1",
        ChartType.SCATTER,
    ),
    Example(
        "t4",
        "How many employees per department id, bar chart please.",
        "Visualize BAR SELECT Dept_ID , COUNT(*) FROM employees GROUP BY Dept_ID",
        "hr_robust",
        ChartType.BAR,
    ),
    Example(
        "t5",
        "Trend of salary over hire date as a line chart.",
        "Visualize LINE SELECT hire_date , salary FROM employees ORDER BY hire_date ASC",
        "hr_robust",
        ChartType.LINE,
    ),
]

ANNOTATIONS = {
    "pets_1": "Table Has_Pet links students to pets.\nTable Pets stores pet type, age, and weight.",
    "hr_robust": "Table employees stores staff details.\nTable departments stores department names.",
}


@pytest.fixture(scope="session")
def schemas():
    return {"pets_1": pets_schema(), "hr_robust": employees_schema()}


@pytest.fixture(scope="session")
def embedder():
    return LocalEmbedder(dim=64)


@pytest.fixture(scope="session")
def train_examples():
    return list(TRAIN_EXAMPLES)


@pytest.fixture(scope="session")
def library(train_examples, embedder):
    return build_library(train_examples, embedder)


@pytest.fixture
def make_pipeline(library, train_examples, schemas, embedder):
    def factory(backend=None, **config_kwargs):
        backend = backend or ScriptedBackend(fallback="echo_dvq")
        config = PipelineConfig(**{"k": 10, **config_kwargs})
        return Pipeline(
            library=library,
            train_examples={e.example_id: e for e in train_examples},
            schemas=schemas,
            annotations=ANNOTATIONS,
            embedder=embedder,
            backend=backend,
            config=config,
        )

    return factory


def write_dataset_dir(tmp_path, train=None, test=None):
    """Lay out a dataset directory (schemas.json, train.jsonl, test.jsonl) for CLI tests."""
    from gred.schemadb import example_to_dict

    train = TRAIN_EXAMPLES if train is None else train
    test = TRAIN_EXAMPLES if test is None else test
    dataset = tmp_path / "dataset"
    dataset.mkdir(exist_ok=True)
    (dataset / "schemas.json").write_text(
        json.dumps([schema_to_dict(pets_schema()), schema_to_dict(employees_schema())]),
        encoding="utf-8",
    )
    for name, examples in (("train.jsonl", train), ("test.jsonl", test)):
        with open(dataset / name, "w", encoding="utf-8") as handle:
            for example in examples:
                handle.write(json.dumps(example_to_dict(example)) + "\n")
    return dataset


def write_prep_dir(tmp_path, library_obj, annotations=None):
    """Lay out a preparation directory (embeddings.jsonl, annotations.jsonl)."""
    prep = tmp_path / "prep"
    prep.mkdir(exist_ok=True)
    library_obj.save(prep / "embeddings.jsonl")
    with open(prep / "annotations.jsonl", "w", encoding="utf-8") as handle:
        for db_id, annotation in (annotations or ANNOTATIONS).items():
            handle.write(
                json.dumps({"db_id": db_id, "model_id": "scripted", "annotation": annotation}) + "\n"
            )
    return prep
