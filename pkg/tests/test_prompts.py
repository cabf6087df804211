from __future__ import annotations

import random
from pathlib import Path

import pytest

from gred.dvq import ChartType
from gred.prompts import (
    ChatMessage,
    EmptyReferences,
    MalformedShot,
    Role,
    annotation_prompt,
    debug_prompt,
    generation_prompt,
    nlq_reconstruction_prompt,
    render_messages,
    retune_prompt,
    schema_substitution_prompt,
)
from gred.schemadb import AnnotatedDatabase, Example

from fixture_corpus import PETS_DVQ, RETUNE_ORIGINAL_DVQ, RETUNE_REFERENCE_DVQ, DEBUG_ORIGINAL_DVQ
from fixture_schemas import hr_schema, pets_schema

GOLDEN_DIR = Path(__file__).parent / "goldens"

PETS_SHOT_NLQ = (
    "Find the id and weight of all pets whose age is older than 1 "
    "Visualize by bar chart, sort by the Y-axis from high to low."
)
PETS_TARGET_NLQ = (
    "Find the id and weight of all pets whose age is older than 1 "
    "Visualize by bar chart, sort in descending by the names."
)


def _golden(name: str) -> str:
    return (GOLDEN_DIR / "prompts" / name).read_text(encoding="utf-8")


def _hr_annotation() -> str:
    return (GOLDEN_DIR / "hr_annotation.txt").read_text(encoding="utf-8").rstrip("\n")


def _pets_shot(score: float = 0.9) -> tuple[Example, float]:
    example = Example("shot-1", PETS_SHOT_NLQ, PETS_DVQ, "pets_1", ChartType.BAR)
    return example, score


# ------------------------------------------------------------------ goldens


def test_generation_prompt_matches_golden():
    messages = generation_prompt(
        PETS_TARGET_NLQ, pets_schema(), [_pets_shot()], {"pets_1": pets_schema()}
    )
    assert render_messages(messages) == _golden("generation_pets.txt")


def test_retune_prompt_matches_golden():
    messages = retune_prompt([RETUNE_REFERENCE_DVQ], RETUNE_ORIGINAL_DVQ)
    assert render_messages(messages) == _golden("retune_references.txt")


def test_debug_prompt_matches_golden():
    db = AnnotatedDatabase(hr_schema(), _hr_annotation())
    messages = debug_prompt(db, DEBUG_ORIGINAL_DVQ)
    assert render_messages(messages) == _golden("debug_employees.txt")


def test_annotation_prompt_matches_golden():
    messages = annotation_prompt(hr_schema())
    assert render_messages(messages) == _golden("annotation_departments.txt")


def test_schema_substitution_prompt_matches_golden():
    messages = schema_substitution_prompt("filmdom", "cinema", "Movie", "Text")
    assert render_messages(messages) == _golden("schema_substitution_cinema.txt")


def test_nlq_reconstruction_prompt_matches_golden():
    messages = nlq_reconstruction_prompt(PETS_SHOT_NLQ, pets_schema())
    assert render_messages(messages) == _golden("nlq_reconstruction_pets.txt")


# ----------------------------------------------------------------- contracts


def test_generation_prompt_zero_shots():
    messages = generation_prompt(PETS_TARGET_NLQ, pets_schema(), [], {})
    assert len(messages) == 2
    assert "A: Visualize" not in messages[1].content
    assert messages[1].content.endswith("### Data Visualization Query:")


def test_generation_prompt_orders_shots_ascending():
    low = Example("low", "low-similarity question", PETS_DVQ, "pets_1", ChartType.BAR)
    high = Example("high", "high-similarity question", PETS_DVQ, "pets_1", ChartType.BAR)
    schemas = {"pets_1": pets_schema()}
    messages = generation_prompt(PETS_TARGET_NLQ, pets_schema(), [(high, 0.9), (low, 0.2)], schemas)
    body = messages[1].content
    assert body.index("low-similarity question") < body.index("high-similarity question")
    assert body.index("high-similarity question") < body.index(PETS_TARGET_NLQ)


def test_generation_prompt_most_similar_adjacent_to_question():
    rng = random.Random(17)
    schemas = {"pets_1": pets_schema()}
    for _ in range(25):
        shots = []
        scores = [round(rng.random(), 6) for _ in range(rng.randint(1, 8))]
        for i, score in enumerate(scores):
            shots.append((Example(f"s{i}", f"shot question {i}", PETS_DVQ, "pets_1", ChartType.BAR), score))
        messages = generation_prompt(PETS_TARGET_NLQ, pets_schema(), shots, schemas)
        body = messages[1].content
        best = max(range(len(scores)), key=lambda i: (scores[i], -i))
        blocks = body.split("\n\n")
        assert f"shot question {best}" in blocks[-2]


def test_generation_prompt_rejects_bad_shot():
    bad = Example("bad", "q", "Visualize BAR SELECT a FROM t", "pets_1", ChartType.BAR)
    with pytest.raises(MalformedShot):
        generation_prompt(PETS_TARGET_NLQ, pets_schema(), [(bad, 0.5)], {"pets_1": pets_schema()})


def test_retune_prompt_requires_references():
    with pytest.raises(EmptyReferences):
        retune_prompt([], RETUNE_ORIGINAL_DVQ)


def test_retune_prompt_numbers_ten_references():
    refs = [f"Visualize BAR SELECT a , b FROM t{i}" for i in range(10)]
    messages = retune_prompt(refs, RETUNE_ORIGINAL_DVQ)
    body = messages[-1].content
    assert "10 - Visualize BAR SELECT a , b FROM t9" in body
    assert "1 - Visualize BAR SELECT a , b FROM t0" in body
    assert "11 -" not in body


def test_retune_warning_appears_twice():
    messages = retune_prompt([RETUNE_REFERENCE_DVQ], RETUNE_ORIGINAL_DVQ)
    text = render_messages(messages)
    assert text.count("Do not Modify the column name in Original DVQ") == 2


def test_retune_fixed_point_reference_is_fine():
    messages = retune_prompt([RETUNE_ORIGINAL_DVQ], RETUNE_ORIGINAL_DVQ)
    assert messages[-1].content.count(RETUNE_ORIGINAL_DVQ) == 2


def test_debug_prompt_preserves_annotation_blank_lines():
    annotation = "Table t:\n- one.\n\n- two."
    db = AnnotatedDatabase(pets_schema(), annotation)
    messages = debug_prompt(db, PETS_DVQ)
    assert annotation in messages[-1].content


def test_annotation_prompt_contains_schema_twice_for_hr_input():
    messages = annotation_prompt(hr_schema())
    body = messages[1].content
    assert body.count("# Table departments, columns = [ * , Dept_ID , Dept_NAME , Manager_ID , Location_ID ]") == 2


def test_substitution_prompt_is_single_user_message():
    messages = schema_substitution_prompt("db", "happy_hour", "HH_ID", "number")
    assert len(messages) == 1
    assert messages[0].role is Role.USER


def test_reconstruction_prompt_shape():
    messages = nlq_reconstruction_prompt("any question", pets_schema())
    assert [m.role for m in messages] == [Role.SYSTEM, Role.USER]


def test_no_builder_emits_empty_or_multi_system():
    all_prompts = [
        generation_prompt(PETS_TARGET_NLQ, pets_schema(), [_pets_shot()], {"pets_1": pets_schema()}),
        retune_prompt([RETUNE_REFERENCE_DVQ], RETUNE_ORIGINAL_DVQ),
        debug_prompt(AnnotatedDatabase(hr_schema(), _hr_annotation()), DEBUG_ORIGINAL_DVQ),
        annotation_prompt(pets_schema()),
        schema_substitution_prompt("a", "b", "c", "d"),
        nlq_reconstruction_prompt("q", pets_schema()),
    ]
    for messages in all_prompts:
        assert all(m.content.strip() for m in messages)
        assert sum(1 for m in messages if m.role is Role.SYSTEM) <= 1


def test_chat_message_rejects_empty_content():
    with pytest.raises(ValueError):
        ChatMessage(Role.USER, "   ")
