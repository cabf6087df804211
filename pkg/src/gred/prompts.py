"""Builders for every chat-prompt family the pipeline sends.

Each builder returns a role-tagged message list. The one-shot exchanges embedded
in the retune/debug/annotation prompts are immutable template constants, never
regenerated. All content uses LF line endings with trailing whitespace stripped,
so golden-file comparisons are byte-stable.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

from .dvq import DvqError, parse_dvq
from .schemadb import AnnotatedDatabase, DatabaseSchema, Example, format_schema_block


class Role(str, Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"


@dataclass(frozen=True)
class ChatMessage:
    role: Role
    content: str

    def __post_init__(self):
        if not self.content or not self.content.strip():
            raise ValueError("chat message content must be non-empty")


class MalformedShot(ValueError):
    """A few-shot example's gold DVQ does not parse or its database is unknown."""


class EmptyReferences(ValueError):
    """The retune prompt needs at least one reference DVQ."""


def _clean(text: str) -> str:
    return "\n".join(line.rstrip() for line in text.split("\n"))


def _message(role: Role, content: str) -> ChatMessage:
    return ChatMessage(role, _clean(content))


def _validate(messages: list[ChatMessage]) -> list[ChatMessage]:
    system_count = sum(1 for m in messages if m.role is Role.SYSTEM)
    if system_count > 1:
        raise ValueError("prompt must not contain more than one system message")
    if system_count == 1 and messages[0].role is not Role.SYSTEM:
        raise ValueError("the system message must come first")
    return messages


def render_messages(messages: Sequence[ChatMessage]) -> str:
    """Serialize a message list to the text form used for golden files."""
    blocks = [f"Role: {m.role.value.upper()}\nContent:\n{m.content}" for m in messages]
    return "\n\n".join(blocks) + "\n"


# --------------------------------------------------------------------------
# Shared one-shot material: the annotated HR database used by the annotation
# and debugger templates.

_HR_SCHEMA_BLOCK = """\
# Table departments, columns = [ * , Dept_ID , Dept_NAME , Manager_ID , Location_ID ]
# Table job_history, columns = [ * , employee_id , START_DATE , END_DATE , JOB_ID , Dept_ID ]
# Table jobs, columns = [ * , JOB_ID , JOB_TITLE , minimum_salary , maximum_salary ]
# Foreign_keys = [ job_history.JOB_ID = jobs.JOB_ID , job_history.Dept_ID = departments.Dept_ID ]"""

_HR_ANNOTATION = """\
Table departments:
- Stores data related to different departments within an organization.
- Columns:
  - Dept_ID: Unique identifier for each department.
  - Dept_NAME: Name of the department.
  - Manager_ID: Identifier of the manager of the department.
  - Location_ID: Identifier of the location where the department is situated.

Table job_history:
- Stores historical data of job changes for employees.
- Columns:
  - employee_id: Identifier of the employee.
  - START_DATE: Start date of the job role.
  - END_DATE: End date of the job role.
  - JOB_ID: Identifier of the job role.
  - Dept_ID: Identifier of the department during the job role.

Table jobs:
- Contains information about different job roles.
- Columns:
  - JOB_ID: Unique identifier for each job role.
  - JOB_TITLE: Title of the job role.
  - minimum_salary: Minimum salary for the job role.
  - maximum_salary: Maximum salary for the job role.

Foreign Keys:
- job_history.JOB_ID references jobs.JOB_ID, linking job history to specific job roles.
- job_history.Dept_ID references departments.Dept_ID, connecting job history to departments."""


# ----------------------------------------------------------------- annotation

_ANNOTATION_SYSTEM = "You are a data mining engineer with ten years of experience in data visualization."

_ANNOTATION_REQUEST = "#### Please generate detailed natural language annotations to the following database schemas."


def annotation_prompt(schema: DatabaseSchema) -> list[ChatMessage]:
    """Prompt asking for natural-language annotations of a database schema."""
    user = (
        f"{_ANNOTATION_REQUEST}\n"
        f"### Database Schemas:\n{_HR_SCHEMA_BLOCK}\n"
        f"\n"
        f"### Natural Language Annotations:\n"
        f"A:\n{_HR_ANNOTATION}\n"
        f"\n"
        f"### Database Schemas:\n{format_schema_block(schema)}\n"
        f"\n"
        f"### Natural Language Annotations:\n"
        f"A:"
    )
    return _validate([_message(Role.SYSTEM, _ANNOTATION_SYSTEM), _message(Role.USER, user)])


# ----------------------------------------------------------------- generation

_GENERATION_SYSTEM = "Please follow the syntax in the examples instead of SQL syntax."

_GENERATION_HEADER = (
    "#### Given Natural Language Questions, Generate DVQs based on their correspoding Database Schemas."
)

_CHART_TYPE_LINE = "### Chart Type: [ BAR , PIE , LINE , SCATTER ]"


def _question_block(schema: DatabaseSchema, nlq: str, answer: str | None) -> str:
    lines = [
        "### Database Schemas:",
        format_schema_block(schema),
        "#",
        _CHART_TYPE_LINE,
        "### Natural Language Question:",
        f'# "{nlq}"',
        "### Data Visualization Query:",
    ]
    if answer is not None:
        lines.append(f"A: {answer}")
    return "\n".join(lines)


def generation_prompt(
    target_nlq: str,
    schema: DatabaseSchema,
    shots: Sequence[tuple[Example, float]],
    schemas: Mapping[str, DatabaseSchema],
) -> list[ChatMessage]:
    """Few-shot generation prompt.

    Shots are rendered in ascending order of similarity so the most similar
    example sits immediately before the question block; the input order does
    not matter. Zero shots degenerate to instruction plus question.
    """
    if not target_nlq or not target_nlq.strip():
        raise ValueError("target NLQ must be non-empty")
    ordered = sorted(enumerate(shots), key=lambda item: (item[1][1], item[0]))
    blocks = [_GENERATION_HEADER]
    for _, (example, _score) in ordered:
        shot_schema = schemas.get(example.db_id)
        if shot_schema is None:
            raise MalformedShot(f"shot {example.example_id} references unknown db {example.db_id!r}")
        try:
            parse_dvq(example.dvq)
        except DvqError as exc:
            raise MalformedShot(f"shot {example.example_id} gold DVQ does not parse: {exc}") from exc
        blocks.append(_question_block(shot_schema, example.nlq, example.dvq))
    blocks.append(_question_block(schema, target_nlq, None))
    user = "\n\n".join(blocks)
    return _validate([_message(Role.SYSTEM, _GENERATION_SYSTEM), _message(Role.USER, user)])


# --------------------------------------------------------------------- retune

_RETUNE_SYSTEM = (
    "The Reference Data Visualization Queries(DVQs) all comply with the syntax of DVQ. "
    "Please follow the syntax of the referenced DVQ to modify the Original DVQ."
)

_RETUNE_INSTRUCTIONS = """\
#### Given the Reference DVQs, please modify the Original DVQ to mimic the style of the Reference DVQs.
#### NOTE: Do not Modify the column name in Original DVQ. Especially do not Modify the column names in the ORDER clause!"""

_RETUNE_SHOT_USER = """\
### Reference DVQs:
*****[Top-K-1 DVQs]*****
10 - Visualize BAR SELECT JOB_ID , SUM(DEPARTMENT_ID) FROM employees WHERE first_name LIKE '%D%' OR first_name LIKE '%S%' GROUP BY JOB_ID ORDER BY SUM(DEPARTMEN)

#### Given the Reference DVQs, please modify the Original DVQ to mimic the style of the Reference DVQs.
#### NOTE: Do not Modify the column name in Original DVQ. Especially do not Modify the column names in the ORDER clause!
### Original DVQ:
# Visualize BAR SELECT JOB_ID , COUNT(DISTINCT JOB_ID) FROM employees WHERE DEPARTMENT_ID = (SELECT DEPARTMENT_ID FROM departments WHERE DEPARTMENT_NAME = Finance)
A: Let's think step by step!"""

_RETUNE_SHOT_ASSISTANT = """\
### Modified DVQ:
# Visualize BAR SELECT JOB_ID , COUNT(JOB_ID) FROM employees AS T1 JOIN departments AS T2 ON T1.DEPARTMENT_ID = T2.DEPARTMENT_ID WHERE T2.DEPARTMENT_NAME = 'Finance' GROUP BY JOB_ID"""


def retune_prompt(reference_dvqs: Sequence[str], original_dvq: str) -> list[ChatMessage]:
    """Style-retuning prompt: numbered references (most similar last) plus the original DVQ."""
    if not reference_dvqs:
        raise EmptyReferences("at least one reference DVQ is required")
    numbered = "\n".join(f"{i} - {dvq}" for i, dvq in enumerate(reference_dvqs, start=1))
    user = (
        f"### Reference DVQs:\n{numbered}\n"
        f"\n"
        f"{_RETUNE_INSTRUCTIONS}\n"
        f"### Original DVQ:\n"
        f"# {original_dvq}\n"
        f"A: Let's think step by step!"
    )
    return _validate(
        [
            _message(Role.SYSTEM, _RETUNE_SYSTEM),
            _message(Role.USER, _RETUNE_SHOT_USER),
            _message(Role.ASSISTANT, _RETUNE_SHOT_ASSISTANT),
            _message(Role.USER, user),
        ]
    )


# ---------------------------------------------------------------------- debug

_DEBUG_NOTE = (
    "#### NOTE: Don't replace column names in Original DVQ that already exist in the database schemas, "
    "especially column names in GROUP BY Clause!"
)

_DEBUG_REPLACE_REQUEST = (
    "#### Given Database Schemas and their corresponding Natural Language Annotations, "
    "Please replace the column names in the Data Visualization Query(DVQ, a new Programming "
    "Language abstracted from Vega-Zero) that do not exist in the database."
)

_DEBUG_SHOT_USER = (
    f"{_ANNOTATION_REQUEST}\n"
    f"### Database Schemas:\n{_HR_SCHEMA_BLOCK}\n"
    f"\n"
    f"### Natural Language Annotations:\n"
    f"A:\n{_HR_ANNOTATION}\n"
    f"\n"
    f"{_DEBUG_REPLACE_REQUEST}\n"
    f"{_DEBUG_NOTE}\n"
    f"### Original DVQ:\n"
    f"# Visualize BAR SELECT jobid , COUNT(jobid) FROM employees AS T1 JOIN departments AS T2 "
    f"ON T1.DEPARTMENT_ID = T2.DEPARTMENT_ID WHERE T2.DEPARTMENT_NAME = 'Finance' GROUP BY FIRST_NAME\n"
    f"A: Let's think step by step!"
)

_DEBUG_SHOT_ASSISTANT = """\
### Revised DVQ:
# Visualize BAR SELECT JOB_ID , COUNT(JOB_ID) FROM employees AS T1 JOIN departments AS T2 ON T1.Dept_ID = T2.Dept_ID WHERE T2.Dept_NAME = 'Finance' GROUP BY FIRST_NAME"""


def debug_prompt(db: AnnotatedDatabase, original_dvq: str) -> list[ChatMessage]:
    """Schema-debugging prompt over an annotated database and the DVQ to repair."""
    user = (
        f"{_ANNOTATION_REQUEST}\n"
        f"### Database Schemas:\n{format_schema_block(db.schema)}\n"
        f"\n"
        f"### Natural Language Annotations:\n{db.annotation}\n"
        f"\n"
        f"{_DEBUG_REPLACE_REQUEST}\n"
        f"{_DEBUG_NOTE}\n"
        f"### Original DVQ:\n"
        f"# {original_dvq}\n"
        f"A: Let's think step by step!"
    )
    return _validate(
        [
            _message(Role.SYSTEM, _DEBUG_NOTE),
            _message(Role.USER, _DEBUG_SHOT_USER),
            _message(Role.ASSISTANT, _DEBUG_SHOT_ASSISTANT),
            _message(Role.USER, user),
        ]
    )


# --------------------------------------------------------- schema substitution


def schema_substitution_prompt(
    db_name: str, table_name: str, column_name: str, col_type: str
) -> list[ChatMessage]:
    """Single-turn prompt asking for a one-word synonym of a column name."""
    for field in (db_name, table_name, column_name, col_type):
        if not field:
            raise ValueError("all substitution fields must be non-empty")
    user = (
        f"In the '{table_name}' table '{table_name}' based on the '{db_name}' database, "
        f"what alternative name could be used for a column with the data type '{col_type}' "
        f"that conveys a similar meaning to '{column_name}'? "
        f"Please return only one English word rather than a sentence."
    )
    return _validate([_message(Role.USER, user)])


# ----------------------------------------------------------- NLQ reconstruction

_RECONSTRUCTION_SYSTEM = "You are an expert at paraphrasing questions about databases."

_RECONSTRUCTION_INSTRUCTIONS = """\
#### Given the Database Schemas and a Natural Language Question, rewrite the question with the following rules:
#### 1. Replace most of the nouns in the question with synonyms based on the context.
#### 2. Remove explicit mentions of table names and column names from the question.
#### 3. Keep the intent of the question unchanged."""


def nlq_reconstruction_prompt(nlq: str, schema: DatabaseSchema) -> list[ChatMessage]:
    """Prompt that rewrites an NLQ to drop explicit schema mentions."""
    if not nlq or not nlq.strip():
        raise ValueError("nlq must be non-empty")
    user = (
        f"{_RECONSTRUCTION_INSTRUCTIONS}\n"
        f"### Database Schemas:\n{format_schema_block(schema)}\n"
        f"\n"
        f"### Natural Language Question:\n"
        f'# "{nlq}"\n'
        f"### Rewritten Question:\n"
        f"A:"
    )
    return _validate([_message(Role.SYSTEM, _RECONSTRUCTION_SYSTEM), _message(Role.USER, user)])
