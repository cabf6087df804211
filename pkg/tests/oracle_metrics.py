"""Independent brute-force component matcher used only to cross-check the metrics module.

Works by regular-expression splitting of the raw query text into chart / axes /
data substrings and comparing crude normalizations. It deliberately shares no
code with the package's parser or canonicalizer.
"""

from __future__ import annotations

import re

_CHARTS = {"BAR", "PIE", "LINE", "SCATTER"}
_QUOTE_RE = re.compile(r"('(?:[^']|'')*'|\"(?:[^\"]|\"\")*\")")
_SHAPE_RE = re.compile(r"(?is)^\s*visualize\s+(\w+)\s+select\s+(.+?)\s+from\s+(.+?)\s*$")


def _parens_balanced(text: str) -> bool:
    depth = 0
    for char in text:
        if char == "(":
            depth += 1
        elif char == ")":
            depth -= 1
            if depth < 0:
                return False
    return depth == 0


def _norm_segment(segment: str) -> str:
    segment = segment.lower()
    segment = segment.replace("<>", "!=")
    segment = re.sub(r"\s*(<=|>=|!=|=|<|>)\s*", r" \1 ", segment)
    segment = re.sub(r"\s*\(\s*", "(", segment)
    segment = re.sub(r"\s*\)", ")", segment)
    segment = re.sub(r"\s*,\s*", " , ", segment)
    return segment


def _norm(text: str) -> str:
    parts = _QUOTE_RE.split(text)
    out = []
    for i, part in enumerate(parts):
        if i % 2 == 1:
            content = part[1:-1]
            content = content.replace('""', '"') if part[0] == '"' else content.replace("''", "'")
            out.append("'" + content + "'")
        else:
            out.append(_norm_segment(part))
    return re.sub(r"\s+", " ", "".join(out)).strip()


def _top_level_commas(text: str) -> int:
    depth = 0
    count = 0
    for char in text:
        if char == "(":
            depth += 1
        elif char == ")":
            depth -= 1
        elif char == "," and depth == 0:
            count += 1
    return count


def oracle_components(text: str) -> tuple[str, str, str] | None:
    """(vis, axes, data) normalized, or None when the text is not a plausible DVQ."""
    if not text or not _parens_balanced(text):
        return None
    match = _SHAPE_RE.match(text)
    if match is None:
        return None
    chart = match.group(1).upper()
    if chart not in _CHARTS:
        return None
    axes = match.group(2)
    if _top_level_commas(axes) != 1:
        return None
    return chart, _norm(axes), "from " + _norm(match.group(3))


def oracle_match(pred: str, gold: str) -> tuple[bool, bool, bool, bool]:
    """(vis, axis, data, overall) flags for a prediction vs its gold query."""
    gold_parts = oracle_components(gold)
    if gold_parts is None:
        raise ValueError(f"oracle cannot interpret gold query: {gold!r}")
    pred_parts = oracle_components(pred)
    if pred_parts is None:
        return (False, False, False, False)
    vis = pred_parts[0] == gold_parts[0]
    axis = pred_parts[1] == gold_parts[1]
    data = pred_parts[2] == gold_parts[2]
    return (vis, axis, data, vis and axis and data)
