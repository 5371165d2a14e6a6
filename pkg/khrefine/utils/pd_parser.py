import json
import re
from dataclasses import dataclass, field
from typing import Any, Optional

from khrefine.errors import PDSyntaxError

ITEM_PATTERN = re.compile(r"(X|Loop)\[([^\[\]]*)\]")


@dataclass
class ParsedPD:
    crossings: list[tuple[int, int, int, int]] = field(default_factory=list)
    loops: list[int] = field(default_factory=list)
    over_in: Optional[list[int]] = None
    name: Optional[str] = None


def _int_list(raw: str, where: str) -> list[int]:
    parts = [p.strip() for p in raw.split(",")] if raw.strip() else []
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise PDSyntaxError(f"Non-integer label in {where}", item=where)


def _parse_knot_atlas(text: str) -> ParsedPD:
    body = text.strip()
    if not (body.startswith("PD[") and body.endswith("]")):
        raise PDSyntaxError("Expected PD[...]", text=text[:40])
    body = body[3:-1]

    parsed = ParsedPD()
    position = 0
    for index, match in enumerate(ITEM_PATTERN.finditer(body)):
        gap = body[position:match.start()]
        if gap.strip(" \t\r\n,") or (index > 0 and "," not in gap):
            raise PDSyntaxError(
                f"Unexpected text {gap.strip()!r} before {match.group(0)}",
                offset=position,
            )
        position = match.end()
        kind, raw = match.groups()
        labels = _int_list(raw, match.group(0))
        if kind == "X":
            if len(labels) != 4:
                raise PDSyntaxError(
                    f"Crossing {match.group(0)} must list exactly four edge labels",
                    crossing=len(parsed.crossings),
                )
            parsed.crossings.append((labels[0], labels[1], labels[2], labels[3]))
        else:
            if len(labels) != 1:
                raise PDSyntaxError(f"{match.group(0)} must name exactly one edge label")
            parsed.loops.append(labels[0])
    if body[position:].strip(" \t\r\n,"):
        raise PDSyntaxError(f"Unexpected trailing text {body[position:].strip()!r}", offset=position)
    return parsed


def _parse_json(data: Any) -> ParsedPD:
    parsed = ParsedPD()
    if isinstance(data, dict):
        if "pd" not in data:
            raise PDSyntaxError("JSON diagram object needs a 'pd' field")
        parsed.name = data.get("name")
        parsed.loops = [int(label) for label in data.get("loops", [])]
        if data.get("over_in") is not None:
            parsed.over_in = [int(x) for x in data["over_in"]]
        data = data["pd"]
    if not isinstance(data, list):
        raise PDSyntaxError("JSON diagram must be a list of 4-tuples")
    for index, crossing in enumerate(data):
        if not isinstance(crossing, list) or len(crossing) != 4:
            raise PDSyntaxError(f"Crossing {index} must be a list of four labels", crossing=index)
        try:
            a, b, c, d = (int(x) for x in crossing)
        except (TypeError, ValueError):
            raise PDSyntaxError(f"Crossing {index} has a non-integer label", crossing=index)
        parsed.crossings.append((a, b, c, d))
    return parsed


def parse_pd_text(text: str) -> ParsedPD:
    """Parse Knot-Atlas `PD[X[...],...]` text or the JSON forms into raw crossing data."""
    stripped = text.strip()
    if stripped.startswith("PD"):
        return _parse_knot_atlas(stripped)
    if stripped.startswith("[") or stripped.startswith("{"):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as e:
            raise PDSyntaxError(f"Invalid JSON: {e.msg}", line=e.lineno, column=e.colno)
        return _parse_json(data)
    raise PDSyntaxError("Expected PD[...] or a JSON list of crossings", text=stripped[:40])


def parse_corpus_text(text: str) -> list[tuple[str, str]]:
    """Lines of `name<TAB>PD[...]`; blank lines and lines starting with # are skipped."""
    entries = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "\t" in line:
            name, pd = line.split("\t", 1)
        else:
            parts = line.split(None, 1)
            if len(parts) != 2:
                raise PDSyntaxError(f"Corpus line {lineno} needs a name and a PD code", line=lineno)
            name, pd = parts
        entries.append((name.strip(), pd.strip()))
    return entries
