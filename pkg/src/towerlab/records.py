"""Deterministic run records and their line-delimited trace format.

A trace file is one JSON object per line: a header, then the run's events in
order.  Field order is fixed by construction and nothing in a record is a
float, so identical runs yield byte-identical traces.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


class TraceError(ValueError):
    """A trace file is malformed or not ours."""


TRACE_FORMAT = 1


@dataclass
class RunRecord:
    construction: str
    parameters: dict
    events: list[dict] = field(default_factory=list)

    def log(self, **payload) -> None:
        self.events.append(payload)


def _dump(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=True)


def emit_trace(record: RunRecord, path) -> None:
    lines = [
        _dump(
            {
                "t": "header",
                "format": TRACE_FORMAT,
                "construction": record.construction,
                "parameters": record.parameters,
            }
        )
    ]
    lines.extend(_dump(ev) for ev in record.events)
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def parse_trace(path) -> RunRecord:
    with open(path, "r", encoding="ascii") as fh:
        lines = [line for line in fh.read().splitlines() if line]
    if not lines:
        raise TraceError(f"{path}: empty trace")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise TraceError(f"{path}: bad header: {exc}") from exc
    if header.get("t") != "header" or header.get("format") != TRACE_FORMAT:
        raise TraceError(f"{path}: not a trace file (or wrong format)")
    events = []
    for i, line in enumerate(lines[1:], start=2):
        try:
            events.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise TraceError(f"{path}:{i}: bad record: {exc}") from exc
    return RunRecord(header["construction"], header["parameters"], events)


def compare_golden(trace_path, golden_path) -> int | None:
    """None when byte-identical record-by-record; else first diverging index.

    Index 0 is the header line.
    """
    with open(trace_path, "rb") as fh:
        ours = fh.read().splitlines()
    with open(golden_path, "rb") as fh:
        theirs = fh.read().splitlines()
    for i, (a, b) in enumerate(zip(ours, theirs)):
        if a != b:
            return i
    if len(ours) != len(theirs):
        return min(len(ours), len(theirs))
    return None
