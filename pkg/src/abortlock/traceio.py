"""JSON-lines traces and atomically written JSON reports."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Iterator

from .costs import CC_LINE_BOUNDS, DSM_LINE_BOUNDS
from .verifiers import TraceError, Violation

TRACE_FIELDS = (
    "seq",
    "actor",
    "kind",
    "line",
    "pre_pc",
    "post_pc",
    "rmr_cc",
    "rmr_dsm",
    "phi_cc",
    "phi_dsm",
    "events",
    "queue",
)


def write_trace(path: str | Path, lines: Iterable[Any]) -> int:
    """Write one JSON object per step; accepts TracedStep objects or dicts."""
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            obj = line if isinstance(line, dict) else line.to_dict()
            fh.write(json.dumps(obj, separators=(",", ":")))
            fh.write("\n")
            n += 1
    return n


def read_trace(path: str | Path) -> Iterator[dict[str, Any]]:
    """Yield validated trace lines; malformed input raises TraceError."""
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise TraceError(f"line {lineno}: {exc}") from None
            if not isinstance(obj, dict):
                raise TraceError(f"line {lineno}: expected an object")
            missing = [k for k in TRACE_FIELDS if k not in obj]
            if missing:
                raise TraceError(f"line {lineno}: missing {missing}")
            if not isinstance(obj["events"], list) or not isinstance(obj["seq"], int):
                raise TraceError(f"line {lineno}: bad field types")
            yield obj


def amortized_from_trace(lines: Iterable[dict[str, Any]]) -> list[Violation]:
    """Per-line amortized bounds re-checked from the recorded rmr and phi fields.

    Every process starts (or joins) with both potentials at zero, so the
    first line's phi_before is 0.
    """
    out = []
    prev_cc = prev_dsm = 0
    for rec in lines:
        line = rec["line"]
        d_cc = rec["rmr_cc"] + rec["phi_cc"] - prev_cc
        d_dsm = rec["rmr_dsm"] + rec["phi_dsm"] - prev_dsm
        if line is None:
            if d_cc or d_dsm or rec["rmr_cc"] or rec["rmr_dsm"]:
                out.append(Violation("lemma3", rec["seq"], f"{rec['kind']} by {rec['actor']} moved phi"))
        else:
            if line not in DSM_LINE_BOUNDS:
                raise TraceError(f"seq {rec['seq']}: unknown line {line}")
            if d_dsm > DSM_LINE_BOUNDS[line]:
                out.append(Violation(f"lemma3({line})", rec["seq"], f"{rec['actor']}: amortized {d_dsm}"))
            if d_cc > CC_LINE_BOUNDS[line]:
                out.append(Violation(f"lemma4({line})", rec["seq"], f"{rec['actor']}: amortized {d_cc}"))
        prev_cc, prev_dsm = rec["phi_cc"], rec["phi_dsm"]
    return out


def write_report(path: str | Path, report: dict[str, Any]) -> None:
    """Write JSON to a temp file beside ``path`` and rename it into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
