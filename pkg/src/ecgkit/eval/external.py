"""Client for an externally computed BertScore.

Scores are never computed here. They come either from a file holding one JSON
object ``{"score": x}`` per line, aligned with the pairs, or from an HTTP
endpoint that accepts newline-delimited ``{"candidate", "reference"}``
requests and answers with the same number of ``{"score"}`` lines.
"""
from __future__ import annotations

import json
import math
import urllib.request
from pathlib import Path
from typing import Sequence

from ..exceptions import FormatError


def _parse_scores(text: str, expected: int | None, source: str) -> list[float]:
    scores = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            value = float(json.loads(line)["score"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{source}:{lineno}: bad score record ({exc})") from exc
        if not math.isfinite(value):
            raise FormatError(f"{source}:{lineno}: non-finite score")
        scores.append(value)
    if expected is not None and len(scores) != expected:
        raise FormatError(f"{source}: expected {expected} scores, got {len(scores)}")
    return scores


def read_external_scores(path, expected: int | None = None) -> list[float]:
    return _parse_scores(Path(path).read_text(encoding="utf-8"), expected, str(path))


def fetch_external_scores(
    url: str,
    candidates: Sequence[str],
    references: Sequence[str],
    timeout: float = 60.0,
) -> list[float]:
    if len(candidates) != len(references):
        raise ValueError("candidates and references differ in length")
    body = "".join(
        json.dumps({"candidate": c, "reference": r}) + "\n" for c, r in zip(candidates, references)
    ).encode("utf-8")
    req = urllib.request.Request(
        url, data=body, method="POST", headers={"Content-Type": "application/x-ndjson"}
    )
    with urllib.request.urlopen(req, timeout=timeout) as resp:
        text = resp.read().decode("utf-8")
    return _parse_scores(text, len(candidates), url)
