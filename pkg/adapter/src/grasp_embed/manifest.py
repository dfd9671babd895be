"""Minimal reader for the corpus manifest.

Parses only the fields the adapter needs; full corpus validation is the
sampler's job. Page order follows the manifest file and the original
page ids are kept, because the sampler aligns embedding rows by id on
load.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ManifestError

MANIFEST_NAME = "manifest.jsonl"


@dataclass(frozen=True)
class PageEntry:
    page_id: int
    dom_path: str
    screenshot_path: str | None = None


def read_manifest(corpus_dir: str | Path) -> list[PageEntry]:
    path = Path(corpus_dir) / MANIFEST_NAME
    if not path.is_file():
        raise ManifestError(f"no {MANIFEST_NAME} in {corpus_dir}")
    entries: list[PageEntry] = []
    seen: set[int] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            try:
                page_id = int(row["page_id"])
                dom_path = str(row["dom_path"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ManifestError(
                    f"{path}:{lineno}: missing or malformed field ({exc})"
                ) from None
            if page_id in seen:
                raise ManifestError(f"{path}:{lineno}: duplicate page_id {page_id}")
            seen.add(page_id)
            shot = row.get("screenshot_path")
            entries.append(PageEntry(page_id, dom_path, str(shot) if shot else None))
    if not entries:
        raise ManifestError(f"{path} has no pages")
    return entries
