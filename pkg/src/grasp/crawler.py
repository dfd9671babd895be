"""Bounded breadth-first site crawler producing the corpus format.

Fetches pages with requests, bounded by page count and depth, keeping
to the seed's origin by default. Link edges are recorded closed-world:
only between pages that were actually crawled. No JavaScript execution
and no screenshots; those arrive through the embedding adapter.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from pathlib import Path
from urllib.parse import urldefrag, urljoin, urlsplit

import requests

from .corpus import Corpus, PageRecord, load_corpus, write_edges, write_manifest
from .domscan import scan_html
from .errors import ContractError, CrawlError

log = logging.getLogger(__name__)

REQUEST_TIMEOUT_S = 15.0


@dataclass(frozen=True)
class CrawlLimits:
    max_pages: int = 200
    max_depth: int = 5
    same_origin_only: bool = True
    request_delay_ms: int = 0

    def __post_init__(self):
        if self.max_pages < 1:
            raise ContractError(f"max_pages must be >= 1, got {self.max_pages}")
        if self.max_depth < 1:
            raise ContractError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.request_delay_ms < 0:
            raise ContractError(
                f"request_delay_ms must be >= 0, got {self.request_delay_ms}"
            )


def _normalize(url: str) -> str:
    return urldefrag(url)[0]


def extract_links(dom_text: str, base_url: str) -> list[str]:
    """Absolute, fragment-stripped anchor targets in first-seen order.

    Only http(s) URLs are kept; the page's own URL is excluded; invalid
    hrefs are skipped. Never raises on broken markup.
    """
    base = _normalize(base_url)
    seen: set[str] = set()
    out: list[str] = []
    for href in scan_html(dom_text).hrefs:
        href = href.strip()
        if not href:
            continue
        try:
            absolute = _normalize(urljoin(base_url, href))
        except ValueError:
            continue
        scheme = urlsplit(absolute).scheme.lower()
        if scheme not in ("http", "https"):
            continue
        if absolute == base or absolute in seen:
            continue
        seen.add(absolute)
        out.append(absolute)
    return out


def _same_origin(a: str, b: str) -> bool:
    sa, sb = urlsplit(a), urlsplit(b)
    return (sa.scheme.lower(), sa.netloc.lower()) == (
        sb.scheme.lower(), sb.netloc.lower()
    )


def _fetch(session: requests.Session, url: str) -> str:
    """GET one page; returns HTML text or raises for anything unusable."""
    response = session.get(url, timeout=REQUEST_TIMEOUT_S)
    response.raise_for_status()
    content_type = response.headers.get("content-type", "")
    if "html" not in content_type.lower():
        raise CrawlError(f"{url}: not HTML (content-type {content_type!r})")
    return response.text


def crawl_site(seed_url: str, limits: CrawlLimits,
               out_dir: str | Path) -> Corpus:
    """Breadth-first crawl from seed_url into the standard corpus layout.

    The seed must be fetchable; later per-page failures are logged and
    skipped. URLs are deduplicated after fragment stripping. Directed
    edges are recorded between crawled pages only.
    """
    out = Path(out_dir)
    (out / "dom").mkdir(parents=True, exist_ok=True)
    seed = _normalize(seed_url)
    session = requests.Session()

    pages: list[PageRecord] = []
    page_html: list[str] = []
    url_to_id: dict[str, int] = {}
    # frontier of (url, depth); visited covers everything ever queued
    frontier: list[tuple[str, int]] = [(seed, 1)]
    visited: set[str] = {seed}
    cursor = 0
    while cursor < len(frontier) and len(pages) < limits.max_pages:
        url, depth = frontier[cursor]
        cursor += 1
        if pages and limits.request_delay_ms:
            time.sleep(limits.request_delay_ms / 1000.0)
        try:
            html = _fetch(session, url)
        except Exception as exc:
            if not pages and url == seed:
                raise CrawlError(f"seed {seed} unreachable: {exc}") from exc
            log.warning("skipping %s: %s", url, exc)
            continue
        page_id = len(pages)
        dom_rel = f"dom/{page_id:04d}.html"
        (out / dom_rel).write_text(html, encoding="utf-8")
        pages.append(PageRecord(page_id=page_id, url=url, dom_path=dom_rel))
        page_html.append(html)
        url_to_id[url] = page_id
        if depth >= limits.max_depth:
            continue
        for link in extract_links(html, url):
            if limits.same_origin_only and not _same_origin(link, seed):
                continue
            if link not in visited:
                visited.add(link)
                frontier.append((link, depth + 1))

    # Closed-world edges: only links between pages we actually stored.
    edges: set[tuple[int, int]] = set()
    for page_id, html in enumerate(page_html):
        for link in extract_links(html, pages[page_id].url):
            target = url_to_id.get(link)
            if target is not None and target != page_id:
                edges.add((page_id, target))

    write_manifest(out / "manifest.jsonl", pages)
    write_edges(out / "edges.tsv", sorted(edges))
    return load_corpus(out / "manifest.jsonl", out / "edges.tsv", root=out)
