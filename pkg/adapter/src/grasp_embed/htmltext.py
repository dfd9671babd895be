"""Visible-text extraction from stored DOM snapshots."""

from __future__ import annotations

from html.parser import HTMLParser

_SKIP_TAGS = {"script", "style", "template", "noscript"}


class _TextCollector(HTMLParser):
    """Collects text outside script/style-like containers."""

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self._skip_depth = 0
        self.chunks: list[str] = []

    def handle_starttag(self, tag, attrs):
        if tag in _SKIP_TAGS:
            self._skip_depth += 1

    def handle_endtag(self, tag):
        if tag in _SKIP_TAGS and self._skip_depth:
            self._skip_depth -= 1

    def handle_data(self, data):
        if not self._skip_depth and data.strip():
            self.chunks.append(data)


def visible_text(html: str) -> str:
    """Page text with markup and script/style bodies stripped.

    Whitespace is collapsed to single spaces. Never raises on broken
    markup; the stdlib parser recovers from anything.
    """
    collector = _TextCollector()
    collector.feed(html)
    collector.close()
    return " ".join(" ".join(chunk.split()) for chunk in collector.chunks)
