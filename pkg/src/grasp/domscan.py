"""Tolerant single-pass DOM scanning.

Everything downstream that looks at HTML (link extraction, hashed text
features, tag/structure statistics) shares the summary produced here, so
all consumers agree on one tokenization. Built on ``html.parser``, which
recovers from broken markup instead of raising; nesting is taken as
written (no implicit tag closing beyond void elements).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from html.parser import HTMLParser

# Elements that never take content and never appear on the open stack.
VOID_ELEMENTS = frozenset({
    "area", "base", "br", "col", "embed", "hr", "img", "input",
    "link", "meta", "param", "source", "track", "wbr",
})

# Containers whose character data is code, not page text.
_NON_TEXT_CONTAINERS = frozenset({"script", "style"})


@dataclass
class DomSummary:
    """Aggregate statistics of one HTML document."""

    tag_counts: Counter = field(default_factory=Counter)
    bigram_counts: Counter = field(default_factory=Counter)
    text_tokens: list[str] = field(default_factory=list)
    hrefs: list[str] = field(default_factory=list)
    node_count: int = 0
    max_depth: int = 0
    child_counts: list[int] = field(default_factory=list)


class _Scanner(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.summary = DomSummary()
        # Each frame: [tag, children seen so far]
        self._stack: list[list] = []
        self._non_text_depth = 0

    def _enter(self, tag: str, attrs, leaf: bool) -> None:
        s = self.summary
        s.tag_counts[tag] += 1
        s.node_count += 1
        if self._stack:
            parent = self._stack[-1]
            parent[1] += 1
            s.bigram_counts[(parent[0], tag)] += 1
        depth = len(self._stack) + 1
        if depth > s.max_depth:
            s.max_depth = depth
        if tag == "a":
            for name, value in attrs:
                if name == "href" and value is not None:
                    s.hrefs.append(value)
        if leaf:
            s.child_counts.append(0)
        else:
            self._stack.append([tag, 0])
            if tag in _NON_TEXT_CONTAINERS:
                self._non_text_depth += 1

    def handle_starttag(self, tag, attrs):
        self._enter(tag, attrs, leaf=tag in VOID_ELEMENTS)

    def handle_startendtag(self, tag, attrs):
        self._enter(tag, attrs, leaf=True)

    def handle_endtag(self, tag):
        if tag in VOID_ELEMENTS:
            return
        open_tags = [frame[0] for frame in self._stack]
        if tag not in open_tags:
            return  # stray close tag, ignore
        while self._stack:
            frame = self._stack.pop()
            self.summary.child_counts.append(frame[1])
            if frame[0] in _NON_TEXT_CONTAINERS:
                self._non_text_depth -= 1
            if frame[0] == tag:
                break

    def handle_data(self, data):
        if self._non_text_depth == 0:
            self.summary.text_tokens.extend(data.split())

    def finish(self) -> DomSummary:
        while self._stack:
            frame = self._stack.pop()
            self.summary.child_counts.append(frame[1])
        return self.summary


def scan_html(html: str) -> DomSummary:
    """Summarize an HTML document; never raises on malformed markup."""
    scanner = _Scanner()
    try:
        scanner.feed(html)
        scanner.close()
    except Exception:
        pass  # keep whatever was collected before the parser gave up
    return scanner.finish()
