"""Link extraction and the bounded breadth-first crawl."""

import contextlib
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from grasp.crawler import CrawlLimits, crawl_site, extract_links
from grasp.errors import ContractError, CrawlError


def test_relative_href_resolved():
    out = extract_links('<a href="/b">b</a>', "https://x.test/a")
    assert out == ["https://x.test/b"]


def test_fragment_only_href_dropped():
    assert extract_links('<a href="#frag">f</a>', "https://x.test/a") == []


def test_non_http_schemes_dropped():
    html = '<a href="mailto:z@x">m</a><a href="javascript:void(0)">j</a>'
    assert extract_links(html, "https://x.test/a") == []


def test_dedup_preserves_first_occurrence_order():
    html = ('<a href="/two">2</a><a href="/one">1</a>'
            '<a href="/two#frag">2 again</a>')
    out = extract_links(html, "https://x.test/")
    assert out == ["https://x.test/two", "https://x.test/one"]


def test_broken_markup_never_throws():
    html = "<a href='/ok'><div><<<>@!& <a href="
    out = extract_links(html, "https://x.test/")
    assert out == ["https://x.test/ok"]


class _Handler(BaseHTTPRequestHandler):
    site: dict = {}
    log: list = []

    def do_GET(self):
        type(self).log.append(self.path)
        entry = self.site.get(self.path)
        if entry is None:
            self.send_response(404)
            self.end_headers()
            return
        status, ctype, body = entry
        self.send_response(status)
        self.send_header("Content-Type", ctype)
        self.end_headers()
        self.wfile.write(body.encode("utf-8"))

    def log_message(self, *args):
        pass


def _page(*hrefs, text="content"):
    links = "".join(f'<a href="{h}">link</a>' for h in hrefs)
    return (200, "text/html",
            f"<html><body><p>{text}</p>{links}</body></html>")


@contextlib.contextmanager
def serve(site):
    handler = type("Handler", (_Handler,), {"site": dict(site), "log": []})
    server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_port}", handler
    finally:
        server.shutdown()
        server.server_close()
        thread.join(timeout=5)


def test_max_pages_one_keeps_only_seed(tmp_path):
    with serve({"/": _page("/a", "/b")}) as (base, _):
        corpus = crawl_site(base + "/", CrawlLimits(max_pages=1), tmp_path)
    assert corpus.n == 1
    assert corpus.graph.edges == set()


def test_two_page_cycle_terminates(tmp_path):
    site = {"/a": _page("/b"), "/b": _page("/a")}
    with serve(site) as (base, _):
        corpus = crawl_site(base + "/a", CrawlLimits(max_pages=10), tmp_path)
    assert corpus.n == 2
    assert corpus.graph.edges == {(0, 1), (1, 0)}


def test_external_origin_never_fetched(tmp_path):
    with serve({"/": _page()}) as (base, handler):
        port = base.rsplit(":", 1)[1]
        external = f"http://localhost:{port}/ext"
        handler.site["/"] = _page(external, "/in")
        handler.site["/in"] = _page()
        corpus = crawl_site(base + "/", CrawlLimits(), tmp_path)
        assert "/ext" not in handler.log
    assert corpus.n == 2


def test_allow_external_follows_other_host(tmp_path):
    with serve({"/": _page()}) as (base, handler):
        port = base.rsplit(":", 1)[1]
        handler.site["/"] = _page(f"http://localhost:{port}/ext")
        handler.site["/ext"] = _page()
        corpus = crawl_site(base + "/",
                            CrawlLimits(same_origin_only=False), tmp_path)
        assert "/ext" in handler.log
    assert corpus.n == 2


def test_depth_limit(tmp_path):
    site = {"/a": _page("/b"), "/b": _page("/c"), "/c": _page("/d"),
            "/d": _page()}
    with serve(site) as (base, _):
        corpus = crawl_site(base + "/a", CrawlLimits(max_depth=2), tmp_path)
    assert corpus.n == 2
    assert {p.url for p in corpus.pages} == {base + "/a", base + "/b"}


def test_fetch_failures_skipped(tmp_path):
    site = {"/": _page("/missing", "/blob", "/good"),
            "/blob": (200, "application/octet-stream", "xxxx"),
            "/good": _page()}
    with serve(site) as (base, _):
        corpus = crawl_site(base + "/", CrawlLimits(), tmp_path)
    assert {p.url for p in corpus.pages} == {base + "/", base + "/good"}


def test_unreachable_seed_raises(tmp_path):
    with serve({}) as (base, _):
        dead = base  # resolvable host, but every path 404s
        with pytest.raises(CrawlError):
            crawl_site(dead + "/", CrawlLimits(), tmp_path)


def test_closed_world_edges(tmp_path):
    # seed links to /a and /b but the page budget stops before /b
    site = {"/": _page("/a", "/b"), "/a": _page("/"), "/b": _page()}
    with serve(site) as (base, _):
        corpus = crawl_site(base + "/", CrawlLimits(max_pages=2), tmp_path)
    assert corpus.n == 2
    assert corpus.graph.edges == {(0, 1), (1, 0)}


def test_recrawl_yields_identical_edges(tmp_path):
    site = {"/": _page("/a", "/b"), "/a": _page("/b"), "/b": _page("/")}
    with serve(site) as (base, _):
        crawl_site(base + "/", CrawlLimits(), tmp_path / "one")
        crawl_site(base + "/", CrawlLimits(), tmp_path / "two")
    first = (tmp_path / "one" / "edges.tsv").read_bytes()
    second = (tmp_path / "two" / "edges.tsv").read_bytes()
    assert first == second


def test_limit_validation():
    with pytest.raises(ContractError):
        CrawlLimits(max_pages=0)
    with pytest.raises(ContractError):
        CrawlLimits(max_depth=0)
    with pytest.raises(ContractError):
        CrawlLimits(request_delay_ms=-5)
