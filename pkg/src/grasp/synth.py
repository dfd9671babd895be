"""Synthetic website generator with planted page-type clusters.

Each type gets its own token and tag vocabulary; pages of a type share a
template plus seeded noise whose volume shrinks as ``separation`` grows.
The link graph is a per-type spanning tree plus random edges that stay
within the type with probability ``homophily``, plus a configurable
count of forced cross-type noise edges. Ground-truth labels are written
to truth.json so sampling quality can be scored exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .clustering import SampleSet
from .corpus import Corpus, PageRecord, load_corpus, write_edges, write_manifest
from .embeddings import (
    EmbeddingMatrix,
    hash_tokens,
    l2_normalize_rows,
    save_embedding_files,
)
from .errors import ContractError, ReferentialIntegrityError

TRUTH_NAME = "truth.json"

TYPE_VOCAB_SIZE = 24           # distinct tokens per planted type
TEMPLATE_REPEATS = 2           # template token count = repeats * vocab size
NOISE_VOCAB_SIZE = 160         # shared cross-type token pool
LAYOUT_VOCAB_SIZE = 12         # per-type visual-channel tokens
VISUAL_NOISE_TOKENS = 3
MAX_NOISE_FACTOR = 4           # noise tokens capped at this multiple of template

TAG_POOL = ("article", "section", "nav", "aside", "table", "ul", "form",
            "figure", "header", "footer", "main", "blockquote")


@dataclass(frozen=True)
class SynthSpec:
    k_types: int
    pages_per_type: int
    separation: float = 3.0
    homophily: float = 0.9
    noise_edges: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.k_types < 2:
            raise ContractError(f"k_types must be >= 2, got {self.k_types}")
        if self.pages_per_type < 2:
            raise ContractError(
                f"pages_per_type must be >= 2, got {self.pages_per_type}"
            )
        if self.separation < 0:
            raise ContractError(f"separation must be >= 0, got {self.separation}")
        if not 0.0 <= self.homophily <= 1.0:
            raise ContractError(f"homophily must be in [0,1], got {self.homophily}")
        if self.noise_edges < 0:
            raise ContractError(
                f"noise_edges must be >= 0, got {self.noise_edges}"
            )

    @property
    def n_pages(self) -> int:
        return self.k_types * self.pages_per_type


def _type_tokens(t: int) -> list[str]:
    return [f"type{t:02d}tok{j:02d}" for j in range(TYPE_VOCAB_SIZE)]


def _layout_tokens(t: int) -> list[str]:
    return [f"layout{t:02d}tok{j:02d}" for j in range(LAYOUT_VOCAB_SIZE)]


_COMMON_TOKENS = [f"common{j:03d}" for j in range(NOISE_VOCAB_SIZE)]


def _noise_count(template_len: int, separation: float) -> int:
    """Noise token count per page, inverse in separation, capped."""
    cap = MAX_NOISE_FACTOR * template_len
    if separation <= 0:
        return cap
    return min(cap, round(template_len / separation))


def _page_html(t: int, tokens: list[str], rng: np.random.Generator) -> str:
    """Assemble a page: type-specific wrapper tags around token chunks."""
    tag_a = TAG_POOL[t % len(TAG_POOL)]
    tag_b = TAG_POOL[(t + 3) % len(TAG_POOL)]
    shuffled = list(tokens)
    rng.shuffle(shuffled)
    chunks = []
    for start in range(0, len(shuffled), 8):
        words = " ".join(shuffled[start:start + 8])
        chunks.append(f"<{tag_b}><p>{words}</p></{tag_b}>")
    body = "\n".join(chunks)
    return (
        "<!DOCTYPE html>\n<html><head><title>"
        f"type {t}</title></head>\n<body><{tag_a}>\n{body}\n"
        f"</{tag_a}></body></html>\n"
    )


def _plant_edges(spec: SynthSpec, rng: np.random.Generator) -> set[tuple[int, int]]:
    """Spanning tree per type, random extra edges, forced cross edges."""
    p = spec.pages_per_type
    edges: set[tuple[int, int]] = set()

    def add(u: int, v: int) -> bool:
        if u == v:
            return False
        pair = (u, v) if u < v else (v, u)
        if pair in edges:
            return False
        edges.add(pair)
        return True

    for t in range(spec.k_types):
        base = t * p
        order = base + rng.permutation(p)
        for i in range(1, p):
            add(int(order[i]), int(order[rng.integers(i)]))

    # Extra random edges: one attempt per page, intra-type with
    # probability homophily, otherwise to a uniform other type.
    for u in range(spec.n_pages):
        t = u // p
        if rng.random() < spec.homophily:
            v = t * p + int(rng.integers(p))
        else:
            other = int(rng.integers(spec.k_types - 1))
            if other >= t:
                other += 1
            v = other * p + int(rng.integers(p))
        add(u, v)

    planted = set(edges)
    noise: set[tuple[int, int]] = set()
    attempts = 0
    while len(noise) < spec.noise_edges and attempts < 100 * spec.noise_edges:
        attempts += 1
        u = int(rng.integers(spec.n_pages))
        other = int(rng.integers(spec.k_types - 1))
        if other >= u // p:
            other += 1
        v = other * p + int(rng.integers(p))
        pair = (u, v) if u < v else (v, u)
        if pair not in planted and pair not in noise:
            noise.add(pair)
    edges |= noise
    return edges


def generate_corpus(spec: SynthSpec, out_dir: str | Path,
                    visual_dim: int = 256) -> tuple[Corpus, dict[int, int]]:
    """Write a synthetic corpus to out_dir and return it with its truth.

    Outputs the standard corpus layout (manifest.jsonl, edges.tsv,
    dom/*.html), a visual-channel embedding pair (visual.ids.txt,
    visual.f32) hashed from per-type layout vocabularies, and truth.json
    mapping page id to planted type.
    """
    out = Path(out_dir)
    (out / "dom").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(spec.seed)

    template_len = TYPE_VOCAB_SIZE * TEMPLATE_REPEATS
    n_noise = _noise_count(template_len, spec.separation)

    pages: list[PageRecord] = []
    truth: dict[int, int] = {}
    visual_rows = np.zeros((spec.n_pages, visual_dim), dtype=np.float64)
    for t in range(spec.k_types):
        vocab = _type_tokens(t)
        template = vocab * TEMPLATE_REPEATS
        layout = _layout_tokens(t)
        for i in range(spec.pages_per_type):
            page_id = t * spec.pages_per_type + i
            noise = [
                _COMMON_TOKENS[int(rng.integers(NOISE_VOCAB_SIZE))]
                for _ in range(n_noise)
            ]
            html = _page_html(t, template + noise, rng)
            dom_rel = f"dom/{page_id:04d}.html"
            (out / dom_rel).write_text(html, encoding="utf-8")
            pages.append(PageRecord(
                page_id=page_id,
                url=f"https://synth.test/type{t}/page{i}",
                dom_path=dom_rel,
            ))
            truth[page_id] = t
            visual_noise = [
                _COMMON_TOKENS[int(rng.integers(NOISE_VOCAB_SIZE))]
                for _ in range(VISUAL_NOISE_TOKENS)
            ]
            visual_rows[page_id] = hash_tokens(
                layout + visual_noise, visual_dim, seed=spec.seed
            )

    edges = _plant_edges(spec, rng)
    write_manifest(out / "manifest.jsonl", pages)
    write_edges(out / "edges.tsv", sorted(edges))

    visual = EmbeddingMatrix(
        ids=tuple(range(spec.n_pages)),
        data=l2_normalize_rows(visual_rows).astype(np.float32),
        space_tag="visual",
    )
    save_embedding_files(visual, out / "visual.ids.txt", out / "visual.f32")

    (out / TRUTH_NAME).write_text(
        json.dumps({str(pid): t for pid, t in sorted(truth.items())},
                   sort_keys=True, indent=0) + "\n",
        encoding="utf-8",
    )
    corpus = load_corpus(out / "manifest.jsonl", out / "edges.tsv", root=out)
    return corpus, truth


def load_truth(corpus_dir: str | Path) -> dict[int, int]:
    raw = json.loads((Path(corpus_dir) / TRUTH_NAME).read_text(encoding="utf-8"))
    return {int(pid): int(label) for pid, label in raw.items()}


def label_coverage(page_ids, truth: dict[int, int], k_types: int) -> float:
    """Fraction of planted types hit by the given pages."""
    labels = set()
    for pid in page_ids:
        if pid not in truth:
            raise ReferentialIntegrityError(f"page id {pid} not in truth labels")
        labels.add(truth[pid])
    return len(labels) / k_types


def recovery_score(sample: SampleSet, truth: dict[int, int]) -> float:
    """Variety recovered by the collective part of the sample.

    Distinct planted types among collective-provenance pages, divided by
    the total number of planted types.
    """
    k_types = len(set(truth.values()))
    return label_coverage(sample.page_ids("collective"), truth, k_types)
