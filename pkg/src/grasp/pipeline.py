"""End-to-end sampling pipeline and evaluation over a corpus.

run_pipeline: load corpus, obtain per-modality embeddings (precomputed
exchange files or the hashing fallback), fuse, run the refine loop,
select centroid-nearest representatives, assemble the audit sample, and
score it. Writes report.json and metrics.json; both are byte-identical
across runs with the same config (timestamps live in a .meta.json
sidecar).

run_eval: re-score an existing report against alternative methods
(random draw, statistical feature baselines, optional PCA reduction)
in the chosen embedding spaces.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .clustering import SampleSet, assemble_sample, kmeans, random_sample, select_representatives
from .corpus import Corpus, open_corpus
from .embeddings import (
    EmbeddingMatrix,
    align_to_corpus,
    fuse_modalities,
    hash_embed,
    load_embedding_files,
    zero_embedding,
)
from .errors import ContractError, SchemaError
from .graph import PropagationParams
from .metrics import d_intra_inter, intra_cluster_mean, pca_reduce, s_sampled, sdc_features
from .refine import GraspResult, RefinementParams, grasp_iterate

log = logging.getLogger(__name__)

EMBED_SOURCES = ("hash", "files")
SPACES = ("text", "visual", "fused")

DEFAULT_GAMMA = 0.3
DEFAULT_BETA = 0.95


@dataclass(frozen=True)
class PipelineConfig:
    corpus_dir: str
    report_out: str
    metrics_out: str | None = None
    embeddings: str = "hash"
    hash_dim: int = 256
    visual_dim: int = 8          # zero-block width when no visual channel
    k: int = 20
    iterations: int = 5
    gamma: float = DEFAULT_GAMMA
    beta: float = DEFAULT_BETA
    gnn: str = "homophilic"
    layers: int = 2
    seed: int = 0
    threshold_mode: str = "absolute"
    norm: str = "row"
    literal_intersection: bool = False
    random_base: str = "structured"
    structured: tuple[int, ...] = ()
    processes: tuple[int, ...] = ()
    spaces: tuple[str, ...] = ("text", "visual")

    def __post_init__(self):
        if self.embeddings not in EMBED_SOURCES:
            raise ContractError(f"unknown embedding source {self.embeddings!r}")
        for space in self.spaces:
            if space not in SPACES:
                raise ContractError(f"unknown metric space {space!r}")
        if self.hash_dim < 1 or self.visual_dim < 1:
            raise ContractError("embedding dims must be positive")

    def echo(self) -> dict:
        return {
            "corpus_dir": str(self.corpus_dir),
            "embeddings": self.embeddings,
            "hash_dim": self.hash_dim,
            "visual_dim": self.visual_dim,
            "k": self.k,
            "iterations": self.iterations,
            "gamma": self.gamma,
            "beta": self.beta,
            "gnn": self.gnn,
            "layers": self.layers,
            "seed": self.seed,
            "threshold_mode": self.threshold_mode,
            "norm": self.norm,
            "literal_intersection": self.literal_intersection,
            "random_base": self.random_base,
            "structured": list(self.structured),
            "processes": list(self.processes),
            "spaces": list(self.spaces),
        }


def _count_lines(path: Path) -> int:
    with path.open("rb") as fh:
        return sum(1 for line in fh if line.strip())


def _load_exchange(corpus: Corpus, stem: str, space_tag: str) -> EmbeddingMatrix | None:
    """Load `<stem>.ids.txt` + `<stem>.f32` from the corpus dir if present."""
    ids_path = corpus.root / f"{stem}.ids.txt"
    matrix_path = corpus.root / f"{stem}.f32"
    if not ids_path.exists() or not matrix_path.exists():
        return None
    n = _count_lines(ids_path)
    if n == 0:
        raise SchemaError(f"{ids_path} is empty")
    size = matrix_path.stat().st_size
    dim = max(size // (4 * n), 1)
    matrix = load_embedding_files(ids_path, matrix_path, dim, space_tag=space_tag)
    return align_to_corpus(matrix, corpus)


def load_spaces(corpus: Corpus, config: PipelineConfig) -> dict[str, EmbeddingMatrix]:
    """Per-modality embeddings for the corpus, keyed text/visual/fused.

    "visual" is present only when a real channel exists; fusion falls
    back to a zero visual block so the pipeline still runs text-only.
    """
    spaces: dict[str, EmbeddingMatrix] = {}
    if config.embeddings == "hash":
        spaces["text"] = hash_embed(corpus, config.hash_dim, seed=config.seed)
    else:
        text = _load_exchange(corpus, "text", "text")
        if text is None:
            raise SchemaError(
                f"embedding source 'files' needs text.ids.txt + text.f32 "
                f"in {corpus.root}"
            )
        spaces["text"] = text
    visual = _load_exchange(corpus, "visual", "visual")
    if visual is not None:
        spaces["visual"] = visual
    fuse_visual = visual if visual is not None else zero_embedding(
        spaces["text"].ids, config.visual_dim, "visual"
    )
    spaces["fused"] = fuse_modalities(spaces["text"], fuse_visual)
    return spaces


def _metric_rows(sample_ids: list[int], assignments: np.ndarray,
                 spaces: dict[str, EmbeddingMatrix],
                 wanted: tuple[str, ...], method: str, method_label: str,
                 k: int, pooled: bool = False) -> list[dict]:
    rows = []
    for space in wanted:
        emb = spaces.get(space)
        if emb is None:
            log.warning("space %r not available; skipping", space)
            continue
        s = s_sampled(sample_ids, emb)
        intra = intra_cluster_mean(assignments, emb, pooled=pooled)
        rows.append({
            "method": method,
            "method_label": method_label,
            "space": space,
            "s_sampled": round(s, 9),
            "intra_mean": round(intra, 9),
            "d_intra_inter": round(intra - s, 9),
            "n_samples": len(sample_ids),
            "k": k,
        })
    return rows


def _write_json(path: Path, payload) -> None:
    path.write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def _write_meta(path: Path) -> None:
    meta = {
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "tool": f"grasp {__version__}",
    }
    _write_json(path.with_suffix(path.suffix + ".meta.json"), meta)


def _build_report(config: PipelineConfig, corpus: Corpus, result: GraspResult,
                  sample: SampleSet) -> dict:
    sizes = np.bincount(result.clustering.assignments,
                        minlength=result.clustering.k)
    return {
        "version": __version__,
        "config": config.echo(),
        "corpus": {
            "dir": str(config.corpus_dir),
            "n_pages": corpus.n,
            "n_edges": len(corpus.graph.edges),
        },
        "refinement": {
            "edgeless": result.edgeless,
            "history": result.history,
            "final_edges": len(result.edges),
        },
        "clusters": {
            "k": result.clustering.k,
            "sizes": [int(s) for s in sizes],
            "assignments": [int(a) for a in result.clustering.assignments],
            "n_iter": result.clustering.n_iter,
            "inertia": round(result.clustering.inertia, 9),
        },
        "sample": {
            "entries": sample.to_dicts(corpus),
            "counts": {
                prov: len(sample.page_ids(prov))
                for prov in ("structured", "collective", "random", "process")
            },
            "params": sample.params_echo,
        },
    }


def run_pipeline(config: PipelineConfig) -> dict:
    """Run sample assembly end to end; returns the report dict.

    Writes report.json (+ sidecar meta) and, unless metrics_out is None,
    metrics.json scoring the collective sample in the configured spaces.
    Partial outputs are removed if any stage fails.
    """
    corpus = open_corpus(config.corpus_dir)
    created: list[Path] = []
    try:
        spaces = load_spaces(corpus, config)
        params = RefinementParams(
            gamma=config.gamma, beta=config.beta, iterations=config.iterations,
            k=config.k, seed=config.seed, threshold_mode=config.threshold_mode,
        )
        prop = PropagationParams(variant=config.gnn, layers=config.layers)
        result = grasp_iterate(
            corpus, spaces["fused"], params, prop,
            norm_mode=config.norm,
            literal_intersection=config.literal_intersection,
        )
        collective = select_representatives(result.h_g, result.clustering)
        sample = assemble_sample(
            collective, config.structured, config.processes, corpus,
            seed=config.seed, random_base=config.random_base,
        )
        report = _build_report(config, corpus, result, sample)

        report_path = Path(config.report_out)
        created.append(report_path)
        _write_json(report_path, report)
        _write_meta(report_path)
        created.append(report_path.with_suffix(report_path.suffix + ".meta.json"))

        if config.metrics_out is not None:
            rows = _metric_rows(
                sample.page_ids("collective"),
                result.clustering.assignments,
                spaces, config.spaces,
                method="grasp",
                method_label=f"grasp/{config.gnn}",
                k=config.k,
            )
            metrics_path = Path(config.metrics_out)
            created.append(metrics_path)
            _write_json(metrics_path, {"rows": rows, "version": __version__})
            _write_meta(metrics_path)
            created.append(
                metrics_path.with_suffix(metrics_path.suffix + ".meta.json")
            )
        return report
    except Exception:
        for path in created:
            path.unlink(missing_ok=True)
        raise


_SDC_METHOD = re.compile(r"^sdc_(\w+?)(?:\+pca(\d+))?$")


def _method_sample(method: str, report: dict, corpus: Corpus,
                   seed: int) -> tuple[list[int], np.ndarray, str]:
    """Sampled ids, assignments for the intra term, and a label."""
    assignments = np.asarray(report["clusters"]["assignments"])
    collective = [e["page_id"] for e in report["sample"]["entries"]
                  if e["provenance"] == "collective"]
    k = report["clusters"]["k"]
    if method == "grasp":
        label = report["config"]["gnn"]
        return collective, assignments, f"grasp/{label}"
    if method == "random":
        # Same size as the collective sample; intra term reuses the
        # report's clustering since a random draw has none of its own.
        ids = random_sample(range(corpus.n), len(collective), seed)
        return ids, assignments, "random/uniform"
    match = _SDC_METHOD.match(method)
    if match is None:
        raise ContractError(f"unknown eval method {method!r}")
    kind, pca_dim = match.group(1), match.group(2)
    features = sdc_features(corpus, kind)
    label = f"sdc_{kind}/v1"
    if pca_dim is not None:
        features = pca_reduce(features, int(pca_dim))
        label += f"+pca{pca_dim} (PCA substituted for t-SNE)"
    clustering = kmeans(features, k, seed)
    reps = select_representatives(features, clustering)
    return sorted(reps.values()), clustering.assignments, label


def run_eval(report_path: str | Path, methods: list[str],
             eval_spaces: list[str], out_path: str | Path,
             seed: int | None = None) -> dict:
    """Score alternative sampling methods against an existing report."""
    report = json.loads(Path(report_path).read_text(encoding="utf-8"))
    config = PipelineConfig(**{
        **report["config"],
        "structured": tuple(report["config"]["structured"]),
        "processes": tuple(report["config"]["processes"]),
        "spaces": tuple(report["config"]["spaces"]),
        "report_out": str(report_path),
    })
    for space in eval_spaces:
        if space not in SPACES:
            raise ContractError(f"unknown metric space {space!r}")
    corpus = open_corpus(config.corpus_dir)
    spaces = load_spaces(corpus, config)
    missing = [s for s in eval_spaces if s not in spaces]
    if missing:
        raise SchemaError(f"corpus has no {', '.join(missing)} channel")
    effective_seed = config.seed if seed is None else seed

    rows: list[dict] = []
    for method in methods:
        ids, assignments, label = _method_sample(
            method, report, corpus, effective_seed
        )
        rows.extend(_metric_rows(
            ids, assignments, spaces, tuple(eval_spaces),
            method=method, method_label=label, k=report["clusters"]["k"],
        ))
    payload = {"rows": rows, "version": __version__, "seed": effective_seed}
    out = Path(out_path)
    _write_json(out, payload)
    _write_meta(out)
    return payload
