"""Encoder-backed embedding extraction in the exchange file format.

The text channel pools a contextual encoder's final layer over each
page's visible DOM text; the visual channel pools a vision
transformer's token representations of each page's screenshot. Output
rows follow manifest order and carry the manifest page ids. Pages that
cannot be encoded get zero rows; the sampler treats an all-zero row as
an absent signal.

Inference runs with frozen weights in eval mode, so a given corpus and
configuration always produce byte-identical files on the same device.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .errors import ConfigError, ModelLoadError
from .htmltext import visible_text
from .manifest import PageEntry, read_manifest

log = logging.getLogger(__name__)

POOLING_MODES = ("mean", "cls")

DEFAULT_TEXT_MODEL = "bert-base-uncased"
DEFAULT_VISION_MODEL = "google/vit-base-patch16-224-in21k"


@dataclass(frozen=True)
class AdapterConfig:
    """Encoder ids and inference knobs."""

    text_model_id: str = DEFAULT_TEXT_MODEL
    vision_model_id: str = DEFAULT_VISION_MODEL
    max_text_tokens: int = 512
    batch_size: int = 8
    device: str = "cpu"
    pooling: str = "mean"     # "cls" keeps the leading token instead
    raw_markup: bool = False  # encode the raw DOM string, tags included

    def __post_init__(self):
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_text_tokens < 1:
            raise ConfigError(
                f"max_text_tokens must be >= 1, got {self.max_text_tokens}"
            )
        if self.pooling not in POOLING_MODES:
            raise ConfigError(f"unknown pooling {self.pooling!r}")


def _load_text_encoder(config: AdapterConfig):
    from transformers import AutoModel, AutoTokenizer
    from transformers.utils import logging as hf_logging

    hf_logging.disable_progress_bar()
    try:
        tokenizer = AutoTokenizer.from_pretrained(config.text_model_id)
        model = AutoModel.from_pretrained(config.text_model_id)
    except Exception as exc:
        raise ModelLoadError(
            f"cannot load text encoder {config.text_model_id!r}: {exc}"
        ) from exc
    return tokenizer, model.to(config.device).eval()


def _load_vision_encoder(config: AdapterConfig):
    from transformers import AutoImageProcessor, AutoModel
    from transformers.utils import logging as hf_logging

    hf_logging.disable_progress_bar()
    try:
        processor = AutoImageProcessor.from_pretrained(config.vision_model_id)
        model = AutoModel.from_pretrained(config.vision_model_id)
    except Exception as exc:
        raise ModelLoadError(
            f"cannot load vision encoder {config.vision_model_id!r}: {exc}"
        ) from exc
    return processor, model.to(config.device).eval()


def _pool(hidden: torch.Tensor, mask: torch.Tensor | None,
          pooling: str) -> torch.Tensor:
    if pooling == "cls":
        return hidden[:, 0]
    if mask is None:
        return hidden.mean(dim=1)
    weights = mask.unsqueeze(-1).to(hidden.dtype)
    return (hidden * weights).sum(dim=1) / weights.sum(dim=1).clamp(min=1.0)


def _write_exchange(pages: list[PageEntry], rows: np.ndarray,
                    out_dir: Path, stem: str) -> tuple[Path, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    ids_path = out_dir / f"{stem}.ids.txt"
    f32_path = out_dir / f"{stem}.f32"
    with open(ids_path, "w", encoding="ascii") as fh:
        for page in pages:
            fh.write(f"{page.page_id}\n")
    f32_path.write_bytes(np.ascontiguousarray(rows, dtype=np.float32).tobytes())
    return ids_path, f32_path


def extract_text_embeddings(corpus_dir: str | Path, config: AdapterConfig,
                            out_dir: str | Path) -> tuple[Path, Path]:
    """Encode DOM text; writes text.ids.txt + text.f32 under out_dir.

    A page whose DOM cannot be read or whose text is empty gets a zero
    row and a warning.
    """
    corpus_dir = Path(corpus_dir)
    pages = read_manifest(corpus_dir)
    tokenizer, model = _load_text_encoder(config)

    texts: list[str | None] = []
    for page in pages:
        dom_file = corpus_dir / page.dom_path
        try:
            raw = dom_file.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            log.warning("page %d: cannot read %s (%s); zero row",
                        page.page_id, dom_file, exc)
            texts.append(None)
            continue
        text = raw if config.raw_markup else visible_text(raw)
        if text.strip():
            texts.append(text)
        else:
            log.warning("page %d: no text to encode; zero row", page.page_id)
            texts.append(None)

    rows = np.zeros((len(pages), model.config.hidden_size), dtype=np.float32)
    todo = [i for i, text in enumerate(texts) if text is not None]
    with torch.no_grad():
        for start in range(0, len(todo), config.batch_size):
            batch = todo[start:start + config.batch_size]
            enc = tokenizer(
                [texts[i] for i in batch], padding=True, truncation=True,
                max_length=config.max_text_tokens, return_tensors="pt",
            ).to(config.device)
            hidden = model(**enc).last_hidden_state
            pooled = _pool(hidden, enc.get("attention_mask"), config.pooling)
            rows[batch] = pooled.cpu().numpy().astype(np.float32)
    return _write_exchange(pages, rows, Path(out_dir), "text")


def extract_visual_embeddings(corpus_dir: str | Path, config: AdapterConfig,
                              out_dir: str | Path) -> tuple[Path, Path]:
    """Encode screenshots; writes visual.ids.txt + visual.f32 under out_dir.

    Pages without a screenshot get zero rows by contract (no warning);
    unreadable or corrupt images get zero rows with a warning.
    """
    from PIL import Image

    corpus_dir = Path(corpus_dir)
    pages = read_manifest(corpus_dir)
    processor, model = _load_vision_encoder(config)

    images = []
    for page in pages:
        if not page.screenshot_path:
            images.append(None)
            continue
        path = corpus_dir / page.screenshot_path
        try:
            with Image.open(path) as img:
                images.append(img.convert("RGB"))
        except (OSError, ValueError) as exc:
            log.warning("page %d: cannot decode %s (%s); zero row",
                        page.page_id, path, exc)
            images.append(None)

    rows = np.zeros((len(pages), model.config.hidden_size), dtype=np.float32)
    todo = [i for i, img in enumerate(images) if img is not None]
    with torch.no_grad():
        for start in range(0, len(todo), config.batch_size):
            batch = todo[start:start + config.batch_size]
            pix = processor(
                images=[images[i] for i in batch], return_tensors="pt"
            ).to(config.device)
            hidden = model(**pix).last_hidden_state
            pooled = _pool(hidden, None, config.pooling)
            rows[batch] = pooled.cpu().numpy().astype(np.float32)
    return _write_exchange(pages, rows, Path(out_dir), "visual")
