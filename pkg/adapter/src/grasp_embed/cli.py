"""Command-line entry point: encode a corpus into exchange files.

Exit codes: 0 success, 2 input or configuration error, 3 extraction
error. Writing the files into the corpus directory itself makes them
visible to the sampler's file-based embedding mode.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .errors import AdapterError, ConfigError, ManifestError, ModelLoadError
from .extract import (DEFAULT_TEXT_MODEL, DEFAULT_VISION_MODEL,
                      POOLING_MODES, AdapterConfig,
                      extract_text_embeddings, extract_visual_embeddings)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_RUNTIME = 3

MODALITIES = ("text", "visual")

INPUT_ERRORS = (ConfigError, ManifestError, ModelLoadError,
                FileNotFoundError, NotADirectoryError)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grasp-embed",
        description="Encode corpus pages with pretrained text/vision "
                    "encoders and write the sampler's embedding "
                    "exchange files.",
    )
    parser.add_argument("--version", action="version",
                        version=f"grasp-embed {__version__}")
    parser.add_argument("--corpus", required=True,
                        help="corpus directory containing manifest.jsonl")
    parser.add_argument("--out", required=True,
                        help="output directory for the exchange files")
    parser.add_argument("--text-model", default=DEFAULT_TEXT_MODEL,
                        help="text encoder model id or local path")
    parser.add_argument("--vision-model", default=DEFAULT_VISION_MODEL,
                        help="vision encoder model id or local path")
    parser.add_argument("--max-text-tokens", type=int, default=512)
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--pooling", choices=POOLING_MODES, default="mean")
    parser.add_argument("--raw-markup", action="store_true",
                        help="encode raw DOM markup instead of visible text")
    parser.add_argument("--modalities", default="text,visual",
                        help="comma-separated subset of: text, visual")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    wanted = tuple(m.strip() for m in args.modalities.split(",") if m.strip())
    unknown = [m for m in wanted if m not in MODALITIES]
    if unknown or not wanted:
        print(f"error: bad --modalities value {args.modalities!r}",
              file=sys.stderr)
        return EXIT_INPUT
    try:
        config = AdapterConfig(
            text_model_id=args.text_model,
            vision_model_id=args.vision_model,
            max_text_tokens=args.max_text_tokens,
            batch_size=args.batch_size,
            device=args.device,
            pooling=args.pooling,
            raw_markup=args.raw_markup,
        )
        for modality in wanted:
            extract = (extract_text_embeddings if modality == "text"
                       else extract_visual_embeddings)
            ids_path, f32_path = extract(args.corpus, config, args.out)
            print(f"wrote {ids_path} and {f32_path}")
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
