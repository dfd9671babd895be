"""Graph-based representative page sampling for site-level accessibility audits.

The pipeline ingests a crawl snapshot (DOM files plus a hyperlink graph),
fuses per-page text and layout embeddings, refines the link graph guided by
clustering, and selects one centroid-nearest page per cluster to build a
WCAG-EM style page sample with diversity metrics.
"""

__version__ = "0.1.0"
