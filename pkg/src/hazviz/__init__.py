"""hazviz: severe-injury narratives to synthetic work-zone hazard imagery.

The package covers the full desk-scale loop: ingest OSHA severe-injury
records, compose staged prompts for text and image backends, orchestrate
single-pass and four-stage temporal generation runs, and evaluate outputs
with embedding-retrieval statistics and expert-review reliability measures.
"""
from __future__ import annotations

__version__ = "0.1.0"
