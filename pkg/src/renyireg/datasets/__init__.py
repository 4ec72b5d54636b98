"""Bundled example datasets; see PROVENANCE.md for sources and row order."""
