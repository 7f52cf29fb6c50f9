"""Sparse action-attack laboratory for cooperative multi-agent teams."""
