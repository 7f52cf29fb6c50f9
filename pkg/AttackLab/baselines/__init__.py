"""Baseline attacks, threshold scores and exact tree-game oracles."""
