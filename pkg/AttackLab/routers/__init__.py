"""HTTP routers: the run registry and the exact tree-game oracles."""
