"""Error quantities, spectrum matching and convergence rates."""
