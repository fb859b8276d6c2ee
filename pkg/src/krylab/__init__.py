"""krylab: Krylov subspaces, gap metrics and solvability experiments at finite truncation."""

__version__ = "0.1.0"
