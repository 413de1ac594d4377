"""Feature subset selection with the penguin search heuristic (FS-PeSOA)."""

__version__ = "0.1.0"
