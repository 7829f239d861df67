"""Space-efficient polyomino and bar-graph encodings."""

__version__ = "0.1.0"
