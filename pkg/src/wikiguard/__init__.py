"""Stream-based disinformation detection and explanation for wiki revisions."""

__version__ = "0.1.0"
