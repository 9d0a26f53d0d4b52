"""orca: agentic data retrieval and causal-effect analysis over relational
databases, with a deterministic mock model provider for offline runs."""

__version__ = "0.1.0"
