"""graphsum: unsupervised extractive summarization.

Builds sentence-similarity graphs from interchangeable feature sources
(tf-idf, static or contextual word embeddings), selects summary sentences
by maximizing a budgeted submodular coverage + diversity objective, fuses
multiple similarity sources, and scores output with a built-in ROUGE
implementation.
"""

__version__ = "0.1.0"

from .errors import FormatError, GraphsumError, ResourceError

__all__ = ["FormatError", "GraphsumError", "ResourceError", "__version__"]
