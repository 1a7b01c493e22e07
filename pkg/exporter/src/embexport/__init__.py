"""embexport: export pretrained embeddings into the summarizer's file formats.

Static word vectors (word2vec binary or word-vector text models) become
word-vector text tables; contextual transformer checkpoints become
per-sentence token-matrix JSONL, with tokenization aligned to the
summarization engine.
"""

__version__ = "0.1.0"
