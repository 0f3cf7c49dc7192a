"""Attach out-of-vocabulary words to a WordNet-style taxonomy and score the result."""
from .embeddings import EmbeddingStore, load_vectors
from .gold import GoldEntry, GoldStandard, read_gold, read_submission, write_gold, write_submission
from .scorer import average_precision, evaluate, reciprocal_rank
from .taxonomy import Synset, TaxonomyError, TaxonomyGraph, load_taxonomy

__version__ = "0.1.0"
