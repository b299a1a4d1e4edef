"""CCEAD: character-aware sequence-to-sequence text correction and completion.

The package is organised around a small autodiff tensor core
(:mod:`ccead.tensor`, compiled kernels with a pure-Python fallback), text
codecs, a learned typo noise model, the encoder/decoder network, training
and evaluation tooling, and a CLI plus HTTP inference server.
"""

__version__ = "0.1.0"

CHECKPOINT_MAGIC = b"CCEAD\x00"
