"""Silent-video-to-speech toolkit.

Subpackages cover the audio codec (LPC/LSP features and unvoiced
synthesis), frame ingestion, a from-scratch convolutional regression
network, a deterministic synthetic audiovisual corpus, and a CLI that
wires them into an end-to-end pipeline.
"""

__version__ = "0.1.0"
