"""Universal approximation of n-copy quantum states through Schur-Weyl
blocks, minimax redundancy constants, and the prefix codes they induce."""

__version__ = "0.1.0"
