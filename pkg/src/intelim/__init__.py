"""Rule synthesis, proof checking, search, translation and normalization
for calculi of arbitrary truth-functional connectives."""

__version__ = "0.1.0"
