"""Hash-based prompt embedding.

There is no learned vocabulary: each whitespace token indexes a fixed
random table through its SHA-256 digest, so embeddings are deterministic
across processes and machines.  Row 0 of the table is reserved for the
unconditional (empty prompt) token and can never collide with a real one.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

TEXT_DIM = 32
MAX_TOKENS = 8
_TABLE_ROWS = 4096
_TABLE_SEED = 2024


@dataclass(frozen=True)
class TextEncoder:
    dim: int = TEXT_DIM
    max_tokens: int = MAX_TOKENS

    def __post_init__(self):
        rng = np.random.default_rng(_TABLE_SEED)
        table = rng.normal(0.0, 1.0, (_TABLE_ROWS, self.dim)).astype(np.float32)
        object.__setattr__(self, "_table", table)

    def _row(self, token: str) -> int:
        digest = hashlib.sha256(token.encode("utf-8")).digest()
        return 1 + int.from_bytes(digest[:8], "big") % (_TABLE_ROWS - 1)

    def embed(self, prompt: str) -> np.ndarray:
        """Embed a prompt as a fixed-size (max_tokens, dim) float32 array.

        The empty prompt maps to the reserved unconditional token in slot 0;
        unused slots stay zero.
        """
        out = np.zeros((self.max_tokens, self.dim), dtype=np.float32)
        tokens = prompt.split()
        if not tokens:
            out[0] = self._table[0]
            return out
        for i, token in enumerate(tokens[: self.max_tokens]):
            out[i] = self._table[self._row(token)]
        return out
