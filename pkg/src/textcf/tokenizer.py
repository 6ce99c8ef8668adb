"""Shared word/punctuation tokenizer with a reversible surface mapping.

Every component (classifier lookups, mask infilling, importance scores,
substitutions) agrees on token positions because they all go through this
module. A token is either a run of word characters or a single punctuation
mark; the whitespace between tokens is kept so edited sequences render back
to a natural surface string.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import InputError

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")

#: Sentinel used when a position is masked out. It is not a word token under
#: the tokenizer's own grammar, so it can never collide with vocabulary items.
DEFAULT_MASK_TOKEN = "[MASK]"


@dataclass(frozen=True)
class TokenSequence:
    """An ordered token list plus the inter-token whitespace of the original text.

    ``gaps`` has ``len(tokens) + 1`` entries: the surface string is
    ``gaps[0] + tokens[0] + gaps[1] + ... + tokens[-1] + gaps[-1]``.
    Substitutions keep the gaps, so single-token edits are rendered with
    the original spacing.
    """

    tokens: tuple[str, ...]
    gaps: tuple[str, ...]

    def __post_init__(self):
        if len(self.gaps) != len(self.tokens) + 1:
            raise InputError("gaps must have exactly len(tokens) + 1 entries")

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def text(self) -> str:
        parts = [self.gaps[0]]
        for token, gap in zip(self.tokens, self.gaps[1:]):
            parts.append(token)
            parts.append(gap)
        return "".join(parts)

    def substitute(self, position: int, replacement: str) -> "TokenSequence":
        """Return a copy with ``tokens[position]`` replaced, spacing untouched."""
        if not 0 <= position < len(self.tokens):
            raise InputError(f"position {position} out of range for {len(self.tokens)} tokens")
        tokens = self.tokens[:position] + (replacement,) + self.tokens[position + 1:]
        return TokenSequence(tokens, self.gaps)

    @classmethod
    def from_tokens(cls, tokens, separator: str = " ") -> "TokenSequence":
        """Build a sequence from bare tokens, joined by ``separator``."""
        tokens = tuple(tokens)
        if not tokens:
            raise InputError("cannot build a TokenSequence from zero tokens")
        gaps = ("",) + (separator,) * (len(tokens) - 1) + ("",)
        return cls(tokens, gaps)


def tokenize(text: str) -> TokenSequence:
    """Split ``text`` into word/punctuation tokens, keeping the whitespace map.

    Raises:
        InputError: if the text contains no tokens.
    """
    matches = list(_TOKEN_RE.finditer(text))
    if not matches:
        raise InputError("text is empty after tokenization")
    tokens = tuple(m.group(0) for m in matches)
    gaps = [text[: matches[0].start()]]
    for prev, nxt in zip(matches, matches[1:]):
        gaps.append(text[prev.end(): nxt.start()])
    gaps.append(text[matches[-1].end():])
    return TokenSequence(tokens, tuple(gaps))


def detokenize(sequence: TokenSequence) -> str:
    return sequence.text
