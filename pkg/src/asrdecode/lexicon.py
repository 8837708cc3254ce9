"""Token inventories, word lexicons, and the prefix trie used by lexicon decoding."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Iterator, TextIO

BLANK = "<blank>"
EOS_TOKEN = "<eos>"
WORD_BOUNDARY = "_"


class LexiconError(ValueError):
    pass


class TokenInventory:
    """Ordered token strings; line index in the inventory file is the id.

    ``blank`` and ``eos`` name reserved tokens.  A reserved token absent from
    the list leaves the corresponding index as ``None`` (a CTC inventory has
    no EOS, a Seq2Seq one has no blank).
    """

    def __init__(self, tokens: Iterable[str], blank: str | None = BLANK, eos: str | None = EOS_TOKEN):
        self.tokens = list(tokens)
        self._index = {t: i for i, t in enumerate(self.tokens)}
        if len(self._index) != len(self.tokens):
            raise LexiconError("token strings must be unique")
        self.blank = self._index.get(blank) if blank is not None else None
        self.eos = self._index.get(eos) if eos is not None else None
        if self.blank is not None and self.blank == self.eos:
            raise LexiconError("blank and EOS must be distinct")

    @classmethod
    def read(cls, source: TextIO, **kwargs) -> "TokenInventory":
        return cls((ln.rstrip("\n") for ln in source if ln.strip()), **kwargs)

    def write(self, sink: TextIO) -> None:
        for tok in self.tokens:
            sink.write(tok + "\n")

    def __len__(self) -> int:
        return len(self.tokens)

    def __getitem__(self, idx: int) -> str:
        return self.tokens[idx]

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def id(self, token: str) -> int:
        try:
            return self._index[token]
        except KeyError:
            raise LexiconError(f"unknown token {token!r}") from None

    def encode(self, tokens: Iterable[str]) -> list[int]:
        return [self.id(t) for t in tokens]

    def decode(self, ids: Iterable[int]) -> list[str]:
        return [self.tokens[i] for i in ids]


@dataclass
class Lexicon:
    inventory: TokenInventory
    entries: dict[str, list[tuple[int, ...]]] = field(default_factory=dict)

    def add(self, word: str, spelling: Iterable[int]) -> None:
        spelling = tuple(spelling)
        if not spelling:
            raise LexiconError(f"empty spelling for {word!r}")
        for t in spelling:
            if not 0 <= t < len(self.inventory):
                raise LexiconError(f"token id {t} out of range for {word!r}")
        spellings = self.entries.setdefault(word, [])
        if spelling in spellings:
            raise LexiconError(f"duplicate spelling for {word!r}")
        spellings.append(spelling)

    def __len__(self) -> int:
        return len(self.entries)

    def pairs(self) -> Iterator[tuple[str, tuple[int, ...]]]:
        for word, spellings in self.entries.items():
            for sp in spellings:
                yield word, sp


def parse_lexicon(source: TextIO | str, inventory: TokenInventory) -> Lexicon:
    """Parse ``word<TAB>tok tok ...`` lines; repeated words add spellings."""
    if isinstance(source, str):
        source = io.StringIO(source)
    lex = Lexicon(inventory)
    for lineno, line in enumerate(source, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        word, sep, spelling = line.partition("\t")
        if not sep or not word:
            raise LexiconError(f"line {lineno}: expected 'word<TAB>tokens'")
        toks = spelling.split()
        if not toks:
            raise LexiconError(f"line {lineno}: empty spelling for {word!r}")
        ids = []
        for t in toks:
            if t not in inventory:
                raise LexiconError(f"line {lineno}: unknown token {t!r}")
            ids.append(inventory.id(t))
        try:
            lex.add(word, ids)
        except LexiconError as exc:
            raise LexiconError(f"line {lineno}: {exc}") from None
    return lex


def serialize_lexicon(lexicon: Lexicon, sink: TextIO | None = None) -> str:
    inv = lexicon.inventory
    text = "".join(
        f"{word}\t{' '.join(inv[t] for t in sp)}\n" for word, sp in lexicon.pairs()
    )
    if sink is not None:
        sink.write(text)
    return text


class TrieNode:
    __slots__ = ("id", "children", "words")

    def __init__(self, node_id: int):
        self.id = node_id
        self.children: dict[int, TrieNode] = {}
        self.words: list[str] = []


class LexiconTrie:
    def __init__(self) -> None:
        self.root = TrieNode(0)
        self.nodes = [self.root]

    def insert(self, spelling: tuple[int, ...], word: str) -> None:
        node = self.root
        for tok in spelling:
            child = node.children.get(tok)
            if child is None:
                child = TrieNode(len(self.nodes))
                self.nodes.append(child)
                node.children[tok] = child
            node = child
        if word not in node.words:
            node.words.append(word)

    def find(self, spelling: Iterable[int]) -> TrieNode | None:
        node = self.root
        for tok in spelling:
            node = node.children.get(tok)
            if node is None:
                return None
        return node

    def annotations(self) -> set[tuple[tuple[int, ...], str]]:
        """Every (root-to-node path, word) pair stored in the trie."""
        out: set[tuple[tuple[int, ...], str]] = set()
        stack: list[tuple[TrieNode, tuple[int, ...]]] = [(self.root, ())]
        while stack:
            node, path = stack.pop()
            out.update((path, w) for w in node.words)
            for tok, child in node.children.items():
                stack.append((child, path + (tok,)))
        return out

    def __len__(self) -> int:
        return len(self.nodes)


def build_trie(lexicon: Lexicon) -> LexiconTrie:
    trie = LexiconTrie()
    for word, spelling in lexicon.pairs():
        trie.insert(spelling, word)
    return trie


def join_word_pieces(pieces: Iterable[str], boundary: str = WORD_BOUNDARY) -> list[str]:
    """Glue word pieces into words; a leading ``boundary`` starts a new word."""
    words: list[str] = []
    for piece in pieces:
        if piece.startswith(boundary):
            words.append(piece[len(boundary):])
        elif words:
            words[-1] += piece
        else:
            words.append(piece)
    return [w for w in words if w]
