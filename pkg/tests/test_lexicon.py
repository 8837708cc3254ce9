import io
import random

import pytest

from asrdecode.lexicon import (
    Lexicon,
    LexiconError,
    TokenInventory,
    build_trie,
    join_word_pieces,
    parse_lexicon,
    serialize_lexicon,
)

INV = TokenInventory(["<blank>", "_c", "a", "t", "r", "_d", "o", "g"])


def random_lexicon(seed: int, words: int = 20) -> Lexicon:
    r = random.Random(seed)
    lex = Lexicon(INV)
    for i in range(words):
        for _ in range(r.randint(1, 2)):
            sp = tuple(r.randint(1, len(INV) - 1) for _ in range(r.randint(1, 5)))
            if sp not in lex.entries.get(f"w{i}", []):
                lex.add(f"w{i}", sp)
    return lex


def test_parse_single_entry():
    lex = parse_lexicon("cat\t_c a t\n", INV)
    assert lex.entries == {"cat": [(1, 2, 3)]}


def test_unknown_token_names_line():
    with pytest.raises(LexiconError, match="line 2"):
        parse_lexicon("cat\t_c a t\ncow\t_c o w\n", INV)


@pytest.mark.parametrize("text", ["cat\t\n", "cat\t_c a t\ncat\t_c a t\n", "no-tab-here\n"])
def test_parse_rejects(text):
    with pytest.raises(LexiconError):
        parse_lexicon(text, INV)


def test_repeated_word_adds_spelling():
    lex = parse_lexicon("cat\t_c a t\ncat\t_c a a t\n", INV)
    assert len(lex.entries["cat"]) == 2


def test_round_trip_100_words():
    lex = random_lexicon(1, words=100)
    again = parse_lexicon(serialize_lexicon(lex), INV)
    assert again.entries == lex.entries


def test_shared_prefix():
    lex = parse_lexicon("cat\t_c a t\ncar\t_c a r\n", INV)
    trie = build_trie(lex)
    shared = trie.find([1, 2])
    assert set(shared.children) == {3, 4}
    assert trie.find([1, 2, 3]).words == ["cat"]
    assert trie.find([1, 2, 4]).words == ["car"]
    assert len(trie) == 5


def test_empty_lexicon():
    trie = build_trie(Lexicon(INV))
    assert len(trie) == 1
    assert not trie.root.children


@pytest.mark.parametrize("seed", range(50))
def test_annotations_equal_lexicon(seed):
    lex = random_lexicon(seed)
    trie = build_trie(lex)
    assert trie.annotations() == set((sp, w) for w, sp in lex.pairs())
    assert len(trie) <= 1 + sum(len(sp) for _, sp in lex.pairs())
    for w, sp in lex.pairs():
        assert w in trie.find(sp).words


def test_inventory_reserved_tokens():
    assert INV.blank == 0
    assert INV.eos is None
    with pytest.raises(LexiconError):
        TokenInventory(["a", "a"])
    buf = io.StringIO()
    INV.write(buf)
    assert TokenInventory.read(io.StringIO(buf.getvalue())).tokens == INV.tokens


def test_join_word_pieces():
    assert join_word_pieces(["_the", "_ca", "t"]) == ["the", "cat"]
    assert join_word_pieces(["ca", "t", "_s"]) == ["cat", "s"]
    assert join_word_pieces(["_"]) == []
