"""Vocabulary construction, special-token handling, encode/decode round-trips."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from recipegen import corpus as C
from recipegen import tokenizer as tok
from recipegen.errors import EmptyCorpusError
from recipegen.tokenizer import (
    EOS,
    PAD,
    SPECIAL_TOKENS,
    UNK,
    Vocabulary,
    build_vocab,
    decode,
    dumps_vocab,
    encode,
    loads_vocab,
    normalize_numbers,
)


def docs_of(*texts):
    return [C.TaggedDocument(text=t) for t in texts]


class TestNormalizeNumbers:
    def test_vulgar_fractions(self):
        assert normalize_numbers("add ½ cup") == "add <F_1_2> cup"
        assert normalize_numbers("¾ tsp and ⅛ tsp") == "<F_3_4> tsp and <F_1_8> tsp"

    def test_ascii_fractions(self):
        assert normalize_numbers("1/2 cup") == "<F_1_2> cup"
        assert normalize_numbers("use 3/4 stick") == "use <F_3_4> stick"

    def test_unmapped_fraction_untouched(self):
        assert normalize_numbers("2/7 portion") == "2/7 portion"

    def test_plain_numbers_untouched(self):
        assert normalize_numbers("375 degrees for 20 minutes") == "375 degrees for 20 minutes"

    def test_no_match_inside_longer_number(self):
        assert normalize_numbers("11/22") == "11/22"
        assert normalize_numbers("1/2.5") == "1/2.5"

    @given(st.text(alphabet="0123456789/½¾⅛ abc.", max_size=40))
    @settings(max_examples=80, deadline=None)
    def test_idempotent(self, text):
        once = normalize_numbers(text)
        assert normalize_numbers(once) == once


class TestBuildVocab:
    def test_specials_occupy_lowest_contiguous_ids(self, char_vocab, word_vocab):
        for vocab in (char_vocab, word_vocab):
            for i, token in enumerate(SPECIAL_TOKENS):
                assert vocab.token_to_id[token] == i
            assert vocab.pad_id == 0
            assert vocab.token_to_id[UNK] == 1
            assert vocab.token_to_id[EOS] == 2

    def test_special_count(self):
        assert len(SPECIAL_TOKENS) == 22  # pad/unk/eos + 10 tags + 9 fractions

    def test_char_mode_keeps_every_char(self):
        vocab = build_vocab(docs_of("<RECIPE_START> abc <RECIPE_END>"), mode="char")
        for ch in "abc ":
            assert ch in vocab.token_to_id

    def test_word_min_freq(self):
        docs = docs_of("<RECIPE_START> salt salt pepper <RECIPE_END>")
        vocab = build_vocab(docs, mode="word", min_freq=2)
        assert "salt" in vocab.token_to_id
        assert "pepper" not in vocab.token_to_id

    def test_frequency_then_lexicographic_order(self):
        docs = docs_of("<RECIPE_START> bb bb aa cc cc <RECIPE_END>")
        vocab = build_vocab(docs, mode="word")
        n = len(SPECIAL_TOKENS)
        assert vocab.id_to_token[n : n + 3] == ["bb", "cc", "aa"]

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpusError):
            build_vocab([], mode="char")

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            build_vocab(docs_of("x"), mode="subword")

    def test_id_bijection(self, char_vocab):
        assert len(char_vocab.token_to_id) == len(char_vocab.id_to_token)
        for token, idx in char_vocab.token_to_id.items():
            assert char_vocab.id_to_token[idx] == token


class TestEncodeDecode:
    def test_specials_are_atomic_char_mode(self, char_vocab):
        ids = encode(char_vocab, "<RECIPE_START> a <RECIPE_END>")
        assert ids[0] == char_vocab.id_of("<RECIPE_START>")
        assert ids[-1] == char_vocab.id_of("<RECIPE_END>")
        assert len(ids) == 5  # tag, space, a, space, tag

    def test_greedy_longest_match(self, char_vocab):
        # <INGR_START> shares a prefix with nothing shorter; <F_1_2> must win
        # over parsing "<" as a char when the full literal is present.
        ids = encode(char_vocab, "<F_1_2>")
        assert ids == [char_vocab.id_of("<F_1_2>")]

    def test_partial_tag_falls_back_to_chars(self, char_vocab):
        ids = encode(char_vocab, "<INGR")
        assert len(ids) == 5
        assert char_vocab.id_of("<INGR_START>") not in ids

    def test_unknown_word_maps_to_unk(self, word_vocab):
        ids = encode(word_vocab, "notavocabword")
        assert ids == [word_vocab.unk_id]

    def test_round_trip_toy_docs(self, toy_docs, char_vocab, word_vocab):
        for doc in toy_docs:
            assert decode(char_vocab, encode(char_vocab, doc)) == doc
            assert decode(word_vocab, encode(word_vocab, doc)) == doc

    def test_round_trip_demo_docs(self):
        from recipegen import synth

        records = synth.demo_records(n=15, seed=5)
        docs = [C.serialize(r).text for r in records]
        tagged = [C.TaggedDocument(text=d) for d in docs]
        for mode in ("char", "word"):
            vocab = build_vocab(tagged, mode=mode)
            for doc in docs:
                assert decode(vocab, encode(vocab, doc)) == doc

    def test_decode_out_of_range(self, char_vocab):
        with pytest.raises(IndexError):
            decode(char_vocab, [char_vocab.size])

    @given(st.data())
    @settings(max_examples=30, deadline=None)
    def test_round_trip_random_doc_subsets(self, data):
        from recipegen import synth

        records = synth.demo_records(n=8, seed=9)
        docs = [C.serialize(r).text for r in records]
        chosen = data.draw(st.lists(st.sampled_from(docs), min_size=1, max_size=4))
        vocab = build_vocab([C.TaggedDocument(text=d) for d in chosen], mode="char")
        for doc in chosen:
            assert decode(vocab, encode(vocab, doc)) == doc


class TestSaveLoad:
    def test_dumps_loads_round_trip(self, word_vocab):
        text = dumps_vocab(word_vocab)
        back = loads_vocab(text)
        assert back.mode == word_vocab.mode
        assert back.token_to_id == word_vocab.token_to_id
        assert back.id_to_token == word_vocab.id_to_token
        assert back.min_freq == word_vocab.min_freq

    def test_file_round_trip(self, char_vocab, tmp_path):
        path = tmp_path / "vocab.txt"
        tok.save_vocab(char_vocab, path)
        back = tok.load_vocab(path)
        assert back.token_to_id == char_vocab.token_to_id

    def test_encode_after_reload_matches(self, char_vocab, toy_docs):
        back = loads_vocab(dumps_vocab(char_vocab))
        for doc in toy_docs[:3]:
            assert encode(back, doc) == encode(char_vocab, doc)
