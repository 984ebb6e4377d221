import numpy as np

from synthograph.corpus import LexiconSet
from synthograph.tagger import FeatureVectorizer, extract_features, token_feature_names
from synthograph.tagger.features import capitalization_class, word_shape

from conftest import flat_sentence, make_sentence, toy_embeddings


def test_word_shape_collapses_runs():
    assert word_shape("TiO2") == "ULUD"
    assert word_shape("Hello") == "UL"
    assert word_shape("ABC") == "U"
    assert word_shape("a-b") == "LPL"
    assert word_shape("1,000") == "DPD"


def test_capitalization_classes():
    assert capitalization_class("water") == "lower"
    assert capitalization_class("NaCl") == "mixed"
    assert capitalization_class("AGNO") == "upper"
    assert capitalization_class("Teflon") == "title"
    assert capitalization_class("°") == "none"


def test_formula_token_fires_digit_and_shape():
    sent = flat_sentence(["TiO2"])
    feats = token_feature_names(sent, LexiconSet.empty())[0]
    assert "has_digit" in feats
    assert "shape=ULUD" in feats
    assert "cap=mixed" in feats


def test_stopword_lexicon_membership():
    lex = LexiconSet(lexicons={"stopwords": frozenset({"the"})})
    sent = flat_sentence(["the"])
    feats = token_feature_names(sent, lex)[0]
    assert "lex:stopwords" in feats


def test_hand_enumerated_feature_set():
    # sentence: "was stirred for 30" with a small operations lexicon
    sent = make_sentence(
        [
            ("was", "VBD", "be", 1, "aux:pass"),
            ("stirred", "VBN", "stir", -1, "root"),
            ("for", "IN", "for", 3, "case"),
            ("30", "CD", "30", 1, "obl"),
        ]
    )
    lex = LexiconSet(lexicons={"operations": frozenset({"stirred"})})
    feats = token_feature_names(sent, lex)
    assert set(feats[1]) == {
        "w[-2]=<s>",
        "w[-1]=was",
        "w[0]=stirred",
        "w[1]=for",
        "w[2]=30",
        "shape=L",
        "pre1=s",
        "suf1=d",
        "pre2=st",
        "suf2=ed",
        "pre3=sti",
        "suf3=red",
        "cap=lower",
        "pos[-1]=VBD",
        "pos[0]=VBN",
        "pos[1]=IN",
        "dep=root",
        "lemma=stir",
        "lex:operations",
    }
    assert set(feats[3]) == {
        "w[-2]=stirred",
        "w[-1]=for",
        "w[0]=30",
        "w[1]=</s>",
        "w[2]=</s>",
        "shape=D",
        "pre1=3",
        "suf1=0",
        "pre2=30",
        "suf2=30",
        "has_digit",
        "cap=none",
        "pos[-1]=IN",
        "pos[0]=CD",
        "pos[1]=</s>",
        "dep=obl",
        "lemma=30",
    }


def test_extract_features_dense_block():
    emb = toy_embeddings(["stirred"])
    sent = flat_sentence(["stirred", "gently"])
    feats = extract_features(sent, LexiconSet.empty(), emb)
    assert feats.dense.shape == (2, 4)
    assert np.allclose(feats.dense[0], emb.lookup("stirred"))
    assert np.allclose(feats.dense[1], emb.unknown)


def test_vectorizer_freezes_lexicographically():
    emb = toy_embeddings(["b", "a"])
    s = flat_sentence(["b", "a"])
    feats = extract_features(s, LexiconSet.empty(), emb)
    vec = FeatureVectorizer.fit([feats], emb_dim=emb.dimension)
    assert vec.feature_names == sorted(vec.feature_names)
    ids = vec.transform_names(feats.names[0])
    assert list(ids) == sorted(ids)


def test_unseen_features_dropped():
    vec = FeatureVectorizer(["w[0]=known"], emb_dim=0)
    assert list(vec.transform_names(["w[0]=known", "w[0]=novel"])) == [0]
    assert list(vec.transform_names(["w[0]=novel"])) == []
