import numpy as np
import pytest

from synthograph.graph import OriginModel
from synthograph.modelio import ModelIOError, load_model, save_model
from synthograph.screen import ScreenerModel
from synthograph.corpus import LexiconSet
from synthograph.tagger import TrainConfig, train_crf, viterbi_decode, extract_features

from conftest import flat_sentence, toy_embeddings
from synthograph.corpus import EntityMention


def small_crf():
    from synthograph.tagger import LabelAlphabet

    alphabet = LabelAlphabet(["material"])
    emb = toy_embeddings(["black", "solid", "formed"], dim=3)
    sent = flat_sentence(["black", "solid", "formed"])
    tagged = [(sent, [EntityMention(0, 0, 2, "material")])]
    model = train_crf(tagged, LexiconSet.empty(), emb, TrainConfig(max_iters=20), alphabet=alphabet)
    return model, sent, emb


def test_tagger_roundtrip_preserves_decoding(tmp_path):
    model, sent, emb = small_crf()
    path = tmp_path / "tagger.model"
    save_model(path, model)
    loaded = load_model(path, expected_type="tagger")
    feats = extract_features(sent, LexiconSet.empty(), emb)
    assert list(viterbi_decode(loaded, feats)) == list(viterbi_decode(model, feats))
    assert np.array_equal(loaded.local_weights, model.local_weights)
    assert np.array_equal(loaded.transitions, model.transitions)
    assert loaded.vectorizer.feature_names == model.vectorizer.feature_names


def test_screener_roundtrip(tmp_path):
    model = ScreenerModel(weights=np.array([0.5, -1.0, 2.0]), bias=0.25)
    path = tmp_path / "screener.model"
    save_model(path, model)
    loaded = load_model(path)
    assert np.array_equal(loaded.weights, model.weights)
    assert loaded.bias == model.bias
    assert loaded.schema_version == model.schema_version


def test_origin_roundtrip(tmp_path):
    model = OriginModel(
        gamma=0.37,
        alpha=0.1,
        vocab=("gel", "<implicit>", "<unk>"),
        emissions={"mix": np.array([0.6, 0.3, 0.1])},
    )
    path = tmp_path / "origin.model"
    save_model(path, model)
    loaded = load_model(path, expected_type="origin")
    assert loaded.gamma == model.gamma
    assert loaded.vocab == model.vocab
    assert np.allclose(loaded.emissions["mix"], model.emissions["mix"])


def test_truncated_file_is_integrity_error(tmp_path):
    model = ScreenerModel(weights=np.zeros(2), bias=0.0)
    path = tmp_path / "m.model"
    save_model(path, model)
    data = path.read_bytes()
    path.write_bytes(data[: len(data) // 2])
    with pytest.raises(ModelIOError, match="corrupt"):
        load_model(path)


def test_type_tag_mismatch(tmp_path):
    model = ScreenerModel(weights=np.zeros(2), bias=0.0)
    path = tmp_path / "m.model"
    save_model(path, model)
    with pytest.raises(ModelIOError, match="expected tagger, found screener"):
        load_model(path, expected_type="tagger")


def test_version_mismatch_names_versions(tmp_path):
    import json

    model = ScreenerModel(weights=np.zeros(2), bias=0.0)
    path = tmp_path / "m.model"
    save_model(path, model)
    envelope = json.loads(path.read_text())
    envelope["version"] = 99
    path.write_text(json.dumps(envelope))
    with pytest.raises(ModelIOError, match="expected 1, found 99"):
        load_model(path)


def test_not_a_model_file(tmp_path):
    path = tmp_path / "m.model"
    path.write_text('{"something": "else"}')
    with pytest.raises(ModelIOError):
        load_model(path)
