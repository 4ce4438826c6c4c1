import numpy as np
import pytest

from name_embedder.model import MASK_TOKEN, HashModel, load_model, tokenize


def test_load_model_parses_width():
    model = load_model("hash:1024")
    assert isinstance(model, HashModel)
    assert model.width == 1024
    assert model.mask_token == MASK_TOKEN


@pytest.mark.parametrize("spec", ["hash", "hash:", "hash:abc", "glove:300", ""])
def test_load_model_rejects_bad_identifiers(spec):
    with pytest.raises(ValueError):
        load_model(spec)


def test_load_model_rejects_nonpositive_width():
    with pytest.raises(ValueError):
        load_model("hash:0")
    with pytest.raises(ValueError):
        load_model("hash:-4")


def test_tokenize_lowercases_and_splits_punctuation():
    assert tokenize("The small Lion slept.") == ["the", "small", "lion", "slept", "."]


def test_tokenize_keeps_mask_token_as_one_piece():
    assert tokenize("A photo of a [MASK].") == ["a", "photo", "of", "a", "[MASK]", "."]


def test_token_vectors_are_unit_length_and_stable_across_instances():
    a = HashModel(64)._token_vector("lion")
    b = HashModel(64)._token_vector("lion")
    assert np.array_equal(a, b)
    assert np.linalg.norm(a) == pytest.approx(1.0, rel=1e-12)


def test_vectors_shape_and_determinism():
    model = HashModel(32)
    tokens = tokenize("A lion chased the herd.")
    out1 = model.vectors(tokens)
    out2 = HashModel(32).vectors(tokens)
    assert out1.shape == (len(tokens), 32)
    assert np.array_equal(out1, out2)


def test_output_at_position_ignores_its_own_token():
    # the vector read at a masked slot must not leak the replaced token
    model = HashModel(48)
    left = tokenize("the quick fox jumps over logs")
    right = list(left)
    right[2] = MASK_TOKEN
    a = model.vectors(left)[2]
    b = model.vectors(right)[2]
    assert np.array_equal(a, b)


def test_output_depends_on_context():
    model = HashModel(48)
    a = model.vectors(tokenize("the [MASK] slept all day"))[1]
    b = model.vectors(tokenize("a [MASK] chased the herd"))[1]
    assert not np.allclose(a, b)


def test_vectors_rejects_empty_and_overlong_input():
    model = HashModel(16)
    with pytest.raises(ValueError):
        model.vectors([])
    with pytest.raises(ValueError, match="truncate"):
        model.vectors(["tok"] * (model.max_tokens + 1))
