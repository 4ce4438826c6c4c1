import numpy as np
import pytest

from name_embedder.writer import write_embeddings


def _parse(path):
    """Tiny reference reader for the row format used by downstream tools."""
    rows = {}
    flagged = set()
    order = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.startswith("# fallback: "):
            flagged.add(line[len("# fallback: "):])
            continue
        if not line.strip() or line.startswith("#"):
            continue
        class_id, width, payload = line.split("\t")
        vec = np.array([float(x) for x in payload.split(",")])
        assert int(width) == vec.shape[0]
        rows[class_id] = vec
        order.append(class_id)
    return rows, flagged, order


def test_rows_round_trip_exactly(tmp_path):
    rng = np.random.default_rng(9)
    vectors = {"tiger": rng.normal(size=6), "lion": rng.normal(size=6)}
    out = tmp_path / "emb.txt"
    write_embeddings(vectors, out)
    rows, flagged, order = _parse(out)
    assert order == ["lion", "tiger"]
    assert flagged == set()
    for class_id, vec in vectors.items():
        assert np.array_equal(rows[class_id], vec)


def test_rewrite_is_byte_identical(tmp_path):
    vectors = {"b": np.arange(3.0), "a": np.arange(3.0) / 7.0}
    first = tmp_path / "one.txt"
    second = tmp_path / "two.txt"
    write_embeddings(vectors, first)
    write_embeddings(dict(reversed(vectors.items())), second)
    assert first.read_bytes() == second.read_bytes()


def test_fallback_comment_precedes_the_flagged_row(tmp_path):
    out = tmp_path / "emb.txt"
    write_embeddings({"a": np.ones(2), "b": np.zeros(2)}, out, fallback={"b"})
    lines = out.read_text().splitlines()
    assert lines[1] == "# fallback: b"
    assert lines[2].startswith("b\t2\t")
    _, flagged, order = _parse(out)
    assert flagged == {"b"}
    assert order == ["a", "b"]


def test_unknown_fallback_flag_is_rejected(tmp_path):
    with pytest.raises(ValueError, match="unknown classes"):
        write_embeddings({"a": np.ones(2)}, tmp_path / "e.txt", fallback={"zz"})


def test_empty_mapping_is_rejected(tmp_path):
    with pytest.raises(ValueError, match="no embeddings"):
        write_embeddings({}, tmp_path / "e.txt")


@pytest.mark.parametrize("class_id", ["", "a\tb", "a\nb", "#x"])
def test_class_ids_that_break_the_format_are_rejected(tmp_path, class_id):
    with pytest.raises(ValueError, match="cannot be written"):
        write_embeddings({class_id: np.ones(2)}, tmp_path / "e.txt")


def test_mixed_widths_are_rejected(tmp_path):
    with pytest.raises(ValueError, match="mixed embedding widths"):
        write_embeddings({"a": np.ones(2), "b": np.ones(3)}, tmp_path / "e.txt")


def test_non_finite_entries_are_rejected(tmp_path):
    with pytest.raises(ValueError, match="non-finite"):
        write_embeddings({"a": np.array([1.0, np.nan])}, tmp_path / "e.txt")


def test_non_vector_shapes_are_rejected(tmp_path):
    with pytest.raises(ValueError, match="non-empty vector"):
        write_embeddings({"a": np.ones((2, 2))}, tmp_path / "e.txt")
    with pytest.raises(ValueError, match="non-empty vector"):
        write_embeddings({"a": np.ones(0)}, tmp_path / "e.txt")
