import hashlib
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from islr.data import (
    LABELS, DatasetIndex, Entry, generate_synthetic_glyphs, label_index, load_input, make_batch,
    scan_dataset, stratified_split,
)
from islr.errors import ConfigError, DatasetError, ImageIOError
from islr.glyphs import CANVAS, STROKES, random_glyph, render_glyph
from islr.imaging import PipelineConfig, save_image
from islr.imaging.pnm import load_gray

from oracles import component_sizes

ALL_OFF = dict(contrast=False, blur=False, median=False, segment=False, edges=False)


def _make_tree(root, per_class=3, classes=LABELS):
    img = np.zeros((8, 8), np.uint8)
    for name in classes:
        d = root / name
        d.mkdir(parents=True)
        for k in range(per_class):
            save_image(img, d / f"img{k}.pgm")
    return root


def _fake_index(per_class):
    entries = [Entry(f"{LABELS[c]}/{k}.pgm", c) for c, n in enumerate(per_class)
               for k in range(n)]
    return DatasetIndex("root", entries)


@pytest.fixture(scope="module")
def synth10(tmp_path_factory):
    root = tmp_path_factory.mktemp("synth10")
    return root, generate_synthetic_glyphs(10, 4, root)


# ------------------------------------------------------------------ labels

def test_label_map():
    assert len(LABELS) == 36 == len(set(LABELS))
    assert LABELS[:10] == tuple("0123456789")
    assert LABELS[10] == "A" and LABELS[-1] == "Z"
    assert label_index("Z") == 35
    with pytest.raises(DatasetError):
        label_index("AA")


# -------------------------------------------------------------------- scan

def test_scan_counts(tmp_path):
    index = scan_dataset(_make_tree(tmp_path))
    assert len(index) == 108
    assert index.counts == {i: 3 for i in range(36)}
    assert all(e.label < 36 for e in index.entries)


def test_scan_is_sorted_and_deterministic(tmp_path):
    _make_tree(tmp_path, 2, "BA0")
    a, b = scan_dataset(tmp_path), scan_dataset(tmp_path)
    assert a.entries == b.entries
    assert [(LABELS[e.label], e.path.name) for e in a.entries] == [
        ("0", "img0.pgm"), ("0", "img1.pgm"), ("A", "img0.pgm"), ("A", "img1.pgm"),
        ("B", "img0.pgm"), ("B", "img1.pgm")]


def test_scan_ignores_non_image_files(tmp_path):
    _make_tree(tmp_path, 2, "7")
    (tmp_path / "7" / "notes.txt").write_text("x")
    (tmp_path / "README").write_text("x")
    assert len(scan_dataset(tmp_path)) == 2


def test_scan_rejects_unknown_class(tmp_path):
    _make_tree(tmp_path, 1, ["A", "AA"])
    with pytest.raises(DatasetError, match="AA"):
        scan_dataset(tmp_path)


def test_scan_rejects_empty_class(tmp_path):
    _make_tree(tmp_path, 1, "A")
    (tmp_path / "B").mkdir()
    with pytest.raises(DatasetError):
        scan_dataset(tmp_path)


def test_scan_missing_root(tmp_path):
    with pytest.raises(FileNotFoundError):
        scan_dataset(tmp_path / "missing")


def test_scan_empty_root(tmp_path):
    with pytest.raises(DatasetError):
        scan_dataset(tmp_path)


# ------------------------------------------------------------------- split

def test_split_80_20_per_class():
    split = stratified_split(_fake_index([100] * 36), 0.2, seed=0)
    assert len(split.train) == 2880 and len(split.val) == 720
    for c in range(36):
        assert sum(e.label == c for e in split.train) == 80
        assert sum(e.label == c for e in split.val) == 20


def test_split_is_deterministic_and_seed_sensitive():
    index = _fake_index([30] * 5)
    a, b = stratified_split(index, 0.2, 7), stratified_split(index, 0.2, 7)
    c = stratified_split(index, 0.2, 8)
    assert a.train == b.train and a.val == b.val
    assert a.val != c.val


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(2, 40), min_size=1, max_size=8),
       st.floats(0.05, 0.95), st.integers(0, 2**32 - 1))
def test_split_partition_and_stratification(counts, ratio, seed):
    index = _fake_index(counts)
    split = stratified_split(index, ratio, seed)
    train, val = set(split.train), set(split.val)
    assert not train & val
    assert train | val == set(index.entries)
    assert len(split.train) + len(split.val) == len(index)
    for c, n in enumerate(counts):
        n_val = sum(e.label == c for e in split.val)
        assert abs(n_val - ratio * n) <= 1
        assert n_val >= 1 and n_val < n


@pytest.mark.parametrize("ratio", [0.0, 1.0, -0.1, 1.5])
def test_split_rejects_bad_ratio(ratio):
    with pytest.raises(ConfigError):
        stratified_split(_fake_index([5]), ratio)


def test_split_rejects_tiny_class():
    with pytest.raises(DatasetError):
        stratified_split(_fake_index([5, 1]), 0.2)


def test_split_uses_ceil():
    split = stratified_split(_fake_index([11]), 0.2)
    assert len(split.val) == math.ceil(0.2 * 11) == 3


# ---------------------------------------------------------------- synthetic

def test_synth_layout(synth10):
    root, index = synth10
    assert len(index) == 360
    assert index.counts == {i: 10 for i in range(36)}
    assert len(list(root.rglob("*.pgm"))) == 360
    rescanned = scan_dataset(root)
    assert rescanned.entries == index.entries


def test_synth_regeneration_bit_identical(synth10, tmp_path):
    root, _ = synth10
    generate_synthetic_glyphs(10, 4, tmp_path)

    def digest(r):
        h = hashlib.sha256()
        for p in sorted(r.rglob("*.pgm")):
            h.update(str(p.relative_to(r)).encode())
            h.update(p.read_bytes())
        return h.hexdigest()

    assert digest(root) == digest(tmp_path)


def test_synth_seed_changes_output(tmp_path):
    generate_synthetic_glyphs(2, 1, tmp_path / "a")
    generate_synthetic_glyphs(2, 2, tmp_path / "b")
    a = (tmp_path / "a" / "Q" / "Q_00000.pgm").read_bytes()
    b = (tmp_path / "b" / "Q" / "Q_00000.pgm").read_bytes()
    assert a != b


def test_synth_rejects_small_count(tmp_path):
    with pytest.raises(ConfigError):
        generate_synthetic_glyphs(1, 0, tmp_path)


def test_synth_unwritable(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(ImageIOError):
        generate_synthetic_glyphs(2, 0, blocker / "sub")


def test_synth_images_are_binary_canvas(synth10):
    root, _ = synth10
    img = load_gray(root / "M" / "M_00003.pgm")
    assert img.shape == (CANVAS, CANVAS)
    assert set(np.unique(img)) <= {0, 255}


def test_base_glyphs_pairwise_distinct():
    assert set(STROKES) == set(LABELS)
    base = {name: render_glyph(name) > 0 for name in LABELS}
    names = list(LABELS)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            diff = int(np.count_nonzero(base[a] != base[b]))
            assert diff > 300, (a, b, diff)


def test_base_glyphs_single_component():
    for name in LABELS:
        comps = component_sizes(render_glyph(name)[::2, ::2])
        assert len(comps) == 1, name


def test_random_glyph_jitter_stays_on_canvas():
    rng = np.random.default_rng(0)
    for name in "08AMWZ":
        for _ in range(5):
            img = random_glyph(name, rng)
            assert img.shape == (CANVAS, CANVAS)
            assert img.any()
            assert not img[0].any() and not img[-1].any()
            assert not img[:, 0].any() and not img[:, -1].any()


# ------------------------------------------------------------------ batches

def test_batch_shape_range_and_order(synth10):
    _, index = synth10
    entries = index.entries[::11][:32]
    x, y = make_batch(entries)
    assert x.shape == (32, 1, 100, 100) and x.dtype == np.float32
    assert np.all(np.isfinite(x)) and x.min() >= 0.0 and x.max() <= 1.0
    assert list(y) == [e.label for e in entries]
    x1, _ = make_batch(entries[3:4])
    assert np.array_equal(x1[0], x[3])


def test_all_white_with_stages_off_is_all_ones(tmp_path):
    path = tmp_path / "white.pgm"
    save_image(np.full((50, 70), 255, np.uint8), path)
    plane = load_input(path, PipelineConfig(**ALL_OFF))
    assert plane.shape == (100, 100)
    assert np.all(plane == 1.0)


def test_batch_reports_corrupt_file(tmp_path):
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P5\n4 4\n255\n\x00")
    with pytest.raises(ImageIOError, match="bad.pgm"):
        make_batch([Entry(bad, 0)])


def test_batch_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        make_batch([Entry(tmp_path / "gone.pgm", 0)])
