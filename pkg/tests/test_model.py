import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from islr.data import LABELS
from islr.diagnostics import REDUCED_MODEL, reduced_model_check
from islr.errors import (
    BadMagicError, CheckpointError, ConfigError, ShapeError, TensorMismatchError,
    TruncatedCheckpointError, UnsupportedVersionError,
)
from islr.model import (
    IslCnnConfig, Model, build_isl_cnn, forward_classify, load_checkpoint, save_checkpoint,
)
from islr.nn import Conv2D, Dense, Flatten, ReLU, Softmax, infer_shapes

SMALL = IslCnnConfig(input_size=12, block1_filters=3, block2_filters=4, hidden_units=8)


@pytest.fixture(scope="module")
def full_model():
    return build_isl_cnn(seed=0)


@pytest.fixture
def small_ckpt(tmp_path):
    model = build_isl_cnn(SMALL, seed=1)
    path = tmp_path / "m.ckpt"
    save_checkpoint(model, LABELS, path)
    return model, path


# ------------------------------------------------------------ architecture

def test_default_architecture_shapes():
    cfg = IslCnnConfig()
    shapes = infer_shapes(cfg.layers(), cfg.input_shape)
    assert shapes[0] == (1, 100, 100)
    assert (64, 25, 25) in shapes
    assert (40000,) in shapes
    assert shapes[-1] == (36,)


def test_default_param_count_from_layer_arithmetic(full_model):
    conv1 = 32 * 1 * 3 * 3 + 32
    assert conv1 == 320
    conv2 = 32 * 32 * 9 + 32
    conv3 = 64 * 32 * 9 + 64
    conv4 = 64 * 64 * 9 + 64
    dense1 = 40000 * 512 + 512
    dense2 = 512 * 36 + 36
    expected = conv1 + conv2 + conv3 + conv4 + dense1 + dense2
    assert full_model.param_count() == expected
    assert sum(p.value.size for p in full_model.params()) == expected
    assert full_model.named_params()[0][1].value.size + full_model.named_params()[1][1].value.size == 320


def test_forward_yields_36_probabilities(full_model):
    x = np.random.default_rng(0).uniform(0, 1, (1, 100, 100)).astype(np.float32)
    probs, top = forward_classify(full_model, x)
    assert probs.shape == (36,)
    assert abs(float(probs.sum()) - 1.0) < 1e-6
    assert 0 <= top < 36 and top == int(np.argmax(probs))


def test_forward_zero_input_is_finite(full_model):
    probs, _ = forward_classify(full_model, np.zeros((1, 100, 100), np.float32))
    assert np.all(np.isfinite(probs))
    assert abs(float(probs.sum()) - 1.0) < 1e-6


def test_forward_is_pure(full_model):
    x = np.random.default_rng(1).uniform(0, 1, (1, 100, 100)).astype(np.float32)
    a, _ = forward_classify(full_model, x)
    b, _ = forward_classify(full_model, x)
    assert np.array_equal(a, b)


def test_forward_shape_mismatch(full_model):
    with pytest.raises(ShapeError):
        forward_classify(full_model, np.zeros((1, 99, 100), np.float32))
    with pytest.raises(ShapeError):
        full_model.logits(np.zeros((2, 1, 100, 101), np.float32))


def test_too_few_classes_rejected():
    with pytest.raises(ConfigError):
        IslCnnConfig(num_classes=1)


def test_config_from_dict_rejects_unknown():
    assert IslCnnConfig.from_dict({"hidden_units": 7}).hidden_units == 7
    with pytest.raises(ConfigError):
        IslCnnConfig.from_dict({"hiden_units": 7})


def test_model_output_must_be_flat():
    with pytest.raises(ShapeError):
        Model([Conv2D(2)], (1, 4, 4))


def test_same_seed_same_parameters():
    a, b = build_isl_cnn(SMALL, seed=5), build_isl_cnn(SMALL, seed=5)
    c = build_isl_cnn(SMALL, seed=6)
    assert all(np.array_equal(p.value, q.value) for p, q in zip(a.params(), b.params()))
    assert not all(np.array_equal(p.value, q.value) for p, q in zip(a.params(), c.params()))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_probabilities_sum_to_one(seed):
    model = build_isl_cnn(SMALL, seed=3)
    x = np.random.default_rng(seed).uniform(0, 1, (3,) + SMALL.input_shape).astype(np.float32)
    probs = model.predict_proba(x)
    assert probs.shape == (3, 36)
    assert np.all(np.isfinite(probs)) and np.all(probs >= 0)
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-6)


def test_predict_proba_chunking_matches():
    model = build_isl_cnn(SMALL, seed=3)
    x = np.random.default_rng(2).uniform(0, 1, (7,) + SMALL.input_shape).astype(np.float32)
    # BLAS blocking may differ with batch size, so agreement is to rounding only
    assert np.allclose(model.predict_proba(x, batch_size=3), model.predict_proba(x, 7),
                       rtol=1e-5, atol=1e-7)


def test_model_without_softmax_tail():
    model = Model([Flatten(), Dense(3), ReLU(), Dense(2)], (1, 2, 2))
    assert not model.ends_with_softmax
    probs = model.predict_proba(np.ones((1, 1, 2, 2), np.float32))
    assert np.allclose(probs.sum(), 1.0)


def test_end_to_end_gradcheck_reduced_model():
    assert REDUCED_MODEL.input_shape == (1, 20, 20)
    report = reduced_model_check(1e-4, seed=0)
    assert report.passed, report.errors
    assert set(report.errors) >= {"input", "0.weight", "12.weight", "14.bias"}


# ------------------------------------------------------------ checkpoints

def test_checkpoint_round_trip_bit_exact(small_ckpt):
    model, path = small_ckpt
    loaded, labels = load_checkpoint(path)
    assert labels == list(LABELS)
    assert loaded.layer_configs == model.layer_configs
    assert loaded.input_shape == model.input_shape
    for (na, a), (nb, b) in zip(model.named_params(), loaded.named_params()):
        assert na == nb
        assert a.value.tobytes() == b.value.tobytes()
    x = np.random.default_rng(0).uniform(0, 1, SMALL.input_shape).astype(np.float32)
    pa, ta = forward_classify(model, x)
    pb, tb = forward_classify(loaded, x)
    assert pa.tobytes() == pb.tobytes() and ta == tb


def test_checkpoint_save_is_deterministic(small_ckpt, tmp_path):
    model, path = small_ckpt
    again = tmp_path / "again.ckpt"
    save_checkpoint(model, LABELS, again)
    assert again.read_bytes() == path.read_bytes()


def test_checkpoint_preserves_label_order(tmp_path):
    model = Model([Flatten(), Dense(3), Softmax()], (1, 2, 2))
    path = tmp_path / "m.ckpt"
    save_checkpoint(model, ["zeta", "alpha", "é"], path)
    assert load_checkpoint(path)[1] == ["zeta", "alpha", "é"]


def test_checkpoint_header_layout(small_ckpt):
    _, path = small_ckpt
    data = path.read_bytes()
    assert data[:6] == b"ISLCNN"
    assert data[6] == 1
    (n,) = struct.unpack("<I", data[7:11])
    assert data[11:11 + n].startswith(b"{")


def test_bad_magic(small_ckpt):
    _, path = small_ckpt
    data = bytearray(path.read_bytes())
    data[0:6] = b"XXXXXX"
    path.write_bytes(bytes(data))
    with pytest.raises(BadMagicError):
        load_checkpoint(path)


def test_unsupported_version(small_ckpt):
    _, path = small_ckpt
    data = bytearray(path.read_bytes())
    data[6] = 99
    path.write_bytes(bytes(data))
    with pytest.raises(UnsupportedVersionError):
        load_checkpoint(path)


@pytest.mark.parametrize("keep", [3, 8, 40, -1])
def test_truncated(small_ckpt, keep):
    _, path = small_ckpt
    data = path.read_bytes()
    path.write_bytes(data[:keep])
    with pytest.raises(CheckpointError) as info:
        load_checkpoint(path)
    if keep > 6 or keep < 0:
        assert isinstance(info.value, TruncatedCheckpointError)


def test_trailing_bytes_rejected(small_ckpt):
    _, path = small_ckpt
    path.write_bytes(path.read_bytes() + b"\0")
    with pytest.raises(TensorMismatchError):
        load_checkpoint(path)


def _rewrite_config(path, new_cfg: IslCnnConfig):
    """Swap the config echo for another architecture while keeping the tensors."""
    import json
    from islr.nn import config_to_dict
    data = path.read_bytes()
    (n,) = struct.unpack("<I", data[7:11])
    echo = json.dumps({"input_shape": list(new_cfg.input_shape),
                       "layers": [config_to_dict(c) for c in new_cfg.layers()]},
                      sort_keys=True).encode()
    path.write_bytes(data[:7] + struct.pack("<I", len(echo)) + echo + data[11 + n:])


def test_shape_mismatch(small_ckpt):
    _, path = small_ckpt
    _rewrite_config(path, IslCnnConfig(input_size=12, block1_filters=3, block2_filters=4,
                                       hidden_units=9))
    with pytest.raises(TensorMismatchError, match="shape"):
        load_checkpoint(path)


def test_tensor_count_mismatch(tmp_path):
    path = tmp_path / "m.ckpt"
    save_checkpoint(Model([Flatten(), Dense(2, use_bias=False)], (1, 2, 2)), ["a", "b"], path)
    data = path.read_bytes()
    from islr.nn import config_to_dict
    import json
    (n,) = struct.unpack("<I", data[7:11])
    echo = json.dumps({"input_shape": [1, 2, 2],
                       "layers": [config_to_dict(Flatten()), config_to_dict(Dense(2))]},
                      sort_keys=True).encode()
    path.write_bytes(data[:7] + struct.pack("<I", len(echo)) + echo + data[11 + n:])
    with pytest.raises(TensorMismatchError, match="tensors"):
        load_checkpoint(path)


def test_missing_checkpoint_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_checkpoint(tmp_path / "nope.ckpt")
