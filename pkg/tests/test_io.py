import struct

import numpy as np
import pytest

from gicand.errors import ConfigurationError
from gicand.io import (load_rig, pfm_bytes, read_mask, read_pfm, read_png, save_rig, write_mask,
                       write_pfm, write_png)
from gicand.scenes import default_intrinsics, square_rig, training_rig


def test_pfm_roundtrip(tmp_path, rng):
    a = rng.uniform(0, 100, (7, 11)).astype(np.float32)
    a[0, 0] = np.finfo(np.float32).max
    write_pfm(tmp_path / "a.pfm", a)
    np.testing.assert_array_equal(read_pfm(tmp_path / "a.pfm"), a)


def test_pfm_layout():
    """Little-endian Pf header and bottom-up row order, decoded by hand."""
    a = np.arange(6, dtype=np.float32).reshape(2, 3)
    raw = pfm_bytes(a)
    lines = raw.split(b"\n", 3)
    assert lines[:3] == [b"Pf", b"3 2", b"-1.0"]
    vals = struct.unpack("<6f", lines[3])
    assert vals == (3.0, 4.0, 5.0, 0.0, 1.0, 2.0)


def test_read_pfm_big_endian_and_color(tmp_path):
    a = np.arange(12, dtype=np.float32).reshape(2, 2, 3)
    body = np.flipud(a).astype(">f4").tobytes()
    (tmp_path / "c.pfm").write_bytes(b"PF\n2 2\n1.0\n" + body)
    np.testing.assert_array_equal(read_pfm(tmp_path / "c.pfm"), a)


def test_pfm_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        read_pfm(tmp_path / "missing.pfm")
    (tmp_path / "x.pfm").write_bytes(b"P6\n1 1\n255\n\0\0\0")
    with pytest.raises(ConfigurationError):
        read_pfm(tmp_path / "x.pfm")
    with pytest.raises(ConfigurationError):
        write_pfm(tmp_path / "y.pfm", np.zeros((2, 2, 3)))


def test_png_and_mask_roundtrip(tmp_path, rng):
    img = rng.integers(0, 256, (9, 13, 3), dtype=np.uint8)
    write_png(tmp_path / "i.png", img)
    np.testing.assert_array_equal(read_png(tmp_path / "i.png"), img)
    m = (rng.random((9, 13)) > 0.5).astype(np.uint8)
    write_mask(tmp_path / "m.png", m)
    assert set(np.unique(read_png(tmp_path / "m.png"))) <= {0, 255}
    np.testing.assert_array_equal(read_mask(tmp_path / "m.png"), m)


def test_no_temp_files_left(tmp_path):
    write_pfm(tmp_path / "a.pfm", np.zeros((2, 2)))
    assert [p.name for p in tmp_path.iterdir()] == ["a.pfm"]


@pytest.mark.parametrize("make", [training_rig, square_rig])
def test_rig_json_roundtrip(tmp_path, make):
    rig = make()
    save_rig(tmp_path / "rig.json", rig)
    back = load_rig(tmp_path / "rig.json")
    assert back.digest() == rig.digest()
    assert back.reference == rig.reference


def test_rig_json_masks_relative(tmp_path):
    rig = training_rig(default_intrinsics(64))
    sub = tmp_path / "r"
    masks = []
    for i, c in enumerate(rig.cameras):
        m = np.ones((64, 64), np.uint8)
        m[i, :] = 0
        write_mask(sub / f"{c.name}_mask.png", m)
        masks.append(f"{c.name}_mask.png")
    save_rig(sub / "rig.json", rig, masks)
    back = load_rig(sub / "rig.json")
    for i, c in enumerate(back.cameras):
        assert c.mask is not None and c.mask[i].sum() == 0 and c.mask.sum() == 64 * 63


def test_load_rig_missing(tmp_path):
    with pytest.raises(ConfigurationError, match="missing.json"):
        load_rig(tmp_path / "missing.json")
