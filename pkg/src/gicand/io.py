"""File formats: PFM float maps, 8-bit PNG images and masks, rig JSON."""
from __future__ import annotations

import json
import os
from pathlib import Path
import tempfile

import numpy as np
from PIL import Image

from .camera_model import CameraIntrinsics
from .errors import ConfigurationError
from .rig import Camera, CameraExtrinsics, Rig


def _atomic_write(path, data: bytes):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix="." + path.name + ".")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def pfm_bytes(data: np.ndarray) -> bytes:
    a = np.asarray(data, dtype=np.float32)
    if a.ndim != 2:
        raise ConfigurationError(f"PFM writer handles single-channel maps, got shape {a.shape}")
    h, w = a.shape
    header = f"Pf\n{w} {h}\n-1.0\n".encode("ascii")
    # rows are stored bottom-up
    return header + np.flipud(a).astype("<f4").tobytes()


def write_pfm(path, data: np.ndarray):
    _atomic_write(path, pfm_bytes(data))


def read_pfm(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"file not found: {path}")
    with open(path, "rb") as f:
        ident = f.readline().strip()
        if ident == b"PF":
            channels = 3
        elif ident == b"Pf":
            channels = 1
        else:
            raise ConfigurationError(f"{path}: not a PFM file")
        w, h = (int(x) for x in f.readline().split())
        scale = float(f.readline())
        dtype = "<f4" if scale < 0 else ">f4"
        raw = np.frombuffer(f.read(), dtype=dtype, count=w * h * channels)
    shape = (h, w, 3) if channels == 3 else (h, w)
    return np.flipud(raw.reshape(shape)).astype(np.float32)


def write_png(path, image: np.ndarray):
    import io as _io

    buf = _io.BytesIO()
    Image.fromarray(np.asarray(image, dtype=np.uint8)).save(buf, format="PNG")
    _atomic_write(path, buf.getvalue())


def read_png(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"file not found: {path}")
    with Image.open(path) as im:
        return np.asarray(im)


def write_mask(path, mask: np.ndarray):
    """Masks are stored as 255 = valid, 0 = occluded / outside the FoV."""
    write_png(path, np.where(np.asarray(mask) > 0, 255, 0).astype(np.uint8))


def read_mask(path) -> np.ndarray:
    m = read_png(path)
    if m.ndim == 3:
        m = m[..., 0]
    return (m > 127).astype(np.uint8)


def write_json(path, obj):
    _atomic_write(path, (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode())


def rig_from_dict(d: dict, base_dir=None) -> Rig:
    cams = []
    for c in d["cameras"]:
        intr = CameraIntrinsics.from_dict(c["intrinsics"])
        e = c.get("extrinsics", {})
        extr = CameraExtrinsics(tuple(e.get("q", (1.0, 0.0, 0.0, 0.0))), tuple(e.get("t", (0.0, 0.0, 0.0))))
        mask = None
        if c.get("mask"):
            mp = Path(c["mask"])
            if base_dir is not None and not mp.is_absolute():
                mp = Path(base_dir) / mp
            mask = read_mask(mp)
        cams.append(Camera(c["name"], intr, extr, mask))
    return Rig(tuple(cams), tuple(d.get("reference", (0.0, 0.0, 0.0))))


def load_rig(path) -> Rig:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"rig file not found: {path}")
    with open(path) as f:
        return rig_from_dict(json.load(f), base_dir=path.parent)


def save_rig(path, rig: Rig, mask_paths=None):
    d = rig.to_dict()
    if mask_paths:
        for cam, mp in zip(d["cameras"], mask_paths):
            if mp is not None:
                cam["mask"] = str(mp)
    write_json(path, d)
