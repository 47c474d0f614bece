import math

import numpy as np
import pytest

from gicand.camera_model import project
from gicand.candidates import CandidateSpec, Kind, make_candidates
from gicand.cost_volume import extract_descriptors
from gicand.errors import ConfigurationError
from gicand.rig import Camera, CameraExtrinsics, Rig, equirect_rays, polygon_rig, quat_to_matrix
from gicand.scenes import default_intrinsics
from gicand.sweep import WarpTable, bilinear, build_warp_table, sample_bilinear, sweep_views
from gicand.synth import Scene, Sinusoid, Sphere, render_rig

H = 24
INTR = default_intrinsics(96)


def quat_z_to(r):
    """Quaternion (w, x, y, z) rotating +z onto unit vector r."""
    z = np.array([0.0, 0.0, 1.0])
    axis = np.cross(z, r)
    s = np.linalg.norm(axis)
    ang = math.atan2(s, float(z @ r))
    axis = axis / s if s > 0 else np.array([1.0, 0.0, 0.0])
    return (math.cos(ang / 2), *(math.sin(ang / 2) * axis))


@pytest.fixture(scope="module")
def cset():
    return make_candidates(CandidateSpec(0.5, 100.0, 8, Kind.GI, 0.2))


def test_zero_baseline_optical_axis_hits_principal_point(cset):
    rays = equirect_rays(H, 2 * H)
    r = rays[5, 7]
    cam = Camera("c", INTR, CameraExtrinsics(quat_z_to(r), (0.0, 0.0, 0.0)))
    other = Camera("o", INTR, CameraExtrinsics(translation=(0.3, 0.0, 0.0)))
    t = build_warp_table(Rig((cam, other)), cset, H, 2 * H)
    np.testing.assert_allclose(t.u[0, :, 5, 7], INTR.cx, atol=1e-9)
    np.testing.assert_allclose(t.v[0, :, 5, 7], INTR.cy, atol=1e-9)
    assert t.valid[0, :, 5, 7].all()


def test_zero_baseline_is_candidate_independent(cset):
    rig = Rig((Camera("c", INTR, CameraExtrinsics()),
               Camera("o", INTR, CameraExtrinsics(translation=(0.3, 0.0, 0.0)))))
    t = build_warp_table(rig, cset, H, 2 * H)
    v = t.valid[0]
    assert v.any()
    assert (v == v[:1]).all()
    for k in range(1, len(cset)):
        np.testing.assert_allclose(t.u[0, k][v[k]], t.u[0, 0][v[k]], atol=1e-9)
        np.testing.assert_allclose(t.v[0, k][v[k]], t.v[0, 0][v[k]], atol=1e-9)


def test_matches_direct_projection(cset, rng):
    q = np.array([0.97, 0.1, -0.15, 0.12])
    q /= np.linalg.norm(q)
    rig = Rig((Camera("a", INTR, CameraExtrinsics(tuple(q), (0.2, -0.1, 0.05))),
               Camera("b", INTR, CameraExtrinsics(translation=(-0.2, 0.1, 0.0)))),
              reference=(0.01, 0.02, -0.03))
    t = build_warp_table(rig, cset, H, 2 * H)
    rays = equirect_rays(H, 2 * H)
    R = quat_to_matrix(q)
    checked = 0
    for _ in range(200):
        i, j, k = rng.integers(H), rng.integers(2 * H), rng.integers(len(cset))
        world = np.array(rig.reference) + cset.distances[k] * rays[i, j]
        pc = R.T @ (world - np.array([0.2, -0.1, 0.05]))
        uv, ok = project(pc, INTR)
        if ok and t.valid[0, k, i, j]:
            assert abs(t.u[0, k, i, j] - uv[0]) < 1e-9
            assert abs(t.v[0, k, i, j] - uv[1]) < 1e-9
            checked += 1
    assert checked > 50


def test_behind_camera_invalid(cset):
    rig = Rig((Camera("a", INTR, CameraExtrinsics()),
               Camera("b", INTR, CameraExtrinsics(translation=(0.1, 0, 0)))))
    t = build_warp_table(rig, cset, H, 2 * H)
    # bottom row: rays point almost straight down, behind both upward cameras
    assert not t.valid[:, :, -1].any()


def test_points_at_camera_center_invalid():
    cs = make_candidates(CandidateSpec(0.5, 2.0, 2, Kind.EV))
    rays = equirect_rays(H, 2 * H)
    c = 0.5 * rays[3, 4]
    rig = Rig((Camera("a", INTR, CameraExtrinsics(translation=tuple(c))),
               Camera("b", INTR, CameraExtrinsics(translation=(0.1, 0, 0)))))
    t = build_warp_table(rig, cs, H, 2 * H)
    assert not t.valid[0, 0, 3, 4]


def test_determinism(cset):
    rig = polygon_rig(INTR, 3, 0.3)
    a = build_warp_table(rig, cset, H, 2 * H)
    b = build_warp_table(rig, cset, H, 2 * H)
    assert np.array_equal(a.u, b.u) and np.array_equal(a.v, b.v) and np.array_equal(a.valid, b.valid)


def test_monotone_validity_under_masks(cset, rng):
    rig = polygon_rig(INTR, 3, 0.3)
    m1 = (rng.random((96, 96)) > 0.2).astype(np.uint8)
    m2 = m1 & (rng.random((96, 96)) > 0.3).astype(np.uint8)
    t1 = build_warp_table(rig.with_masks([m1] * 3), cset, H, 2 * H)
    t2 = build_warp_table(rig.with_masks([m2] * 3), cset, H, 2 * H)
    assert not (t2.valid & ~t1.valid).any()
    assert (t1.valid & ~t2.valid).any()


def test_bilinear_neighbors_respect_mask(cset):
    rig = polygon_rig(INTR, 3, 0.3)
    mask = np.ones((96, 96), np.uint8)
    mask[:, 48] = 0
    t = build_warp_table(rig.with_masks([mask] * 3), cset, H, 2 * H)
    u = t.u[t.valid]
    assert not np.any((u > 47.0) & (u < 49.0))


def test_descriptor_stencil_avoids_mask(cset):
    """Gradients at the bilinear neighbours read one more pixel on each side."""
    rig = polygon_rig(INTR, 3, 0.3)
    mask = np.ones((96, 96), np.uint8)
    mask[:, 48] = 0
    t = build_warp_table(rig.with_masks([mask] * 3), cset, H, 2 * H)
    u0 = np.floor(t.u[t.valid])
    touched = (u0 - 1 <= 48) & (u0 + 2 >= 48)
    assert not touched.any()
    assert t.valid.any()


def test_sample_bilinear_basics():
    img = np.array([[0.0, 1.0], [2.0, 3.0]])
    assert sample_bilinear(img, (1, 1)) == 3.0
    assert sample_bilinear(img, (0.5, 0.0)) == 0.5
    assert sample_bilinear(img, (0.5, 0.5)) == 1.5


def test_sample_bilinear_out_of_bounds():
    with pytest.raises(AssertionError):
        sample_bilinear(np.zeros((4, 4)), (3.5, 0.0))


def _bilinear_oracle(img, u, v):
    out = np.zeros(img.shape[2])
    for c in range(img.shape[2]):
        for yy in range(img.shape[0]):
            for xx in range(img.shape[1]):
                wgt = max(0.0, 1 - abs(u - xx)) * max(0.0, 1 - abs(v - yy))
                out[c] += wgt * img[yy, xx, c]
    return out


def test_sample_bilinear_vs_oracle(rng):
    img = rng.random((7, 9, 3))
    for _ in range(50):
        u, v = rng.uniform(0, 8), rng.uniform(0, 6)
        np.testing.assert_allclose(sample_bilinear(img, (u, v)), _bilinear_oracle(img, u, v),
                                   rtol=0, atol=1e-12)
    np.testing.assert_allclose(bilinear(img, np.array([8.0]), np.array([6.0]))[0], img[6, 8])


def test_sweep_constant_image(cset):
    rig = polygon_rig(INTR, 3, 0.3)
    t = build_warp_table(rig, cset, H, 2 * H)
    st = sweep_views([np.full((96, 96, 3), 0.37)] * 3, t)
    assert np.all(st.values[st.valid] == 0.37)


def test_sweep_fully_occluded_camera(cset):
    rig = polygon_rig(INTR, 3, 0.3)
    rig = rig.with_masks([np.zeros((96, 96), np.uint8), None, None])
    st = sweep_views([np.ones((96, 96, 3))] * 3, build_warp_table(rig, cset, H, 2 * H))
    assert not st.valid[0].any()
    assert st.valid[1].any()


def test_sweep_dimension_mismatch(cset):
    rig = polygon_rig(INTR, 3, 0.3)
    t = build_warp_table(rig, cset, H, 2 * H)
    with pytest.raises(ConfigurationError):
        sweep_views([np.ones((96, 96, 3))] * 2, t)
    with pytest.raises(ConfigurationError):
        sweep_views([np.ones((90, 96, 3))] * 3, t)


def test_textured_shell_minimum_at_true_candidate():
    """A textured sphere centred on the reference sits at distance d_k along every ray."""
    intr = default_intrinsics(256)
    rig = polygon_rig(intr, 3, 0.3)
    cs = make_candidates(CandidateSpec(0.5, 100.0, 12, Kind.GI, 0.3 / math.sqrt(3)))
    k = 7
    d = cs.distances[k]
    waves = ((1.0, 0.31, 0.17), (0.23, 0.87, 0.41), (0.37, 0.19, 1.13))
    k_mag = 2 * math.pi / (0.6 * d)
    texture = Sinusoid(tuple(tuple(k_mag * c for c in w) for w in waves))
    scene = Scene((Sphere((0.0, 0.0, 0.0), d, texture),))
    images, _, masks = render_rig(scene, rig)
    h = 48
    t = build_warp_table(rig.with_masks(masks), cs, h, 2 * h)
    st = sweep_views([extract_descriptors(im) for im in images], t)
    v = st.valid.all(axis=(0, 1))
    spread = st.values.var(axis=0).sum(axis=-1)  # (cand, h, w)
    grad = np.abs(st.values[0, k, ..., 1:]).sum(axis=-1)
    strong = v & (grad > np.quantile(grad[v], 0.5))
    assert strong.sum() > 100
    hits = np.argmin(spread, axis=0)[strong] == k
    assert hits.mean() >= 0.9
