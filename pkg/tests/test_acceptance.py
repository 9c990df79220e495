"""Acceptance suite: one test per criterion, one printed PASS line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines live.
The optional dataset-driven check (A8) is skipped unless the environment
points at user-supplied data (see its docstring).
"""

import json
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from treeprofiles import (
    Attribute,
    Feature,
    FilterRule,
    FilterSpec,
    ProfileTrees,
    build_alpha_tree,
    build_ap,
    build_fp,
    build_max_tree,
    build_min_tree,
    build_omega_tree,
    build_tree_of_shapes,
    compute_attributes,
    default_area_thresholds,
    default_moment_thresholds,
    evaluate,
    filter_tree,
    load_labels,
    load_multiband,
    model_to_bytes,
    partition_at,
    predict,
    reconstruct,
    save_labels,
    save_pgm,
    split_labels,
    synthetic_scene,
    train_forest,
    tree_bundle,
)
from treeprofiles.attributes import attr_moment_of_inertia, std_dev_all
from treeprofiles.imagery import RasterImage

from conftest import random_image
from oracles import (
    alpha_partition,
    area_opening,
    component_tree_nodes,
    stats_from_pixels,
    tree_component_pixels,
    tree_of_shapes_shapes,
    two_pass_std,
)


def report(criterion: str, detail: str) -> None:
    print(f"[ACCEPT] {criterion} PASS  {detail}")


def node_sets(tree):
    comps = tree_component_pixels(tree)
    w = tree.width
    return {
        (float(tree.level[i]),
         frozenset((p // w, p % w) for p in comps[i]))
        for i in range(tree.node_count)
    }


def test_a1_max_tree_oracle():
    """A1: canonical node sets and area openings match flood fill, < 30 s."""
    rng = np.random.default_rng(101)
    started = time.perf_counter()
    checked = 0
    for _ in range(200):
        img = random_image(rng, 16, 8)
        for conn in ("c4", "c8"):
            tree = build_max_tree(img, conn)
            got = {(int(l), c) for l, c in node_sets(tree)}
            assert got == component_tree_nodes(img.values, conn, upper=True)
            table = compute_attributes(tree, img)
            lam = int(rng.integers(2, 10))
            mask = filter_tree(tree, table, Attribute.AREA, lam, FilterRule.MIN)
            assert np.array_equal(
                reconstruct(tree, mask).values,
                area_opening(img.values, lam, conn),
            )
            checked += 1
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0, f"A1 took {elapsed:.1f} s"
    report("A1", f"{checked} tree/oracle comparisons in {elapsed:.1f} s")


def test_a2_tree_of_shapes_oracle():
    """A2: shape sets equal the saturation oracle; self-duality holds."""
    rng = np.random.default_rng(102)
    for _ in range(100):
        img = random_image(rng, 12, 6)
        shapes = node_sets(build_tree_of_shapes(img))
        assert shapes == tree_of_shapes_shapes(img.values)
        flipped = node_sets(build_tree_of_shapes(img.complement()))
        assert shapes == {(img.levels - 1 - l, c) for l, c in flipped}
    report("A2", "100 images: oracle equality and self-duality exact")


def test_a3_alpha_omega_oracles():
    """A3: alpha cuts equal threshold flood fill; omega ranges bracketed."""
    rng = np.random.default_rng(103)
    for _ in range(100):
        img = random_image(rng, 10, 6)
        alpha = build_alpha_tree(img)
        for a in range(img.levels):
            labels = partition_at(alpha, a)
            parts = {}
            for p, lab in enumerate(labels.ravel()):
                parts.setdefault(int(lab), set()).add(
                    (p // img.width, p % img.width))
            assert {frozenset(s) for s in parts.values()} == \
                set(alpha_partition(img.values, a))
        omega = build_omega_tree(alpha, img)
        comps = tree_component_pixels(omega)
        flat = img.values.ravel()
        for i in range(omega.node_count):
            grays = flat[np.asarray(comps[i], dtype=int)]
            assert grays.max() - grays.min() <= omega.level[i]
            if i > 0:
                pg = flat[np.asarray(comps[omega.parent[i]], dtype=int)]
                assert pg.max() - pg.min() > omega.level[i]
    report("A3", "100 images: every alpha cut exact, omega ranges bracketed")


def test_a4_attribute_oracle():
    """A4: incremental attributes match subtree-walk recomputation."""
    rng = np.random.default_rng(104)
    builders = [
        lambda im: build_max_tree(im),
        lambda im: build_min_tree(im),
        build_tree_of_shapes,
        lambda im: build_alpha_tree(im),
        lambda im: build_omega_tree(build_alpha_tree(im), im),
    ]
    trees_checked = 0
    while trees_checked < 200:
        img = random_image(rng, 12, 8)
        for build in builders:
            tree = build(img)
            table = compute_attributes(tree, img)
            comps = tree_component_pixels(tree)
            flat = img.values.ravel()
            stds = std_dev_all(table)
            for i in range(tree.node_count):
                ref = stats_from_pixels(comps[i], img.width, flat)
                assert table.area[i] == ref["area"]
                assert table.sum_x[i] == ref["sum_x"]
                assert table.sum_y[i] == ref["sum_y"]
                assert table.sum_xx[i] == ref["sum_xx"]
                assert table.sum_yy[i] == ref["sum_yy"]
                assert table.gray_sum[i] == ref["gray_sum"]
                assert table.gray_sum_sq[i] == ref["gray_sum_sq"]
                assert table.gray_min[i] == ref["gray_min"]
                assert table.gray_max[i] == ref["gray_max"]
                assert tuple(table.bbox[i]) == ref["bbox"]
                ref_std = two_pass_std([int(flat[p]) for p in comps[i]])
                assert stds[i] == pytest.approx(ref_std, rel=1e-9, abs=1e-12)
            trees_checked += 1

    # frozen hand values
    img = RasterImage(np.array([[1, 1, 0]]), levels=2)
    table = compute_attributes(build_max_tree(img), img)
    domino = int(np.argwhere(table.area == 2)[0, 0])
    assert attr_moment_of_inertia(table, domino) == 0.125
    img = RasterImage(np.array([[1, 1, 1, 0]]), levels=2)
    table = compute_attributes(build_max_tree(img), img)
    seg = int(np.argwhere(table.area == 3)[0, 0])
    assert attr_moment_of_inertia(table, seg) == pytest.approx(2.0 / 9.0,
                                                               abs=1e-15)
    report("A4", f"{trees_checked} trees recomputed exactly; "
                 "domino I=0.125 and 3x1 I=2/9 confirmed")


def test_a5_profile_dimensions():
    """A5: profile dimensions across the full configuration matrix."""
    rng = np.random.default_rng(105)
    img = random_image(rng, 10, 8, min_side=6)
    k = 4
    features = [Feature.STD_DEV, Feature.AREA]
    checked = 0
    for kind in ProfileTrees:
        for attribute in Attribute:
            thresholds = tuple(2.0 + i for i in range(k)) \
                if attribute is Attribute.AREA \
                else tuple(0.1 * (i + 1) for i in range(k))
            spec = FilterSpec(attribute, thresholds)
            per_tree = 2 * k + 1 if kind is ProfileTrees.COMPONENT_PAIR \
                else k + 1
            ap = build_ap(img, kind, spec)
            assert ap.dim == per_tree == len(ap.layout)
            fp = build_fp(img, kind, spec, features)
            assert fp.dim == len(features) * per_tree == len(fp.layout)
            checked += 2
    assert checked == 16
    report("A5", "16 configurations: 2K+1 / K+1 and F-fold stacking exact")


def test_a6_metrics():
    """A6: hand confusion matrix values; kappa <= OA on random matrices."""
    pred = np.array([1] * 40 + [2] * 10 + [1] * 20 + [2] * 30)
    truth = np.array([1] * 50 + [2] * 50)
    confusion, oa, kappa = evaluate(pred, truth)
    assert confusion.counts.tolist() == [[40, 10], [20, 30]]
    assert abs(oa - 0.70) < 1e-12
    assert abs(kappa - 0.40) < 1e-12
    rng = np.random.default_rng(106)
    for _ in range(1000):
        c = int(rng.integers(2, 7))
        n = int(rng.integers(1, 400))
        pred = rng.integers(1, c + 1, size=n)
        truth = rng.integers(1, c + 1, size=n)
        _, oa, kappa = evaluate(pred, truth)
        assert kappa <= oa + 1e-12
    report("A6", "confusion [[40,10],[20,30]] -> OA 0.70, kappa 0.40; "
                 "kappa <= OA on 1000 random matrices")


def _synthetic_experiment():
    img, labels = synthetic_scene(128, 128, seed=42)
    train, test = split_labels(labels, 0.10, seed=42)
    train_idx, train_y = train.samples()
    test_idx, test_y = test.samples()
    area_spec = FilterSpec(
        Attribute.AREA, default_area_thresholds(img.width * img.height))
    moment_spec = FilterSpec(Attribute.MOMENT, default_moment_thresholds())
    bundle = tree_bundle(img, ProfileTrees.COMPONENT_PAIR)

    def fit(matrix):
        model = train_forest(matrix[train_idx], train_y, n_trees=100, seed=42)
        pred = predict(model, matrix[test_idx])
        _, oa, kappa = evaluate(pred, test_y)
        return model, pred, oa, kappa

    raw = img.values.ravel().astype(np.float64)[:, None]
    _, pred_raw, oa_raw, _ = fit(raw)
    fp = np.concatenate([
        build_fp(img, ProfileTrees.COMPONENT_PAIR, spec,
                 [Feature.STD_DEV, Feature.AREA], bundle=bundle).data
        for spec in (area_spec, moment_spec)
    ], axis=1)
    model_fp, pred_fp, oa_fp, kappa_fp = fit(fp)
    ap = np.concatenate([
        build_ap(img, ProfileTrees.COMPONENT_PAIR, spec, bundle=bundle).data
        for spec in (area_spec, moment_spec)
    ], axis=1)
    _, pred_ap, oa_ap, _ = fit(ap)
    fingerprint = (
        model_to_bytes(model_fp)
        + pred_raw.tobytes() + pred_fp.tobytes() + pred_ap.tobytes()
        + json.dumps([oa_raw, oa_fp, oa_ap, kappa_fp]).encode()
    )
    return oa_raw, oa_fp, oa_ap, fingerprint


def test_a7_synthetic_end_to_end():
    """A7: profiles beat raw gray by the stated margins, reproducibly, < 60 s."""
    started = time.perf_counter()
    oa_raw, oa_fp, oa_ap, fp1 = _synthetic_experiment()
    _, _, _, fp2 = _synthetic_experiment()
    elapsed = time.perf_counter() - started
    assert oa_fp - oa_raw >= 0.10, \
        f"FP OA {oa_fp:.4f} vs raw {oa_raw:.4f}: margin below 10 points"
    assert oa_ap - oa_raw >= 0.05, \
        f"AP OA {oa_ap:.4f} vs raw {oa_raw:.4f}: margin below 5 points"
    assert fp1 == fp2, "two invocations produced different bits"
    assert elapsed < 60.0, f"A7 took {elapsed:.1f} s"
    report("A7", f"raw {oa_raw * 100:.1f} / AP {oa_ap * 100:.1f} / "
                 f"FP {oa_fp * 100:.1f} OA; bit-identical reruns; "
                 f"{elapsed:.1f} s")


def test_a8_optional_hyperspectral_benchmark():
    """A8 (optional): component-tree feature profiles on the user-supplied
    Pavia University scene land within 3 OA points of 96.5.

    Set PAVIA_IMAGE (BSQ .json header), PAVIA_TRAIN and PAVIA_TEST (PGM
    label maps) to enable.
    """
    paths = [os.environ.get(k) for k in
             ("PAVIA_IMAGE", "PAVIA_TRAIN", "PAVIA_TEST")]
    if not all(paths):
        pytest.skip("[ACCEPT] A8 SKIP  set PAVIA_IMAGE/PAVIA_TRAIN/PAVIA_TEST "
                    "to run the dataset-driven check")
    cube = load_multiband(paths[0])
    reduced_bands = 4
    from treeprofiles import build_extended
    spec = FilterSpec(Attribute.AREA,
                      default_area_thresholds(cube.width * cube.height))
    stack = build_extended(cube, reduced_bands, ProfileTrees.COMPONENT_PAIR,
                           spec, features=[Feature.STD_DEV, Feature.AREA],
                           mode="fp")
    train = load_labels(paths[1], (cube.width, cube.height))
    test = load_labels(paths[2], (cube.width, cube.height))
    train_idx, train_y = train.samples()
    test_idx, test_y = test.samples()
    model = train_forest(stack.data[train_idx], train_y, n_trees=100, seed=42)
    _, oa, _ = evaluate(predict(model, stack.data[test_idx]), test_y)
    assert abs(oa * 100 - 96.5) <= 3.0, f"OA {oa * 100:.1f} outside 96.5 +/- 3"
    report("A8", f"dataset OA {oa * 100:.1f} within 96.5 +/- 3.0")


def test_a9_compare_determinism(tmp_path):
    """A9: a fixed-seed compare run emits byte-identical CSV/JSON."""
    img, labels = synthetic_scene(40, 40, seed=11, levels=32)
    train, test = split_labels(labels, 0.2, seed=11)
    save_pgm(img, tmp_path / "scene.pgm")
    save_labels(train, tmp_path / "train.pgm")
    save_labels(test, tmp_path / "test.pgm")
    artifacts = []
    for run in ("one", "two"):
        out_dir = tmp_path / run
        proc = subprocess.run(
            [sys.executable, "-m", "treeprofiles", "compare",
             "--image", str(tmp_path / "scene.pgm"),
             "--train", str(tmp_path / "train.pgm"),
             "--test", str(tmp_path / "test.pgm"),
             "--tree", "component,tos,alpha,omega",
             "--seed", "42", "--rf-trees", "40", "--out", str(out_dir)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        artifacts.append(tuple(
            (out_dir / name).read_bytes()
            for name in ("compare.csv", "compare.json", "compare.txt")
        ))
    assert artifacts[0] == artifacts[1]
    rows = json.loads(artifacts[0][1].decode())["rows"]
    assert len(rows) == 8
    report("A9", "full compare run: CSV/JSON/TXT byte-identical across reruns")
