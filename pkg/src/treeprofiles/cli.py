"""Command-line front end: profiles, classification and comparison tables.

Commands
--------
profile    build profile stacks for an image and write them to disk
classify   train a random forest on profile features and report OA / kappa
compare    attribute-profile vs feature-profile table over tree families
tree-dump  plain-text dump of a single tree

Grayscale inputs are PGM files; a ``.json`` input is treated as the sidecar
header of a raw BSQ multiband image, which is PCA-reduced (``--pca``) and
quantized (``--levels``) before tree construction.  An optional ``--config``
file holds ``key = value`` pairs using the long flag names; explicit flags
win over the file.  All randomness flows from ``--seed``.

Exit codes: 0 success, 2 input error, 3 data/semantic error, 4 internal
error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .attributes import compute_attributes, dump_attributes
from .classifier import evaluate, predict, train_forest
from .errors import DataError, FormatError
from .hierarchies import (
    Connectivity,
    build_max_tree,
    build_min_tree,
    dump_tree,
)
from .imagery import (
    LabelMap,
    RasterImage,
    load_grayscale,
    load_labels,
    load_multiband,
    pca_reduce,
    rescale_to_levels,
)
from .inclusion import build_tree_of_shapes
from .partition import build_alpha_tree, build_omega_tree
from .profiles import (
    Attribute,
    Feature,
    FilterSpec,
    ProfileStack,
    ProfileTrees,
    build_ap,
    build_fp,
    default_area_thresholds,
    default_moment_thresholds,
    tree_bundle,
)

_CONFIG_TYPES = {
    "image": str, "train": str, "test": str, "out": str, "mode": str,
    "connectivity": str, "area_thresholds": str, "moment_thresholds": str,
    "pca": int, "levels": int, "rf_trees": int, "seed": int,
    "tree": str, "attr": str, "feature": str, "profile": str,
}


def _read_config(path: str) -> dict:
    values: dict = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"{path}:{lineno}: expected key = value")
        key, _, raw = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _CONFIG_TYPES:
            raise FormatError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _CONFIG_TYPES[key](raw.strip())
    return values


def _csv_list(value) -> list[str]:
    """Flatten repeatable/comma-separated flag values."""
    if value is None:
        return []
    out: list[str] = []
    for item in value if isinstance(value, list) else [value]:
        out.extend(p.strip() for p in str(item).split(",") if p.strip())
    return out


def _parse_thresholds(text: str | None) -> tuple[float, ...] | None:
    if not text:
        return None
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise DataError(f"bad threshold list {text!r}") from None


def _add_common(p: argparse.ArgumentParser, labels: bool) -> None:
    p.add_argument("--config", help="key = value config file; flags win")
    p.add_argument("--image", required=False, help="input PGM or BSQ .json header")
    if labels:
        p.add_argument("--train", help="training label PGM (0 = unlabeled)")
        p.add_argument("--test", help="test label PGM (0 = unlabeled)")
    p.add_argument("--tree", action="append",
                   help="tree family: component|tos|alpha|omega (repeatable)")
    p.add_argument("--attr", action="append",
                   help="filter attribute: area|moment (repeatable)")
    p.add_argument("--feature", action="append",
                   help="profile feature: stddev|area (repeatable)")
    p.add_argument("--area-thresholds", dest="area_thresholds",
                   help="comma list of area thresholds")
    p.add_argument("--moment-thresholds", dest="moment_thresholds",
                   help="comma list of moment-of-inertia thresholds")
    p.add_argument("--pca", type=int, default=4,
                   help="PCA components for multiband input (default 4)")
    p.add_argument("--levels", type=int, default=256,
                   help="quantization levels for PCA components (default 256)")
    p.add_argument("--connectivity", default="c4", choices=["c4", "c8"])
    p.add_argument("--rf-trees", dest="rf_trees", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".", help="output directory")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treeprof",
        description="Tree-based attribute and feature profiles for raster images",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="build and save profile stacks")
    _add_common(p, labels=False)
    p.add_argument("--mode", default="both", choices=["ap", "fp", "both"])

    p = sub.add_parser("classify", help="train and evaluate a random forest")
    _add_common(p, labels=True)
    p.add_argument("--mode", default="fp", choices=["ap", "fp", "both", "raw"])
    p.add_argument("--profile", help="use a saved profile stack instead of building")

    p = sub.add_parser("compare", help="AP vs FP comparison table")
    _add_common(p, labels=True)
    p.add_argument("--mode", default="both", choices=["both"],
                   help=argparse.SUPPRESS)

    p = sub.add_parser("tree-dump", help="dump one tree as text")
    p.add_argument("--config", help="key = value config file; flags win")
    p.add_argument("--image", required=False)
    p.add_argument("--tree", action="append",
                   help="tree kind: max|min|tos|alpha|omega")
    p.add_argument("--connectivity", default="c4", choices=["c4", "c8"])
    p.add_argument("--attributes", action="store_true",
                   help="dump 'id area inertia stddev' instead of structure")
    p.add_argument("--out", help="output file (default stdout)")

    return parser


def _require(args, name: str) -> str:
    value = getattr(args, name, None)
    if not value:
        raise DataError(f"--{name} is required for this command")
    return value


def _load_bands(args) -> list[RasterImage]:
    """Input image as a list of single-band integer rasters."""
    path = Path(_require(args, "image"))
    if path.suffix == ".json":
        multi = load_multiband(path)
        reduced = pca_reduce(multi, args.pca)
        return [rescale_to_levels(reduced, b, args.levels)
                for b in range(reduced.bands)]
    return [load_grayscale(path)]


def _specs_for(args, band: RasterImage, attrs: list[str]) -> list[FilterSpec]:
    specs = []
    for attr in attrs:
        attribute = Attribute(attr)
        if attribute is Attribute.AREA:
            thresholds = _parse_thresholds(args.area_thresholds) or \
                default_area_thresholds(band.width * band.height)
        else:
            thresholds = _parse_thresholds(args.moment_thresholds) or \
                default_moment_thresholds()
        specs.append(FilterSpec(attribute=attribute, thresholds=thresholds))
    return specs


class _StackCache:
    """Builds profile stacks lazily, sharing trees across modes/attributes."""

    def __init__(self, bands: list[RasterImage], args):
        self.bands = bands
        self.args = args
        self.bundles: dict = {}
        self.stacks: dict = {}

    def bundle(self, band_i: int, kind: str):
        key = (band_i, kind)
        if key not in self.bundles:
            self.bundles[key] = tree_bundle(
                self.bands[band_i], ProfileTrees(kind),
                Connectivity(self.args.connectivity),
            )
        return self.bundles[key]

    def stack(self, kind: str, mode: str, attrs: tuple[str, ...],
              features: tuple[str, ...]) -> ProfileStack:
        key = (kind, mode, attrs, features)
        if key in self.stacks:
            return self.stacks[key]
        per_band = []
        for band_i, band in enumerate(self.bands):
            bundle = self.bundle(band_i, kind)
            for spec in _specs_for(self.args, band, list(attrs)):
                if mode == "ap":
                    per_band.append(build_ap(band, kind, spec, bundle=bundle))
                else:
                    per_band.append(build_fp(
                        band, kind, spec, [Feature(f) for f in features],
                        bundle=bundle,
                    ))
        result = ProfileStack.concat(per_band)
        self.stacks[key] = result
        return result


def _labels_for(args, bands: list[RasterImage]) -> tuple[LabelMap, LabelMap]:
    dims = (bands[0].width, bands[0].height)
    train = load_labels(_require(args, "train"), dims)
    test = load_labels(_require(args, "test"), dims)
    return train, test


def _fit_eval(matrix: np.ndarray, train: LabelMap, test: LabelMap,
              n_trees: int, seed: int):
    train_idx, train_y = train.samples()
    test_idx, test_y = test.samples()
    if len(train_idx) == 0:
        raise DataError("no labeled training pixels")
    if len(test_idx) == 0:
        raise DataError("no labeled test pixels")
    model = train_forest(matrix[train_idx], train_y, n_trees=n_trees, seed=seed)
    pred = predict(model, matrix[test_idx])
    confusion, oa, kappa = evaluate(pred, test_y)
    return model, confusion, oa, kappa


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_profile(args) -> int:
    bands = _load_bands(args)
    attrs = tuple(_csv_list(args.attr) or ["area", "moment"])
    features = tuple(_csv_list(args.feature) or ["stddev", "area"])
    kinds = _csv_list(args.tree) or ["component"]
    modes = ["ap", "fp"] if args.mode == "both" else [args.mode]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cache = _StackCache(bands, args)
    stem = Path(args.image).stem
    for kind in kinds:
        for mode in modes:
            stack = cache.stack(kind, mode, attrs, features)
            target = out / f"{stem}_{kind}_{mode}"
            stack.save(target)
            print(f"{kind} {mode}: dim {stack.dim} -> {target}.json/.raw")
    return 0


def _report_dict(confusion, oa, kappa, dim, n_train, n_test, args) -> dict:
    counts = confusion.counts
    per_class = {}
    for c in range(counts.shape[0]):
        row = counts[c].sum()
        if row:
            per_class[str(c + 1)] = round(float(counts[c, c] / row), 6)
    return {
        "oa": round(float(oa), 6),
        "kappa": round(float(kappa), 6),
        "per_class_accuracy": per_class,
        "confusion": counts.tolist(),
        "dim": int(dim),
        "n_train": int(n_train),
        "n_test": int(n_test),
        "seed": int(args.seed),
        "rf_trees": int(args.rf_trees),
        "mode": args.mode,
    }


def cmd_classify(args) -> int:
    started = time.perf_counter()
    bands = _load_bands(args)
    train, test = _labels_for(args, bands)
    if args.profile:
        stack = ProfileStack.load(Path(args.profile))
        matrix = stack.data
    elif args.mode == "raw":
        matrix = np.stack([b.values.ravel().astype(np.float64) for b in bands],
                          axis=1)
    else:
        attrs = tuple(_csv_list(args.attr) or ["area", "moment"])
        features = tuple(_csv_list(args.feature) or ["stddev", "area"])
        kinds = _csv_list(args.tree) or ["component"]
        modes = ["ap", "fp"] if args.mode == "both" else [args.mode]
        cache = _StackCache(bands, args)
        matrix = np.concatenate(
            [cache.stack(kind, mode, attrs, features).data
             for kind in kinds for mode in modes], axis=1,
        )
    _, confusion, oa, kappa = _fit_eval(matrix, train, test,
                                        args.rf_trees, args.seed)
    elapsed = time.perf_counter() - started

    report = _report_dict(confusion, oa, kappa, matrix.shape[1],
                          len(train.samples()[0]), len(test.samples()[0]), args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, sort_keys=True, indent=2))
    lines = [
        f"overall accuracy : {oa * 100:.2f} %",
        f"kappa            : {kappa:.4f}",
        f"feature dim      : {matrix.shape[1]}",
        f"train / test px  : {report['n_train']} / {report['n_test']}",
    ] + [
        f"class {c} accuracy : {v * 100:.2f} %"
        for c, v in sorted(report["per_class_accuracy"].items())
    ]
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    print(f"runtime          : {elapsed:.2f} s", file=sys.stderr)
    return 0


_COMPARE_ATTR_SETS = (("area",), ("moment",), ("area", "moment"))
_COMPARE_HEADERS = ("area", "moment", "both")


def cmd_compare(args) -> int:
    started = time.perf_counter()
    bands = _load_bands(args)
    train, test = _labels_for(args, bands)
    features = tuple(_csv_list(args.feature) or ["stddev", "area"])
    kinds = _csv_list(args.tree) or ["component", "tos", "alpha", "omega"]
    cache = _StackCache(bands, args)

    rows = []
    for kind in kinds:
        for mode in ("ap", "fp"):
            cells = {}
            for header, attrs in zip(_COMPARE_HEADERS, _COMPARE_ATTR_SETS):
                stack = cache.stack(kind, mode, attrs, features)
                _, _, oa, kappa = _fit_eval(stack.data, train, test,
                                            args.rf_trees, args.seed)
                cells[header] = {"oa": round(float(oa), 6),
                                 "kappa": round(float(kappa), 6)}
            rows.append({"method": f"{kind}-{mode}", **cells})

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    csv_lines = ["method," + ",".join(
        f"{h}_oa,{h}_kappa" for h in _COMPARE_HEADERS)]
    for row in rows:
        cells = []
        for h in _COMPARE_HEADERS:
            cells.append(f"{row[h]['oa']:.6f}")
            cells.append(f"{row[h]['kappa']:.6f}")
        csv_lines.append(row["method"] + "," + ",".join(cells))
    (out / "compare.csv").write_text("\n".join(csv_lines) + "\n")

    name_w = max(len(r["method"]) for r in rows)
    txt_lines = [
        f"{'method':<{name_w}} | " + " | ".join(
            f"{h + ' OA':>9} {'kappa':>7}" for h in _COMPARE_HEADERS)
    ]
    for row in rows:
        cells = " | ".join(
            f"{row[h]['oa'] * 100:>9.2f} {row[h]['kappa']:>7.4f}"
            for h in _COMPARE_HEADERS
        )
        txt_lines.append(f"{row['method']:<{name_w}} | {cells}")
    table = "\n".join(txt_lines) + "\n"
    (out / "compare.txt").write_text(table)
    (out / "compare.json").write_text(
        json.dumps({"rows": rows}, sort_keys=True, indent=2)
    )
    print(table, end="")
    print(f"runtime: {time.perf_counter() - started:.2f} s", file=sys.stderr)
    return 0


def cmd_tree_dump(args) -> int:
    image = load_grayscale(_require(args, "image"))
    kinds = _csv_list(args.tree) or ["max"]
    if len(kinds) != 1:
        raise DataError("tree-dump takes exactly one tree kind")
    kind = kinds[0]
    conn = Connectivity(args.connectivity)
    if kind == "max":
        tree = build_max_tree(image, conn)
    elif kind == "min":
        tree = build_min_tree(image, conn)
    elif kind == "tos":
        tree = build_tree_of_shapes(image)
    elif kind == "alpha":
        tree = build_alpha_tree(image, conn)
    elif kind == "omega":
        tree = build_omega_tree(build_alpha_tree(image, conn), image)
    else:
        raise DataError(f"unknown tree kind {kind!r}")
    if args.attributes:
        text = dump_attributes(tree, compute_attributes(tree, image))
    else:
        text = dump_tree(tree)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

_COMMANDS = {
    "profile": cmd_profile,
    "classify": cmd_classify,
    "compare": cmd_compare,
    "tree-dump": cmd_tree_dump,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    given = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(given)
    try:
        if args.config:
            # config fills in whatever was not passed explicitly on the line
            for key, value in _read_config(args.config).items():
                flag = "--" + key.replace("_", "-")
                if flag in given or not hasattr(args, key):
                    continue
                if key in ("tree", "attr", "feature"):
                    value = _csv_list(value)
                setattr(args, key, value)
        return _COMMANDS[args.command](args)
    except (FileNotFoundError, IsADirectoryError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # internal invariant violation
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
