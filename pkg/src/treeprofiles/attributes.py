"""Per-node attributes computed incrementally over any tree.

One bottom-up pass accumulates, for every node, the pixel count, spatial
moment sums, gray-level moment sums, gray extrema and the bounding box of
the node's full component (direct pixels plus all descendants).  Gray
statistics always refer to the source image values, so features read from a
pruned tree still describe the original pixels inside each component.

Moments are accumulated in 64-bit integers and the final moment-of-inertia
arithmetic runs on exact Python integers, which avoids the catastrophic
cancellation of the naive float formula.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .hierarchies import Tree
from .imagery import RasterImage


@dataclass
class AttributeTable:
    """Per-node accumulators; arrays are indexed by node id."""

    area: np.ndarray        # int64, pixels
    sum_x: np.ndarray       # int64
    sum_y: np.ndarray
    sum_xx: np.ndarray
    sum_yy: np.ndarray
    gray_sum: np.ndarray
    gray_sum_sq: np.ndarray
    gray_min: np.ndarray
    gray_max: np.ndarray
    bbox: np.ndarray        # int64 (N, 4): xmin, ymin, xmax, ymax

    @property
    def node_count(self) -> int:
        return len(self.area)

    def _check(self, node: int) -> int:
        node = int(node)
        if node < 0 or node >= self.node_count:
            raise DataError(f"node id {node} outside [0, {self.node_count})")
        return node


def compute_attributes(tree: Tree, image: RasterImage) -> AttributeTable:
    """Accumulate all per-node statistics in a single bottom-up pass."""
    if (tree.width, tree.height) != (image.width, image.height):
        raise DataError("tree and image dimensions do not match")
    n = tree.node_count
    flat = image.values.ravel()
    pix = np.arange(tree.width * tree.height, dtype=np.int64)
    xs = pix % tree.width
    ys = pix // tree.width
    node = tree.pixel_node

    def accum(values) -> np.ndarray:
        out = np.zeros(n, dtype=np.int64)
        np.add.at(out, node, values)
        return out

    area = accum(np.ones_like(pix))
    sum_x = accum(xs)
    sum_y = accum(ys)
    sum_xx = accum(xs * xs)
    sum_yy = accum(ys * ys)
    gray_sum = accum(flat)
    gray_sum_sq = accum(flat * flat)

    big = np.iinfo(np.int64).max
    gray_min = np.full(n, big, dtype=np.int64)
    gray_max = np.full(n, -big, dtype=np.int64)
    np.minimum.at(gray_min, node, flat)
    np.maximum.at(gray_max, node, flat)
    xmin = np.full(n, big, dtype=np.int64)
    ymin = np.full(n, big, dtype=np.int64)
    xmax = np.full(n, -big, dtype=np.int64)
    ymax = np.full(n, -big, dtype=np.int64)
    np.minimum.at(xmin, node, xs)
    np.minimum.at(ymin, node, ys)
    np.maximum.at(xmax, node, xs)
    np.maximum.at(ymax, node, ys)

    parent = tree.parent
    for i in range(n - 1, 0, -1):
        p = parent[i]
        area[p] += area[i]
        sum_x[p] += sum_x[i]
        sum_y[p] += sum_y[i]
        sum_xx[p] += sum_xx[i]
        sum_yy[p] += sum_yy[i]
        gray_sum[p] += gray_sum[i]
        gray_sum_sq[p] += gray_sum_sq[i]
        if gray_min[i] < gray_min[p]:
            gray_min[p] = gray_min[i]
        if gray_max[i] > gray_max[p]:
            gray_max[p] = gray_max[i]
        if xmin[i] < xmin[p]:
            xmin[p] = xmin[i]
        if ymin[i] < ymin[p]:
            ymin[p] = ymin[i]
        if xmax[i] > xmax[p]:
            xmax[p] = xmax[i]
        if ymax[i] > ymax[p]:
            ymax[p] = ymax[i]

    return AttributeTable(
        area=area, sum_x=sum_x, sum_y=sum_y, sum_xx=sum_xx, sum_yy=sum_yy,
        gray_sum=gray_sum, gray_sum_sq=gray_sum_sq,
        gray_min=gray_min, gray_max=gray_max,
        bbox=np.stack([xmin, ymin, xmax, ymax], axis=1),
    )


def attr_area(table: AttributeTable, node: int) -> int:
    return int(table.area[table._check(node)])


def attr_moment_of_inertia(table: AttributeTable, node: int) -> float:
    """(mu20 + mu02) / area^2 with exact integer central moments."""
    node = table._check(node)
    a = int(table.area[node])
    sx, sy = int(table.sum_x[node]), int(table.sum_y[node])
    sxx, syy = int(table.sum_xx[node]), int(table.sum_yy[node])
    numerator = a * (sxx + syy) - sx * sx - sy * sy  # exact: area * (mu20+mu02)
    return numerator / float(a) ** 3


def feat_std_dev(table: AttributeTable, node: int) -> float:
    """Population standard deviation of the node's source gray values."""
    node = table._check(node)
    a = int(table.area[node])
    mean = table.gray_sum[node] / a
    var = table.gray_sum_sq[node] / a - mean * mean
    return float(np.sqrt(max(var, 0.0)))


def moment_of_inertia_all(table: AttributeTable) -> np.ndarray:
    """Vectorized moment of inertia for every node (float arithmetic)."""
    a = table.area.astype(np.float64)
    num = a * (table.sum_xx + table.sum_yy).astype(np.float64)
    num -= table.sum_x.astype(np.float64) ** 2
    num -= table.sum_y.astype(np.float64) ** 2
    return num / a**3


def std_dev_all(table: AttributeTable) -> np.ndarray:
    """Vectorized population standard deviation for every node."""
    a = table.area.astype(np.float64)
    mean = table.gray_sum / a
    var = table.gray_sum_sq / a - mean * mean
    return np.sqrt(np.maximum(var, 0.0))


def dump_attributes(tree: Tree, table: AttributeTable) -> str:
    """Plain-text dump, one node per line: ``id area inertia stddev``."""
    inertia = moment_of_inertia_all(table)
    stddev = std_dev_all(table)
    lines = [
        f"{i} {table.area[i]} {inertia[i]:.12g} {stddev[i]:.12g}"
        for i in range(tree.node_count)
    ]
    return "\n".join(lines) + "\n"
