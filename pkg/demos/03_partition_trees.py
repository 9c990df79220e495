"""Partition trees: the alpha-tree and its range-constrained omega-tree.

Both hierarchies stack partitions of the image rather than nested object
components.  The alpha-tree groups pixels reachable through adjacent steps
of dissimilarity <= alpha (quasi-flat zones).  Because long chains of small
steps can silently bridge a large contrast, the omega-tree re-indexes the
same components by their global gray range.
"""

import numpy as np

from treeprofiles import (
    build_alpha_tree,
    build_omega_tree,
    edge_list,
    partition_at,
)
from treeprofiles.imagery import RasterImage

# A gentle horizontal ramp next to a flat block: the ramp climbs by 1 per
# column, so at alpha=1 the whole ramp fuses despite spanning 6 gray levels.
values = np.array([
    [0, 1, 2, 3, 4, 5, 6, 9, 9],
    [0, 1, 2, 3, 4, 5, 6, 9, 9],
    [0, 1, 2, 3, 4, 5, 6, 9, 9],
])
image = RasterImage(values, levels=10)
print("input image (ramp + block):")
print(values)

edges = edge_list(image, "c4")
print(f"\n{len(edges)} 4-adjacent edges, weight = |gray difference|")

# 1. The alpha-tree: cutting it at increasing alpha yields coarser and
#    coarser partitions, each refining the next.
tree = build_alpha_tree(image, "c4")
for alpha in (0, 1, 3):
    labels = partition_at(tree, alpha)
    print(f"\nalpha = {alpha}: {len(np.unique(labels))} zones")
    print(labels)

# 2. Chaining effect: at alpha=1 the ramp is one zone with range 6.  The
#    omega-tree keeps the same components but levels them by global range,
#    so a range bound of 2 splits the ramp back apart.
omega = build_omega_tree(tree, image)
print("\nomega-tree node (level=range, area) pairs:")
from treeprofiles import node_areas
print(sorted(zip(omega.level.astype(int).tolist(),
                 node_areas(omega).tolist())))
labels = partition_at(omega, 2)
print(f"\nomega cut at range <= 2: {len(np.unique(labels))} zones")
print(labels)
