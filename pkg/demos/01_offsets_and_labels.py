"""Polygon offsetting and label generation, end to end on one scene.

Shrinks a text quad by d = area * (1 - r^2) / perimeter, expands it back,
then builds the full label family (shrink, coarse, margin) and prints the
cell counts per class. Saves label images when matplotlib is available.
"""

from pathlib import Path

import numpy as np

from shrinkmask import (
    IGN,
    POS,
    Annotation,
    Polygon,
    SceneSample,
    build_label_set,
    expand_polygon,
    offset_distance,
    polygon_area,
    polygon_iou,
    shrink_polygon,
)

quad = Polygon([(40, 60), (360, 40), (380, 150), (50, 170)])
d = offset_distance(quad, 0.4)
print(f"text quad: area={polygon_area(quad):.0f} px^2, shrink distance d={d:.2f} px")

pieces = shrink_polygon(quad, d)
print(f"shrink -> {len(pieces)} piece(s), area {polygon_area(pieces[0]):.0f} px^2")

back = expand_polygon(pieces[0], d)
print(f"expand(shrink) IoU vs original: {polygon_iou(back, quad):.4f}")

# a second, curved-ish instance plus a dont-care region
arc = Polygon([(60 + 90 * np.cos(t), 330 + 60 * np.sin(t))
               for t in np.linspace(-1.2, 1.2, 9)]
              + [(60 + 55 * np.cos(t), 330 + 35 * np.sin(t))
                 for t in np.linspace(1.2, -1.2, 9)])
dontcare = Polygon([(260, 260), (380, 260), (380, 330), (260, 330)])
scene = SceneSample(420, 420, [
    Annotation(quad, "alpha"),
    Annotation(arc, "beta"),
    Annotation(dontcare, "###", dontcare=True),
])

labels = build_label_set(scene, ratio=0.4)
for name, mask in (("shrink_full", labels.shrink_full), ("shrink_q", labels.shrink_q),
                   ("coarse", labels.coarse), ("margin", labels.margin)):
    pos = int((mask == POS).sum())
    ign = int((mask == IGN).sum())
    print(f"{name:12s} {mask.shape[0]:3d}x{mask.shape[1]:<3d} POS={pos:6d} IGN={ign:6d}")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib not available, skipping figures")
else:
    fig, axes = plt.subplots(1, 4, figsize=(16, 4))
    for ax, (name, mask) in zip(axes, (("shrink full", labels.shrink_full),
                                       ("shrink 1/4", labels.shrink_q),
                                       ("coarse 1/16", labels.coarse),
                                       ("margin 1/4", labels.margin))):
        shown = mask.astype(float)
        shown[mask == IGN] = 0.5  # ignore rendered mid-gray
        ax.imshow(shown, cmap="gray", vmin=0, vmax=1)
        ax.set_title(name)
        ax.axis("off")
    fig.tight_layout()
    out = Path(__file__).with_name("demo01_labels.png")
    fig.savefig(out, dpi=110)
    print(f"wrote {out}")
