"""Render a handful of hand-placed 2D Gaussians and inspect the output.

Each Gaussian contributes color * exp(-sigma) to every pixel, where sigma is
the half Mahalanobis distance between the pixel center and the Gaussian
center.  Colors are "weighted": opacity is folded in, so values are free to
be negative or larger than one, and contributions simply sum.
"""

import numpy as np

import lig

cloud = lig.GaussianCloud(
    mu=[[32.0, 32.0], [16.0, 48.0], [50.0, 14.0]],
    cov=[[40.0, 0.0, 40.0],     # big isotropic blob
         [12.0, 8.0, 12.0],     # tilted ellipse
         [4.0, 0.0, 25.0]],     # tall and narrow
    color=[[0.9, 0.2, 0.1], [0.1, 0.6, 0.9], [-0.3, 0.4, -0.1]],
)

img = lig.render(cloud, 64, 64)
print("render range:", img.min(), "to", img.max())  # unclamped by design

# the naive per-pixel oracle computes the same sum without tiling
oracle = lig.naive_render(cloud, 64, 64)
print("max deviation from naive oracle:", np.abs(img - oracle).max())

lig.save_image(img, "demo_render.png")  # clamped + quantized only on export
print("wrote demo_render.png")
