"""Model serialization and the command-line surface, end to end.

Model files are a flat little-endian layout (magic "LIG1"): header, then per
level the render resolution, point count and float32 parameter arrays, then
the two residual-normalization bounds.  Decoding validates every declared
size against the file length before touching an array.
"""

import subprocess
import tempfile
from pathlib import Path

import numpy as np

import lig

tmp = Path(tempfile.mkdtemp())
png = tmp / "target.png"

rng = np.random.default_rng(1)
yy, xx = np.mgrid[0:48, 0:48] / 48.0
lig.save_image(np.stack([xx, 1 - yy, xx * yy], axis=-1), png)

run = lambda *args: subprocess.run(["lig", *args], capture_output=True, text=True)

fit = run("fit", str(png), "-o", str(tmp / "m.lig"), "--points", "128",
          "--iters", "300", "--seed", "7", "--deterministic")
print("fit output:")
print(fit.stdout)

print("info output:")
print(run("info", str(tmp / "m.lig")).stdout)

print("eval output:")
print(run("eval", str(tmp / "m.lig"), str(png)).stdout)

# the same model loads in-process, bit for bit
model = lig.load_model(tmp / "m.lig")
assert lig.modelio.encode_model(model) == (tmp / "m.lig").read_bytes()
print("in-process re-encode is byte-identical")
