"""
Extending a function off a Lagrangian without new extrema
=========================================================

Values on a mesh are pushed into a thin tube by h(x) (1 - |v|^2) times a
cutoff in the normal offset v.  Away from the mesh |H| only decreases, so
the ambient extrema are exactly the mesh extrema.
"""

# %%
import numpy as np

from hoferlab import extend, lagr
from hoferlab.geom import Euclidean

grid = lagr.ModelGrid.circle(512)
theta = grid.params[:, 0]
mesh = lagr.LagrangianMesh(Euclidean(1), grid, np.column_stack([np.cos(theta), np.sin(theta)]))
values, shift = extend.normalize_for_extension(np.cos(theta) + 0.3 * np.sin(3 * theta))
print("shift applied:", shift)

# %%
bump = extend.BumpProfile(0.2)
ext = extend.tubular_extension(mesh, values, bump)
print("tube radius:", bump.radius, " mesh separation:", lagr.mesh_separation(mesh))
print("restriction error:", np.abs(ext(mesh.images) - values).max())

# %%
cloud = extend.tube_cloud(mesh, bump, 100_000, seed=1)
check = extend.extension_extrema_check(ext, cloud)
print(f"cloud max {check.cloud_max:.6f}  mesh max {check.mesh_max:.6f}")
print(f"cloud min {check.cloud_min:.6f}  mesh min {check.mesh_min:.6f}")
print("argmax/argmin margins:", check.max_margin, check.min_margin, " ok:", check.ok)

# %%
# Along a normal ray the extension decays to zero at the tube boundary.
node = int(np.argmax(values))
for r in np.linspace(0, 1.1 * bump.radius, 6):
    p = mesh.images[node] * (1 + r)
    print(f"r = {r:.3f}  H = {ext(p)[0]:.5f}")
