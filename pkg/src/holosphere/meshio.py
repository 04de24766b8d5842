"""Mesh and table output for grid scans.

A grid scan becomes a quad mesh: one vertex per valid grid point, one
quad per grid cell whose four corners are all valid.  Faces reference
only valid vertices.  Writers emit OBJ (3-component projection), CSV
(full coordinates plus residuals) and optionally PLY with a per-vertex
scalar attribute.  Floats are serialized with shortest round-trip
formatting so identical inputs produce byte-identical files.
"""

from dataclasses import dataclass, field

import numpy as np


def _fmt(x):
    """Shortest round-trip decimal for a float."""
    return repr(float(x))


@dataclass
class MeshOutput:
    """Vertices (full coordinates), quad connectivity over the grid, and
    per-vertex scalar attributes."""

    vertices: np.ndarray         # (M, dim) float
    faces: list                  # quads, 0-based indices into vertices
    grid_shape: tuple
    valid: np.ndarray            # (R, C) bool
    attributes: dict = field(default_factory=dict)

    def component_triple(self, components):
        """Columns for a 1-based component triple."""
        dim = self.vertices.shape[1]
        for c in components:
            if not 1 <= c <= dim:
                raise ValueError(f"component {c} out of range 1..{dim}")
        idx = [c - 1 for c in components]
        return self.vertices[:, idx]


def mesh_from_grid(valid, coords, attributes=None):
    """Build a quad mesh from a (R, C) validity mask and (R, C, dim)
    coordinates.  Invalid points are dropped and indices remapped."""
    R, C = valid.shape
    index = -np.ones((R, C), dtype=int)
    verts = []
    for r in range(R):
        for c in range(C):
            if valid[r, c]:
                index[r, c] = len(verts)
                verts.append(coords[r, c])
    faces = []
    for r in range(R - 1):
        for c in range(C - 1):
            ids = (index[r, c], index[r, c + 1],
                   index[r + 1, c + 1], index[r + 1, c])
            if all(i >= 0 for i in ids):
                faces.append(ids)
    attrs = {}
    if attributes:
        mask = valid.ravel()
        for name, grid_vals in attributes.items():
            attrs[name] = np.asarray(grid_vals).ravel()[mask]
    return MeshOutput(
        vertices=np.array(verts) if verts else np.zeros((0, coords.shape[2])),
        faces=faces,
        grid_shape=(R, C),
        valid=valid,
        attributes=attrs,
    )


def write_obj(mesh, path, components=(1, 2, 3)):
    """OBJ with the chosen 1-based coordinate triple and quad faces."""
    pts = mesh.component_triple(components)
    lines = []
    for p in pts:
        lines.append(f"v {_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])}")
    for f in mesh.faces:
        lines.append("f " + " ".join(str(i + 1) for i in f))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_ply(mesh, path, components=(1, 2, 3), attribute=None):
    """ASCII PLY with an optional per-vertex scalar attribute."""
    pts = mesh.component_triple(components)
    attr = mesh.attributes.get(attribute) if attribute else None
    header = [
        "ply",
        "format ascii 1.0",
        f"element vertex {len(pts)}",
        "property double x",
        "property double y",
        "property double z",
    ]
    if attr is not None:
        header.append(f"property double {attribute}")
    header += [
        f"element face {len(mesh.faces)}",
        "property list uchar int vertex_indices",
        "end_header",
    ]
    lines = list(header)
    for i, p in enumerate(pts):
        row = f"{_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])}"
        if attr is not None:
            row += f" {_fmt(attr[i])}"
        lines.append(row)
    for f in mesh.faces:
        lines.append("4 " + " ".join(str(i) for i in f))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_surface_csv(scan, path, records=None):
    """One row per grid point (row-major): the point, validity flags, the
    full surface coordinates, and any per-point residuals.

    `records` maps complex grid points to {family: residual} dicts (from
    a diagnostics report); families are united across points and written
    as res_<family> columns, blank where unavailable.
    """
    R, C, dim = scan.surface.shape
    families = []
    if records:
        seen = set()
        for res in records.values():
            for fam, val in res.items():
                if val is not None and fam not in seen:
                    seen.add(fam)
        families = sorted(seen)
    header = ["z_re", "z_im", "inside", "valid", "singular"]
    header += [f"g_{k + 1}" for k in range(dim)]
    header += [f"res_{fam}" for fam in families]
    lines = [",".join(header)]
    for r in range(R):
        for c in range(C):
            z = scan.zs[r, c]
            row = [
                _fmt(z.real),
                _fmt(z.imag),
                str(int(scan.inside[r, c])),
                str(int(scan.valid[r, c])),
                str(int(scan.singular[r, c])),
            ]
            if scan.valid[r, c]:
                row += [_fmt(v) for v in scan.surface[r, c]]
            else:
                row += [""] * dim
            if families:
                res = records.get(complex(z), {}) if records else {}
                for fam in families:
                    val = res.get(fam)
                    row.append(_fmt(val) if val is not None else "")
            lines.append(",".join(row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
