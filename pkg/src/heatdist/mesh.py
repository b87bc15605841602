"""Triangle mesh representation, OBJ/PLY loading and procedural generators.

The mesh is stored index-based (vertex array + face array); adjacency needed
by the distance pipeline (unique edges, vertex->face incidence, boundary
flags) is derived once at construction and the mesh is immutable afterwards.
"""

from __future__ import annotations

import struct
from functools import cached_property

import numpy as np

DEGENERATE_AREA_FACTOR = 1e-14  # relative to squared bounding-box diameter


class MeshError(Exception):
    """Base class for mesh loading/validation problems."""


class MeshFormatError(MeshError):
    """Raised when a mesh file cannot be parsed."""


class MeshValidationError(MeshError):
    """Raised when parsed geometry violates a mesh invariant."""


class TriangleMesh:
    """Immutable triangle mesh with derived edge/boundary topology.

    Parameters
    ----------
    positions : (V, 3) float array
        Vertex coordinates.
    faces : (F, 3) int array
        Counter-clockwise vertex index triples.
    """

    def __init__(self, positions, faces):
        positions = np.ascontiguousarray(positions, dtype=np.float64)
        faces = np.ascontiguousarray(faces, dtype=np.int64)
        if positions.ndim != 2 or positions.shape[1] != 3:
            raise MeshValidationError("positions must be (V, 3)")
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise MeshValidationError("faces must be (F, 3)")
        if not np.isfinite(positions).all():
            raise MeshValidationError("non-finite vertex coordinate")

        nv = positions.shape[0]
        if faces.size:
            if faces.min() < 0 or faces.max() >= nv:
                bad = int(np.nonzero((faces < 0) | (faces >= nv))[0][0])
                raise MeshValidationError(
                    f"face {bad}: vertex index out of range (V={nv})"
                )
            repeated = (
                (faces[:, 0] == faces[:, 1])
                | (faces[:, 1] == faces[:, 2])
                | (faces[:, 0] == faces[:, 2])
            )
            if repeated.any():
                bad = int(np.nonzero(repeated)[0][0])
                raise MeshValidationError(f"degenerate face {bad}: repeated vertex index")

        self.positions = positions
        self.faces = faces
        self.positions.setflags(write=False)
        self.faces.setflags(write=False)

        self._validate_areas()
        self._build_edges()

    # -- derived topology ---------------------------------------------------

    def _validate_areas(self):
        if self.num_faces == 0:
            return
        diam2 = self.bounding_diameter() ** 2
        bad = np.nonzero(self.face_areas <= DEGENERATE_AREA_FACTOR * diam2)[0]
        if bad.size:
            raise MeshValidationError(
                f"degenerate face {int(bad[0])}: area below threshold"
            )

    def _build_edges(self):
        f = self.faces
        halfedges = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        und = np.sort(halfedges, axis=1)
        edges, counts = np.unique(und, axis=0, return_counts=True)
        if counts.size and counts.max() > 2:
            bad = edges[np.argmax(counts)]
            raise MeshValidationError(
                f"non-manifold edge ({int(bad[0])}, {int(bad[1])}) "
                f"shared by {int(counts.max())} faces"
            )
        self.edges = edges
        self.edges.setflags(write=False)
        boundary_edges = edges[counts == 1]
        flags = np.zeros(self.num_vertices, dtype=bool)
        flags[boundary_edges.ravel()] = True
        self.boundary_vertex = flags
        self.boundary_vertex.setflags(write=False)

    @property
    def num_vertices(self) -> int:
        return self.positions.shape[0]

    @property
    def num_faces(self) -> int:
        return self.faces.shape[0]

    @property
    def num_edges(self) -> int:
        return self.edges.shape[0]

    @cached_property
    def vertex_faces(self):
        """List of arrays: faces incident on each vertex."""
        order = np.argsort(self.faces.ravel(), kind="stable")
        face_of_entry = np.repeat(np.arange(self.num_faces), 3)[order]
        counts = np.bincount(self.faces.ravel(), minlength=self.num_vertices)
        return np.split(face_of_entry, np.cumsum(counts)[:-1])

    # -- geometry ------------------------------------------------------------

    @cached_property
    def face_corner_edges(self):
        """(F, 3, 3) edge vectors; entry [f, i] is the edge opposite corner i,
        oriented counter-clockwise."""
        p = self.positions[self.faces]  # (F, 3, 3)
        e = np.empty_like(p)
        e[:, 0] = p[:, 2] - p[:, 1]
        e[:, 1] = p[:, 0] - p[:, 2]
        e[:, 2] = p[:, 1] - p[:, 0]
        return e

    @cached_property
    def _face_cross(self):
        e = self.face_corner_edges
        return np.cross(e[:, 1], e[:, 2])

    @cached_property
    def face_areas(self):
        return 0.5 * np.linalg.norm(self._face_cross, axis=1)

    @cached_property
    def face_normals(self):
        area2 = np.linalg.norm(self._face_cross, axis=1)
        return self._face_cross / area2[:, None]

    @cached_property
    def face_cotans(self):
        """(F, 3) cotangent of each interior corner angle.

        Computed per corner as dot/|cross| of the two emanating edges, which
        stays finite on slivers until the face area itself degenerates.
        """
        e = self.face_corner_edges
        cot = np.empty((self.num_faces, 3))
        area2 = 2.0 * self.face_areas  # |cross| of any corner pair
        for i in range(3):
            a = -e[:, (i + 1) % 3]
            b = e[:, (i + 2) % 3]
            cot[:, i] = np.einsum("ij,ij->i", a, b) / area2
        return cot

    def face_geometry(self, f: int):
        """Per-face area, unit normal, CCW edge vectors and corner cotans."""
        if not 0 <= f < self.num_faces:
            raise IndexError(f"face index {f} out of range")
        return (
            float(self.face_areas[f]),
            self.face_normals[f].copy(),
            self.face_corner_edges[f].copy(),
            self.face_cotans[f].copy(),
        )

    def mean_edge_length(self) -> float:
        if self.num_edges == 0:
            raise MeshValidationError("mesh has no edges")
        vecs = self.positions[self.edges[:, 0]] - self.positions[self.edges[:, 1]]
        return float(np.mean(np.linalg.norm(vecs, axis=1)))

    def bounding_diameter(self) -> float:
        """Diagonal of the axis-aligned bounding box."""
        if self.num_vertices == 0:
            return 0.0
        return float(np.linalg.norm(self.positions.max(0) - self.positions.min(0)))

    def euclidean_diameter(self) -> float:
        """Max pairwise vertex distance (exact up to ~30k vertices)."""
        p = self.positions
        if self.num_vertices > 30000:
            return self.bounding_diameter()
        best = 0.0
        chunk = 2000
        for lo in range(0, p.shape[0], chunk):
            d = np.linalg.norm(p[lo : lo + chunk, None, :] - p[None, :, :], axis=2)
            best = max(best, float(d.max()))
        return best

    @cached_property
    def is_connected(self) -> bool:
        if self.num_vertices <= 1:
            return True
        # union-find over the unique edge list
        parent = np.arange(self.num_vertices)

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for a, b in self.edges:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
        root = find(0)
        return all(find(i) == root for i in range(self.num_vertices))

    def euler_characteristic(self) -> int:
        return self.num_vertices - self.num_edges + self.num_faces

    def scaled(self, s: float) -> "TriangleMesh":
        return TriangleMesh(self.positions * s, self.faces)


# -- file I/O -----------------------------------------------------------------


def _fan_triangulate(poly):
    return [(poly[0], poly[i], poly[i + 1]) for i in range(1, len(poly) - 1)]


def _load_obj(path) -> TriangleMesh:
    positions = []
    faces = []
    with open(path, "r", errors="replace") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            tag = parts[0]
            if tag == "v":
                if len(parts) < 4:
                    raise MeshFormatError(f"{path}:{lineno}: short vertex line")
                try:
                    positions.append([float(x) for x in parts[1:4]])
                except ValueError as exc:
                    raise MeshFormatError(f"{path}:{lineno}: {exc}") from None
            elif tag == "f":
                if len(parts) < 4:
                    raise MeshFormatError(f"{path}:{lineno}: face with <3 vertices")
                idx = []
                for tok in parts[1:]:
                    head = tok.split("/")[0]
                    try:
                        i = int(head)
                    except ValueError:
                        raise MeshFormatError(
                            f"{path}:{lineno}: bad face index {tok!r}"
                        ) from None
                    if i == 0:
                        raise MeshFormatError(f"{path}:{lineno}: zero face index")
                    # OBJ indices are 1-based; negative counts from the end
                    idx.append(i - 1 if i > 0 else len(positions) + i)
                faces.extend(_fan_triangulate(idx))
            # vt/vn/usemtl/etc. carry no geometry for distance computation
    try:
        return TriangleMesh(np.array(positions).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3))
    except MeshValidationError as exc:
        raise MeshValidationError(f"{path}: {exc}") from None


_PLY_TYPES = {
    "char": ("b", 1), "int8": ("b", 1),
    "uchar": ("B", 1), "uint8": ("B", 1),
    "short": ("h", 2), "int16": ("h", 2),
    "ushort": ("H", 2), "uint16": ("H", 2),
    "int": ("i", 4), "int32": ("i", 4),
    "uint": ("I", 4), "uint32": ("I", 4),
    "float": ("f", 4), "float32": ("f", 4),
    "double": ("d", 8), "float64": ("d", 8),
}


def _load_ply(path) -> TriangleMesh:
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic != b"ply":
            raise MeshFormatError(f"{path}: missing 'ply' magic")
        fmt = None
        elements = []  # (name, count, [properties])
        while True:
            raw = fh.readline()
            if not raw:
                raise MeshFormatError(f"{path}: unterminated header")
            line = raw.decode("ascii", errors="replace").strip()
            if not line or line.startswith("comment") or line.startswith("obj_info"):
                continue
            parts = line.split()
            if parts[0] == "format":
                fmt = parts[1]
                if fmt not in ("ascii", "binary_little_endian"):
                    raise MeshFormatError(f"{path}: unsupported format {fmt}")
            elif parts[0] == "element":
                elements.append((parts[1], int(parts[2]), []))
            elif parts[0] == "property":
                if not elements:
                    raise MeshFormatError(f"{path}: property before element")
                if parts[1] == "list":
                    elements[-1][2].append(("list", parts[2], parts[3], parts[4]))
                else:
                    elements[-1][2].append(("scalar", parts[1], parts[2]))
            elif parts[0] == "end_header":
                break
            else:
                raise MeshFormatError(f"{path}: unknown header line {line!r}")
        if fmt is None:
            raise MeshFormatError(f"{path}: no format line")

        positions = None
        faces = []
        for name, count, props in elements:
            if fmt == "ascii":
                rows = _ply_read_ascii(fh, path, name, count, props)
            else:
                rows = _ply_read_binary(fh, path, name, count, props)
            if name == "vertex":
                cols = [p[2] for p in props if p[0] == "scalar"]
                try:
                    ix, iy, iz = cols.index("x"), cols.index("y"), cols.index("z")
                except ValueError:
                    raise MeshFormatError(f"{path}: vertex element lacks x/y/z") from None
                positions = np.array(
                    [[r[ix], r[iy], r[iz]] for r in rows], dtype=np.float64
                )
            elif name == "face":
                for i, row in enumerate(rows):
                    poly = row[-1]
                    if len(poly) < 3:
                        raise MeshFormatError(f"{path}: face {i} has <3 vertices")
                    faces.extend(_fan_triangulate([int(v) for v in poly]))
        if positions is None:
            raise MeshFormatError(f"{path}: no vertex element")
    try:
        return TriangleMesh(positions, np.array(faces, dtype=np.int64).reshape(-1, 3))
    except MeshValidationError as exc:
        raise MeshValidationError(f"{path}: {exc}") from None


def _ply_read_ascii(fh, path, name, count, props):
    rows = []
    for i in range(count):
        raw = fh.readline()
        if not raw:
            raise MeshFormatError(f"{path}: truncated element {name} at row {i}")
        toks = raw.decode("ascii", errors="replace").split()
        row, k = [], 0
        for p in props:
            if p[0] == "scalar":
                row.append(float(toks[k]))
                k += 1
            else:
                n = int(toks[k])
                row.append([float(x) for x in toks[k + 1 : k + 1 + n]])
                k += 1 + n
        rows.append(row)
    return rows


def _ply_read_binary(fh, path, name, count, props):
    rows = []
    for i in range(count):
        row = []
        for p in props:
            if p[0] == "scalar":
                code, size = _PLY_TYPES[p[1]]
                buf = fh.read(size)
                if len(buf) != size:
                    raise MeshFormatError(f"{path}: truncated element {name} row {i}")
                row.append(struct.unpack("<" + code, buf)[0])
            else:
                ccode, csize = _PLY_TYPES[p[1]]
                icode, isize = _PLY_TYPES[p[2]]
                buf = fh.read(csize)
                if len(buf) != csize:
                    raise MeshFormatError(f"{path}: truncated element {name} row {i}")
                n = struct.unpack("<" + ccode, buf)[0]
                buf = fh.read(isize * n)
                if len(buf) != isize * n:
                    raise MeshFormatError(f"{path}: truncated list in {name} row {i}")
                row.append(list(struct.unpack("<" + icode * n, buf)))
        rows.append(row)
    return rows


def load_mesh(path, format=None) -> TriangleMesh:
    """Load an ASCII OBJ or ASCII/binary-little-endian PLY triangle mesh.

    Non-triangle polygons are fan-triangulated; unreferenced vertices are
    retained. Texture/normal indices and materials are ignored.
    """
    fmt = format
    if fmt is None:
        name = str(path).lower()
        fmt = "ply" if name.endswith(".ply") else "obj"
    if fmt == "obj":
        return _load_obj(path)
    if fmt == "ply":
        return _load_ply(path)
    raise ValueError(f"unknown mesh format {fmt!r}")


def save_obj(mesh: TriangleMesh, path):
    with open(path, "w") as fh:
        for p in mesh.positions:
            fh.write(f"v {p[0]:.17g} {p[1]:.17g} {p[2]:.17g}\n")
        for f in mesh.faces:
            fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")


# -- procedural generators -----------------------------------------------------


def icosphere(subdiv: int) -> TriangleMesh:
    """Icosahedron subdivided `subdiv` times, vertices projected to the unit
    sphere. Deterministic: identical arguments give bit-identical arrays."""
    if subdiv < 0:
        raise ValueError("subdiv must be >= 0")
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
            (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
            (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
        ],
        dtype=np.float64,
    )
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [tuple(v) for v in verts]
    for _ in range(subdiv):
        cache = {}

        def midpoint(a, b):
            key = (a, b) if a < b else (b, a)
            if key in cache:
                return cache[key]
            p = np.array(verts[a]) + np.array(verts[b])
            p /= np.linalg.norm(p)
            verts.append(tuple(p))
            cache[key] = len(verts) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    return TriangleMesh(np.array(verts), np.array(faces, dtype=np.int64))


def torus(R: float, r: float, nu: int, nv: int) -> TriangleMesh:
    """Torus with major radius R, minor radius r, nu x nv quad grid split
    into triangles."""
    if not (R > r > 0):
        raise ValueError("need R > r > 0")
    if nu < 2 or nv < 2:
        raise ValueError("need nu, nv >= 2")
    u = 2.0 * np.pi * np.arange(nu) / nu
    v = 2.0 * np.pi * np.arange(nv) / nv
    uu, vv = np.meshgrid(u, v, indexing="ij")
    x = (R + r * np.cos(vv)) * np.cos(uu)
    y = (R + r * np.cos(vv)) * np.sin(uu)
    z = r * np.sin(vv)
    positions = np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)

    faces = []
    for i in range(nu):
        for j in range(nv):
            a = i * nv + j
            b = ((i + 1) % nu) * nv + j
            c = ((i + 1) % nu) * nv + (j + 1) % nv
            d = i * nv + (j + 1) % nv
            faces += [(a, b, c), (a, c, d)]
    return TriangleMesh(positions, np.array(faces, dtype=np.int64))


def _grid_positions(nx, ny, spacing):
    xs = spacing * np.arange(nx, dtype=np.float64)
    ys = spacing * np.arange(ny, dtype=np.float64)
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    return np.stack([xx.ravel(), yy.ravel(), np.zeros(nx * ny)], axis=1)


def _grid_faces(nx, ny):
    faces = []
    for i in range(nx - 1):
        for j in range(ny - 1):
            a = i * ny + j
            b = (i + 1) * ny + j
            c = (i + 1) * ny + j + 1
            d = i * ny + j + 1
            # consistent diagonal a-c; CCW with respect to +z
            faces += [(a, b, c), (a, c, d)]
    return np.array(faces, dtype=np.int64)


def grid(nx: int, ny: int, spacing: float) -> TriangleMesh:
    """Planar triangulated rectangle in the z=0 plane, consistent diagonals."""
    if nx < 2 or ny < 2:
        raise ValueError("need nx, ny >= 2")
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    return TriangleMesh(_grid_positions(nx, ny, spacing), _grid_faces(nx, ny))


def perturbed_grid(nx: int, ny: int, spacing: float, noise: float, rng_seed: int) -> TriangleMesh:
    """Grid with interior vertices jittered in-plane, deterministic per seed."""
    if nx < 2 or ny < 2:
        raise ValueError("need nx, ny >= 2")
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    if not 0 <= noise < 0.5 * spacing:
        raise ValueError("need 0 <= noise < 0.5 * spacing")
    positions = _grid_positions(nx, ny, spacing)
    rng = np.random.default_rng(rng_seed)
    jitter = rng.uniform(-noise, noise, size=(nx * ny, 2))
    interior = np.ones(nx * ny, dtype=bool)
    idx = np.arange(nx * ny).reshape(nx, ny)
    interior[idx[0, :]] = interior[idx[-1, :]] = False
    interior[idx[:, 0]] = interior[idx[:, -1]] = False
    positions[interior, 0] += jitter[interior, 0]
    positions[interior, 1] += jitter[interior, 1]
    return TriangleMesh(positions, _grid_faces(nx, ny))


def generate_mesh(kind: str, **params) -> TriangleMesh:
    """Dispatch on generator name: icosphere, torus, grid, perturbed_grid."""
    generators = {
        "icosphere": icosphere,
        "torus": torus,
        "grid": grid,
        "perturbed_grid": perturbed_grid,
    }
    if kind not in generators:
        raise ValueError(f"unknown mesh kind {kind!r}")
    return generators[kind](**params)
