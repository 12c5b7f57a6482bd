"""Discretizations of -Laplacian, multiplication operators and quadrature.

Every :class:`Discretization` stores the weak-form stiffness matrix ``S``
with natural boundary conditions on *all* nodes, so that ``u @ S @ u`` is
the discrete Dirichlet energy and the rows of ``S`` sum to zero.  Lumped
mass weights ``w`` give the quadrature rule.  Dirichlet truncation of a
noncompact direction is applied only when an operator is assembled: the
boundary nodes are dropped from the unknowns (u = 0 there).

Node ordering of a product follows ``scipy.sparse.kron``: node ``(i, j)``
of ``product_grid(a, b)`` has index ``i * b.n_nodes + j``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import sparse
from scipy.io import mmwrite
from scipy.special import logsumexp

from .errors import CapabilityError, ParameterError, RefusalError, ResourceError
from .models import ModelShrinker, PotentialSpec, check_compatible, potential_samples, probe_confining

DEFAULT_MAX_NODES = 2_000_000


@dataclass(frozen=True, eq=False)
class Discretization:
    label: str
    stiffness: sparse.csr_matrix
    weights: np.ndarray
    boundary: np.ndarray
    flat_coords: np.ndarray | None = None
    sphere_coords: np.ndarray | None = None
    sphere_radius: float | None = None
    sphere_dim: int = 0
    shape: tuple = ()
    kinds: tuple = ()
    spacing: tuple = ()
    half_width: tuple = ()
    level: int | None = None
    faces: np.ndarray | None = None
    factors: tuple = ()

    @property
    def n_nodes(self) -> int:
        return len(self.weights)

    @property
    def closed(self) -> bool:
        return not bool(self.boundary.any())

    @property
    def free(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary)

    @property
    def h(self) -> float:
        """Representative mesh size (largest spacing or mean sphere edge)."""
        vals = list(self.spacing)
        return max(vals) if vals else math.nan

    @property
    def volume(self) -> float:
        return float(self.weights.sum())

    def unit_point(self, i: int) -> np.ndarray:
        """Unit-sphere coordinates of sphere-mesh vertex ``i``."""
        if self.sphere_coords is None:
            raise CapabilityError(f"{self.label} has no sphere factor")
        p = self.sphere_coords[i]
        return p / np.linalg.norm(p)

    def point(self, i: int, shrinker: ModelShrinker):
        """Chart point of node ``i`` in the convention of ``eval_geometry``."""
        if shrinker.kind == "gaussian":
            return self.flat_coords[i]
        if shrinker.kind == "sphere":
            return self.unit_point(i)
        return (self.unit_point(i), self.flat_coords[i])


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Sparse symmetric matrix ``A`` with diagonal mass ``W`` on the free nodes.

    The eigenproblem is ``A v = lambda W v``.
    """

    matrix: sparse.csr_matrix
    weights: np.ndarray
    inner_product: str
    name: str
    disc: Discretization
    free: np.ndarray
    meta: dict = field(default_factory=dict)
    companion: "DiscreteOperator | None" = None

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def embed(self, v: np.ndarray) -> np.ndarray:
        """Extend free-node values to all nodes, zero on the Dirichlet boundary."""
        out = np.zeros(self.disc.n_nodes, dtype=np.result_type(v, float))
        out[self.free] = v
        return out

    def restrict(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u)
        if len(u) == self.size:
            return u
        if len(u) == self.disc.n_nodes:
            return u[self.free]
        raise ParameterError(f"vector of length {len(u)} does not fit operator of size {self.size}")


# ---------------------------------------------------------------------------
# geometries
# ---------------------------------------------------------------------------

def line_grid(L: float, N: int) -> Discretization:
    """Uniform nodes on [-L, L] with the 3-point stiffness and trapezoid weights.

    The end nodes are the Dirichlet boundary.
    """
    if not (L > 0 and math.isfinite(L)):
        raise ParameterError(f"L must be positive, got {L!r}")
    if isinstance(N, bool) or int(N) != N or N < 3:
        raise ParameterError(f"N must be an integer >= 3, got {N!r}")
    N = int(N)
    h = 2.0 * L / (N - 1)
    x = (np.arange(N) - 0.5 * (N - 1)) * h
    off = np.full(N - 1, -1.0 / h)
    diag = np.full(N, 2.0 / h)
    diag[0] = diag[-1] = 1.0 / h
    S = sparse.diags([off, diag, off], [-1, 0, 1], format="csr")
    w = np.full(N, h)
    w[0] = w[-1] = 0.5 * h
    boundary = np.zeros(N, dtype=bool)
    boundary[0] = boundary[-1] = True
    return Discretization(
        label=f"line(L={L:g},N={N})", stiffness=S, weights=w, boundary=boundary,
        flat_coords=x[:, None], shape=(N,), kinds=("line",), spacing=(h,), half_width=(float(L),),
    )


_T = (1.0 + math.sqrt(5.0)) / 2.0
_ICO_VERTS = np.array([
    (-1, _T, 0), (1, _T, 0), (-1, -_T, 0), (1, -_T, 0),
    (0, -1, _T), (0, 1, _T), (0, -1, -_T), (0, 1, -_T),
    (_T, 0, -1), (_T, 0, 1), (-_T, 0, -1), (-_T, 0, 1),
], dtype=float)
_ICO_FACES = np.array([
    (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
    (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
    (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
    (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
])


def icosphere(level: int) -> tuple[np.ndarray, np.ndarray]:
    """Vertices on the unit sphere and faces of a subdivided icosahedron."""
    verts = _ICO_VERTS / np.linalg.norm(_ICO_VERTS, axis=1)[:, None]
    faces = _ICO_FACES.copy()
    for _ in range(level):
        a, b, c = faces[:, 0], faces[:, 1], faces[:, 2]
        edges = np.sort(np.stack([np.stack([a, b], 1), np.stack([b, c], 1), np.stack([c, a], 1)], 1), axis=2)
        uniq, inv = np.unique(edges.reshape(-1, 2), axis=0, return_inverse=True)
        inv = inv.reshape(-1)
        mids = verts[uniq[:, 0]] + verts[uniq[:, 1]]
        mids /= np.linalg.norm(mids, axis=1)[:, None]
        base = len(verts)
        verts = np.vstack([verts, mids])
        mid = base + inv.reshape(-1, 3)
        ab, bc, ca = mid[:, 0], mid[:, 1], mid[:, 2]
        faces = np.vstack([
            np.stack([a, ab, ca], 1), np.stack([b, bc, ab], 1),
            np.stack([c, ca, bc], 1), np.stack([ab, bc, ca], 1),
        ])
    return verts, faces


def cotan_stiffness(verts: np.ndarray, faces: np.ndarray) -> tuple[sparse.csr_matrix, np.ndarray]:
    """Cotangent Laplace-Beltrami stiffness and barycentric lumped areas."""
    nv = len(verts)
    P = verts[faces]
    rows, cols, vals = [], [], []
    for corner in range(3):
        i = corner
        j, k = (corner + 1) % 3, (corner + 2) % 3
        e1 = P[:, j] - P[:, i]
        e2 = P[:, k] - P[:, i]
        cross = np.linalg.norm(np.cross(e1, e2), axis=1)
        cot = np.einsum("ij,ij->i", e1, e2) / cross
        lo = np.minimum(faces[:, j], faces[:, k])
        hi = np.maximum(faces[:, j], faces[:, k])
        rows.append(lo)
        cols.append(hi)
        vals.append(-0.5 * cot)
    upper = sparse.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                              shape=(nv, nv)).tocsr()
    off = (upper + upper.T).tocsr()
    S = (off - sparse.diags(np.asarray(off.sum(axis=1)).ravel())).tocsr()
    area = 0.5 * np.linalg.norm(np.cross(P[:, 1] - P[:, 0], P[:, 2] - P[:, 0]), axis=1)
    w = np.bincount(faces.ravel(), weights=np.repeat(area / 3.0, 3), minlength=nv)
    return S, w


def sphere_mesh(subdiv_level: int) -> Discretization:
    """Unit S^2 from a subdivided icosahedron with a cotangent Laplacian."""
    if isinstance(subdiv_level, bool) or int(subdiv_level) != subdiv_level or subdiv_level < 0:
        raise ParameterError(f"subdivision level must be an integer >= 0, got {subdiv_level!r}")
    level = int(subdiv_level)
    verts, faces = icosphere(level)
    S, w = cotan_stiffness(verts, faces)
    edge = np.linalg.norm(verts[faces[:, 0]] - verts[faces[:, 1]], axis=1).mean()
    return Discretization(
        label=f"sphere(level={level},r=1)", stiffness=S, weights=w, boundary=np.zeros(len(w), dtype=bool),
        sphere_coords=verts, sphere_radius=1.0, sphere_dim=2, shape=(len(w),), kinds=("sphere",),
        spacing=(float(edge),), level=level, faces=faces,
    )


def rescale_sphere(disc: Discretization, r: float) -> Discretization:
    """Sphere of radius ``r``: weights times r^2, stiffness times r^(d-2).

    For d = 2 the cotangent stiffness is scale invariant, so the generalized
    eigenvalues scale by 1/r^2.
    """
    if disc.kinds != ("sphere",):
        raise CapabilityError("rescale_sphere expects a bare sphere mesh")
    if not r > 0:
        raise ParameterError(f"radius must be positive, got {r!r}")
    scale = r / disc.sphere_radius
    if scale == 1.0:
        return disc
    d = disc.sphere_dim
    S = disc.stiffness * scale ** (d - 2) if d != 2 else disc.stiffness
    return replace(
        disc, label=f"sphere(level={disc.level},r={r:g})", stiffness=S, weights=disc.weights * scale ** d,
        sphere_coords=disc.sphere_coords * scale, sphere_radius=float(r),
        spacing=tuple(s * scale for s in disc.spacing),
    )


def product_grid(a: Discretization, b: Discretization, max_nodes: int = DEFAULT_MAX_NODES) -> Discretization:
    """Tensor product with Kronecker-sum stiffness ``S_a (x) W_b + W_a (x) S_b``."""
    if b.sphere_dim:
        raise CapabilityError("only the first factor of a product may be a sphere")
    size = a.n_nodes * b.n_nodes
    if size > max_nodes:
        raise ResourceError(f"product grid of {size} nodes exceeds cap {max_nodes}")
    Wa = sparse.diags(a.weights)
    Wb = sparse.diags(b.weights)
    S = (sparse.kron(a.stiffness, Wb) + sparse.kron(Wa, b.stiffness)).tocsr()
    w = np.kron(a.weights, b.weights)
    boundary = (np.repeat(a.boundary, b.n_nodes) | np.tile(b.boundary, a.n_nodes))
    flats = []
    if a.flat_coords is not None:
        flats.append(np.repeat(a.flat_coords, b.n_nodes, axis=0))
    if b.flat_coords is not None:
        flats.append(np.tile(b.flat_coords, (a.n_nodes, 1)))
    flat = np.hstack(flats) if flats else None
    sph = np.repeat(a.sphere_coords, b.n_nodes, axis=0) if a.sphere_coords is not None else None
    return Discretization(
        label=f"{a.label}x{b.label}", stiffness=S, weights=w, boundary=boundary, flat_coords=flat,
        sphere_coords=sph, sphere_radius=a.sphere_radius, sphere_dim=a.sphere_dim,
        shape=a.shape + b.shape, kinds=a.kinds + b.kinds, spacing=a.spacing + b.spacing,
        half_width=a.half_width + b.half_width, level=a.level, faces=a.faces,
        factors=(a.factors or (a,)) + (b.factors or (b,)),
    )


def model_grid(shrinker: ModelShrinker, L: float | None = None, N: int | None = None,
               level: int | None = None, max_nodes: int = DEFAULT_MAX_NODES) -> Discretization:
    """The discretization family used for each model.

    Gaussian: product of ``n`` line grids on [-L, L].  Sphere: icosphere at
    ``level`` scaled to the model radius.  Cylinder: that sphere times ``k``
    line grids.
    """
    if shrinker.kind != "gaussian" and shrinker.m != 2:
        raise CapabilityError("sphere factors are meshed for S^2 only")
    parts = []
    if shrinker.kind != "gaussian":
        if level is None:
            raise ParameterError("sphere factors need a subdivision level")
        parts.append(rescale_sphere(sphere_mesh(level), shrinker.radius))
    for _ in range(shrinker.flat_dim):
        if L is None or N is None:
            raise ParameterError("flat directions need L and N")
        parts.append(line_grid(L, N))
    disc = parts[0]
    for other in parts[1:]:
        disc = product_grid(disc, other, max_nodes=max_nodes)
    return disc


# ---------------------------------------------------------------------------
# discrete calculus on all nodes
# ---------------------------------------------------------------------------

def _edges(disc: Discretization):
    coo = sparse.triu(disc.stiffness, k=1).tocoo()
    return coo.row, coo.col, -coo.data


def node_laplacian(disc: Discretization, u: np.ndarray) -> np.ndarray:
    """Delta_h u = -(S u) / w at every node (natural boundary rows)."""
    return -(disc.stiffness @ u) / disc.weights


def carre_du_champ(disc: Discretization, u: np.ndarray) -> np.ndarray:
    """Nodal |grad u|^2 as (1/2w_i) sum_j c_ij (u_j - u_i)^2.

    On a uniform line this is the mean of the squared one-sided differences.
    """
    i, j, c = _edges(disc)
    d2 = c * (u[j] - u[i]) ** 2
    out = np.bincount(i, weights=d2, minlength=disc.n_nodes) + np.bincount(j, weights=d2, minlength=disc.n_nodes)
    return 0.5 * out / disc.weights


def log_density(disc: Discretization, shrinker: ModelShrinker) -> np.ndarray:
    """log of (4 pi tau)^(-n/2) e^(-f) at every node."""
    f = shrinker.sample(disc)["f"]
    return -0.5 * shrinker.n * math.log(4.0 * math.pi * shrinker.tau) - f


def weighted_stiffness(disc: Discretization, log_rho: np.ndarray) -> sparse.csr_matrix:
    """Stiffness of the form int |grad u|^2 rho dv.

    Edge densities are geometric means exp((log rho_i + log rho_j)/2), so the
    matrix is exactly symmetric and annihilates constants.
    """
    coo = disc.stiffness.tocoo()
    offd = coo.row != coo.col
    r, c = coo.row[offd], coo.col[offd]
    vals = coo.data[offd] * np.exp(0.5 * (log_rho[r] + log_rho[c]))
    off = sparse.coo_matrix((vals, (r, c)), shape=disc.stiffness.shape).tocsr()
    return (off - sparse.diags(np.asarray(off.sum(axis=1)).ravel())).tocsr()


def dirichlet_energy(disc: Discretization, u: np.ndarray) -> float:
    return float(u @ (disc.stiffness @ u))


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

def _restrict(M: sparse.csr_matrix, free: np.ndarray) -> sparse.csr_matrix:
    return M[free][:, free].tocsr()


def _require_confinement(disc, shrinker, potential, effective=None):
    if disc.closed:
        return
    if potential.confining:
        return
    if effective is not None and probe_confining(effective, shrinker.flat_dim):
        return
    raise RefusalError(
        f"potential {potential.describe()!r} is not confining; Dirichlet truncation of "
        f"{disc.label} would not bound the true eigenvalue")


def assemble_schrodinger(disc: Discretization, shrinker: ModelShrinker,
                         potential: PotentialSpec) -> DiscreteOperator:
    """-Laplacian + R/4 + V in plain L^2 weak form on the free nodes."""
    check_compatible(shrinker, disc)
    _require_confinement(disc, shrinker, potential)
    geo = shrinker.sample(disc)
    V = potential_samples(potential, shrinker, disc)
    q = 0.25 * geo["R"] + V
    A = (disc.stiffness + sparse.diags(disc.weights * q)).tocsr()
    free = disc.free
    return DiscreteOperator(
        matrix=_restrict(A, free), weights=disc.weights[free].copy(), inner_product="plain",
        name="schrodinger", disc=disc, free=free,
        meta={"geometry": disc.label, "model": shrinker.label(), "potential": potential.describe()},
    )


def drift_potential(shrinker: ModelShrinker, flat, count=None) -> np.ndarray:
    """|grad f|^2/4 - Laplacian(f)/2, the multiplication term produced by
    conjugating the drifted Laplacian to plain L^2."""
    geo = shrinker.fields(flat, count=count)
    return 0.25 * geo["grad_f_sq"] - 0.5 * geo["laplacian_f"]


def assemble_drifted(disc: Discretization, shrinker: ModelShrinker,
                     potential: PotentialSpec) -> DiscreteOperator:
    """-Delta_f + V on L^2(d mu), d mu = (4 pi tau)^(-n/2) e^(-f) dv.

    The returned operator is the weighted form (matrix ``K_rho + diag(w rho V)``
    against mass ``w rho``).  Its ``companion`` is the plain-L^2 conjugate
    ``D^-1 A D^-1`` with ``D = diag(sqrt(rho))`` against mass ``w``; the two
    generalized problems are exactly similar.
    """
    check_compatible(shrinker, disc)
    effective = lambda pts: potential.evaluate(pts, shrinker) + drift_potential(shrinker, pts)  # noqa: E731
    _require_confinement(disc, shrinker, potential, effective)
    log_rho = log_density(disc, shrinker)
    rho = np.exp(log_rho)
    V = potential_samples(potential, shrinker, disc)
    K = weighted_stiffness(disc, log_rho)
    A = (K + sparse.diags(disc.weights * rho * V)).tocsr()
    free = disc.free
    Af = _restrict(A, free)
    meta = {"geometry": disc.label, "model": shrinker.label(), "potential": potential.describe()}

    coo = Af.tocoo()
    half = np.exp(0.5 * log_rho[free])
    scaled = coo.data / (half[coo.row] * half[coo.col])
    C = sparse.coo_matrix((scaled, (coo.row, coo.col)), shape=Af.shape).tocsr()
    companion = DiscreteOperator(
        matrix=C, weights=disc.weights[free].copy(), inner_product="plain", name="drifted-conjugated",
        disc=disc, free=free, meta=dict(meta, sqrt_density=half),
    )
    return DiscreteOperator(
        matrix=Af, weights=(disc.weights * rho)[free], inner_product="weighted", name="drifted",
        disc=disc, free=free, meta=meta, companion=companion,
    )


def assemble_conjugated(disc: Discretization, shrinker: ModelShrinker,
                        potential: PotentialSpec) -> DiscreteOperator:
    """-Laplacian + |grad f|^2/4 - Delta f/2 + V with closed-form coefficients.

    Unitarily equivalent to -Delta_f + V in the continuum; its discrete
    spectrum agrees with :func:`assemble_drifted` only to O(h^2).
    """
    check_compatible(shrinker, disc)
    effective = lambda pts: potential.evaluate(pts, shrinker) + drift_potential(shrinker, pts)  # noqa: E731
    _require_confinement(disc, shrinker, potential, effective)
    q = drift_potential(shrinker, disc.flat_coords, count=disc.n_nodes) + potential_samples(potential, shrinker, disc)
    A = (disc.stiffness + sparse.diags(disc.weights * q)).tocsr()
    free = disc.free
    return DiscreteOperator(
        matrix=_restrict(A, free), weights=disc.weights[free].copy(), inner_product="plain",
        name="drifted-closed-form", disc=disc, free=free,
        meta={"geometry": disc.label, "model": shrinker.label(), "potential": potential.describe()},
    )


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def _check_len(disc, samples):
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (disc.n_nodes,):
        raise ParameterError(f"expected {disc.n_nodes} samples, got shape {samples.shape}")
    return samples


def integrate(disc: Discretization, samples) -> float:
    """sum_i w_i s_i."""
    return float(disc.weights @ _check_len(disc, samples))


def integrate_weighted(disc: Discretization, shrinker: ModelShrinker, samples) -> float:
    """sum_i w_i (4 pi tau)^(-n/2) e^(-f_i) s_i."""
    samples = _check_len(disc, samples)
    return float((disc.weights * np.exp(log_density(disc, shrinker))) @ samples)


def log_integrate_exp(disc: Discretization, exponent, shrinker: ModelShrinker | None = None) -> float:
    """log sum_i w_i e^(exponent_i), optionally against the weighted measure.

    Evaluated with a max shift, so strongly confining potentials do not
    underflow.
    """
    exponent = _check_len(disc, exponent)
    if shrinker is not None:
        exponent = exponent + log_density(disc, shrinker)
    return float(logsumexp(exponent, b=disc.weights))


# ---------------------------------------------------------------------------
# rigidity diagnostic
# ---------------------------------------------------------------------------

def _tensor_hessian_norm(u: np.ndarray, spacing) -> float:
    d = u.ndim
    if any(s < 3 for s in u.shape):
        return 0.0
    inner = tuple(slice(1, -1) for _ in range(d))

    def shifted(offsets):
        return u[tuple(slice(1 + o, u.shape[a] - 1 + o) for a, o in enumerate(offsets))]

    frob = np.zeros(u[inner].shape)
    for a in range(d):
        e = [0] * d
        e[a] = 1
        em = [-x for x in e]
        haa = (shifted(e) - 2.0 * u[inner] + shifted(em)) / spacing[a] ** 2
        frob += haa ** 2
        for b in range(a + 1, d):
            pp = [0] * d
            pp[a], pp[b] = 1, 1
            pm = [0] * d
            pm[a], pm[b] = 1, -1
            hab = (shifted(pp) - shifted(pm) - shifted([-x for x in pm]) + shifted([-x for x in pp])) / (
                4.0 * spacing[a] * spacing[b])
            frob += 2.0 * hab ** 2
    return float(np.sqrt(frob).max())


def fd_hessian_norm(disc: Discretization, samples, fiber_tol: float = 1e-12) -> float:
    """Max over interior nodes of the Frobenius norm of the FD Hessian.

    Sphere factors are supported only for samples constant on each sphere
    fiber, whose intrinsic sphere Hessian is zero.
    """
    u = _check_len(disc, samples)
    if not disc.kinds:
        raise CapabilityError(f"no Hessian stencil for {disc.label}")
    u = u.reshape(disc.shape)
    spacing = disc.spacing
    if disc.kinds[0] == "sphere":
        spread = np.ptp(u, axis=0)
        scale = 1.0 + np.abs(u).max()
        if spread.max() > fiber_tol * scale:
            raise CapabilityError("Hessian on a sphere factor is only defined here for fiber-constant samples")
        u = u[0]
        spacing = spacing[1:]
        if u.ndim == 0:
            return 0.0
    if any(k != "line" for k in disc.kinds[1:]):
        raise CapabilityError(f"no Hessian stencil for {disc.label}")
    return _tensor_hessian_norm(u, spacing)


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def dump_matrix(op: DiscreteOperator, path) -> None:
    """MatrixMarket coordinate file (symmetric, lower triangle)."""
    mmwrite(str(path), op.matrix.tocoo(), comment=f"{op.name} on {op.disc.label}", symmetry="symmetric")


def dump_weights(op: DiscreteOperator, path) -> None:
    mmwrite(str(path), sparse.diags(op.weights).tocoo(), comment=f"mass weights of {op.name}", symmetry="symmetric")


def node_table(disc: Discretization) -> np.ndarray:
    cols = []
    if disc.sphere_coords is not None:
        cols.append(disc.sphere_coords)
    if disc.flat_coords is not None:
        cols.append(disc.flat_coords)
    return np.hstack(cols) if cols else np.zeros((disc.n_nodes, 0))


def dump_nodes(disc: Discretization, path) -> None:
    """CSV with header ``node_id,x1[,x2[,x3...]]`` (sphere coordinates first)."""
    table = node_table(disc)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["node_id"] + [f"x{j + 1}" for j in range(table.shape[1])])
        for i, row in enumerate(table):
            writer.writerow([i] + [repr(float(v)) for v in row])
