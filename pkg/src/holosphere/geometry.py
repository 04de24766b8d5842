"""Residual checks for every geometric invariant of chain surfaces.

Each statement about the chain (isotropy and Hermitian orthogonality of
its vectors, collinearity of the final pair, the conjugate-descent
identity, minimality of the surface, vanishing symmetric products of the
derivatives, the tangent/higher fundamental-form formulas, circularity
of the curvature ellipses) is turned into a number: a scale-normalized
residual that is zero in exact arithmetic.  `verify_all` sweeps a grid,
aggregates per-family maxima, and classifies PASS/FAIL against supplied
tolerances.

Tolerances are tiered by computation path: identities evaluated through
the symbolic chain are held to 1e-9 (relative), first-order finite
differences to 1e-5, second and higher order to 1e-4.
"""

from dataclasses import dataclass, field

import numpy as np

from .chain import (
    DEFAULT_EPS_SINGULAR,
    f_chain_at,
    f_chain_eval,
    surface_at,
)
from .domain import Domain
from .errors import (
    DegenerateSurfaceError,
    DomainError,
    SingularPointError,
)
from .fd import default_step, stencil_halfwidth, wirtinger
from .products import (
    hermitian_product,
    norm_sq,
    pair_minors_max,
    principal_angles,
    symmetric_product,
)

DEFAULT_TOLERANCES = {
    "isotropy": 1e-9,
    "hermitian_orthogonality": 1e-9,
    "collinearity": 1e-9,
    "fbar_identity": 1e-5,
    "recursion": 1e-5,
    "minimality": 1e-5,
    "tangent_formula": 1e-5,
    "circularity": 1e-9,
    "calabi": 1e-4,
}

_DEGENERATE_DIFFERENTIAL = 1e-8


@dataclass
class SurfaceEvaluator:
    """A black-box unit-sphere surface: a pure map from points of the
    domain to unit vectors, batched over numpy arrays."""

    func: object          # zs (B,) complex -> (B, dim) float
    domain: Domain
    dim: int
    n: int = None         # chain length when known (dim == 2n+1)
    fd_step: float = None

    def __call__(self, zs):
        zs = np.asarray(zs, dtype=complex).ravel()
        return np.asarray(self.func(zs), dtype=float)

    def at(self, z):
        return self(np.array([z]))[0]

    def step(self, order=1):
        if self.fd_step is not None:
            return self.fd_step
        return default_step(self.domain.diameter, order)

    @classmethod
    def from_chain(cls, chain, eps_singular=DEFAULT_EPS_SINGULAR, fd_step=None):
        def func(zs):
            batch = f_chain_eval(chain, zs, eps_singular)
            if np.any(batch.singular):
                bad = batch.z[np.argmax(batch.singular)]
                raise SingularPointError("chain degenerates", complex(bad))
            re = batch.F[:, -1, :].real
            nsq = np.sum(re * re, axis=1)
            if np.any(nsq <= eps_singular * batch.scale_sq):
                bad = batch.z[np.argmax(nsq <= eps_singular * batch.scale_sq)]
                raise SingularPointError(
                    "surface normalization degenerates", complex(bad)
                )
            return re / np.sqrt(nsq)[:, None]

        return cls(
            func=func, domain=chain.domain, dim=chain.dim, n=chain.n,
            fd_step=fd_step,
        )


def _first_partials(g, z, h):
    """(g(z), g_x, g_y) from one Wirtinger derivative of the real field."""
    gz = g.at(z)
    dg = wirtinger(g, z, 1, 0, h=h)
    return gz, 2.0 * dg.real, -2.0 * dg.imag


def minimality_residual(g, z, h=None):
    """Norm of the component of the Laplacian orthogonal to the surface
    and to the sphere position, normalized by the first-derivative
    energy.  Vanishes (to FD accuracy) exactly for minimal surfaces.
    """
    if h is None:
        h = g.step(1)
    if not g.domain.contains(z, margin=stencil_halfwidth(2, h)):
        raise DomainError(f"stencil at z={z} leaves the domain")
    gz, gx, gy = _first_partials(g, z, h)
    energy = float(np.dot(gx, gx) + np.dot(gy, gy))
    if energy < _DEGENERATE_DIFFERENTIAL:
        raise DegenerateSurfaceError(f"degenerate differential at z={z}")
    quarter_lap = wirtinger(g, z, 1, 1, h=h).real
    basis = np.stack([gz, gx, gy], axis=1)
    q, _ = np.linalg.qr(basis)
    resid = quarter_lap - q @ (q.T @ quarter_lap)
    return float(np.linalg.norm(resid)) / energy


def calabi_check(g, max_order, z, h=None):
    """Table of |<d^j g, d^k g>| (symmetric product of iterated Wirtinger
    z-derivatives) for all 0 < j+k <= max_order.

    FD noise makes orders beyond 4 meaningless in double precision, so
    max_order must be <= 4.  Step sizes scale with the derivative order.
    """
    if not 1 <= max_order <= 4:
        raise ValueError("max_order must be between 1 and 4")
    top_h = h if h is not None else default_step(g.domain.diameter, max_order)
    if not g.domain.contains(z, margin=stencil_halfwidth(max_order, top_h)):
        raise DomainError(f"stencil at z={z} leaves the domain")
    derivs = [g.at(z).astype(complex)]
    for j in range(1, max_order + 1):
        hj = h if h is not None else None
        derivs.append(
            wirtinger(g, z, j, 0, h=hj, diameter=g.domain.diameter)
        )
    table = {}
    for j in range(max_order + 1):
        for k in range(j, max_order + 1):
            if j + k == 0 or j + k > max_order:
                continue
            val = abs(symmetric_product(derivs[j], derivs[k]))
            table[(j, k)] = val
            table[(k, j)] = val
    return table


def chain_fundamental_form(sample, g=None, s=0):
    """Value of the order-(s+1) fundamental form of the surface along the
    repeated z-direction, via the closed chain formula.

    s = 0 returns the tangent vector dg/dz; 1 <= s <= n-1 returns the
    higher forms, which are isotropic multiples of the conjugated chain
    vectors.
    """
    n = sample.n
    if sample.singular:
        raise SingularPointError("chain degenerates", sample.z)
    if not 0 <= s <= n - 1:
        raise ValueError(f"order s={s} out of range [0, {n - 1}]")
    if g is None:
        g = surface_at(sample)
    pairing = complex(np.dot(g.astype(complex), sample.F[-1]))
    target = sample.F[n - s - 1]
    coeff = ((-1) ** (s + 1)) * pairing / sample.norms_sq[n - s - 1]
    return coeff * np.conj(target)


def isotropic_surface_form_residual(chain, z, h=None,
                                    eps_singular=DEFAULT_EPS_SINGULAR):
    """Check, by finite differences, that twice the second fundamental
    form of the auxiliary isotropic map f = Re(antiderivative of the top
    chain map) along the repeated z-direction equals the second chain
    vector.

    f is a minimal surface in flat space whose complexified tangent is
    spanned by the first chain vector and its conjugate; the identity is
    the s = 1 case of the normal-bundle ladder (higher orders follow
    from the orthogonalization itself).  Returns the relative residual.
    """
    from .expr import antiderivative

    antis = [
        antiderivative(e, 0j, chain.domain)
        for e in chain.alpha_exprs[chain.n]
    ]

    def f_field(zs):
        zs = np.asarray(zs, dtype=complex).ravel()
        out = np.empty((zs.size, chain.dim))
        for c, a in enumerate(antis):
            out[:, c] = np.asarray(a.value(zs)).real
        return out

    if h is None:
        h = default_step(chain.domain.diameter, 1)
    sample = f_chain_at(chain, z, eps_singular)
    if sample.singular:
        raise SingularPointError("chain degenerates", z)
    v = 2.0 * wirtinger(f_field, z, 2, 0, h=h)
    F1 = sample.F[0]
    F1bar = np.conj(F1)
    nsq = sample.norms_sq[0]
    v = v - (np.dot(v, F1bar) / nsq) * F1 - (np.dot(v, F1) / nsq) * F1bar
    ref = sample.F[1]
    return float(np.linalg.norm(v - ref) / np.linalg.norm(ref))


def second_normal_space_angle(chain, z, h=None, eps_singular=DEFAULT_EPS_SINGULAR):
    """Largest principal angle between the FD second-order normal space
    of the surface and the span of the (n-1)-th chain vector and its
    conjugate.  Requires n >= 2."""
    if chain.n < 2:
        raise ValueError("second normal space needs n >= 2")
    g = SurfaceEvaluator.from_chain(chain, eps_singular)
    if h is None:
        h = g.step(1)
    gz, gx, gy = _first_partials(g, z, h)
    basis = np.stack([gz, gx, gy], axis=1)
    q, _ = np.linalg.qr(basis)
    d2 = wirtinger(g, z, 2, 0, h=h)
    v1 = d2 - q.astype(complex) @ (q.T.astype(complex) @ d2)
    sample = f_chain_at(chain, z, eps_singular)
    fd_basis = np.stack([v1, np.conj(v1)], axis=1)
    chain_basis = np.stack(
        [sample.F[chain.n - 2], np.conj(sample.F[chain.n - 2])], axis=1
    )
    return float(principal_angles(fd_basis, chain_basis).max())


# ---------------------------------------------------------------------------
# Full verification sweep
# ---------------------------------------------------------------------------

@dataclass
class PointRecord:
    z: complex
    singular: bool
    residuals: dict
    calabi_table: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "z": [self.z.real, self.z.imag],
            "singular": self.singular,
            "residuals": {
                k: v for k, v in self.residuals.items() if v is not None
            },
            "calabi": {f"{j},{k}": v for (j, k), v in self.calabi_table.items()},
        }


@dataclass
class DiagnosticsReport:
    n: int
    rows: int
    cols: int
    tolerances: dict
    records: list
    summary: dict
    worst_point: dict
    status: dict
    passed: bool
    singular_count: int

    def failures(self):
        return [f for f, s in self.status.items() if s == "FAIL"]

    def to_dict(self):
        return {
            "n": self.n,
            "grid": {"rows": self.rows, "cols": self.cols},
            "tolerances": dict(sorted(self.tolerances.items())),
            "summary": {
                k: self.summary[k] for k in sorted(self.summary)
            },
            "worst_point": {
                k: [v.real, v.imag]
                for k, v in sorted(self.worst_point.items())
            },
            "status": dict(sorted(self.status.items())),
            "passed": self.passed,
            "singular_count": self.singular_count,
            "points": [r.to_dict() for r in self.records],
        }


def _chain_field(chain, idx, eps_singular, conjugate=False):
    """Field z -> F_{idx+1}(z) (optionally conjugated) for FD use."""

    def func(zs):
        batch = f_chain_eval(chain, zs, eps_singular)
        if np.any(batch.singular):
            bad = batch.z[np.argmax(batch.singular)]
            raise SingularPointError("chain degenerates", complex(bad))
        rows = batch.F[:, idx, :]
        return np.conj(rows) if conjugate else rows

    return func


def _apply_perturbation(F, perturb):
    """Deterministic fault injection: nudge one chain vector toward the
    first one, breaking Hermitian orthogonality by the given magnitude."""
    target = perturb.get("target", "F2")
    magnitude = float(perturb.get("magnitude", 1e-3))
    idx = int(target.lstrip("F")) - 1
    F = F.copy()
    direction = F[0] / np.linalg.norm(F[0])
    F[idx] = F[idx] + magnitude * np.linalg.norm(F[idx]) * direction
    return F


def verify_all(
    chain,
    grid=(10, 10),
    tolerances=None,
    eps_singular=DEFAULT_EPS_SINGULAR,
    fd_step=None,
    calabi_order=2,
    perturb=None,
):
    """Evaluate every invariant family over a grid and classify.

    Algebraic families (isotropy, Hermitian orthogonality, collinearity,
    circularity) are computed at every non-singular in-domain point; the
    finite-difference families (conjugate descent, recursion, minimality,
    tangent formula, symmetric-derivative table) only where the stencil
    fits inside the domain.  `perturb`, when given, injects a fault into
    the per-point algebraic analysis so that detection can be tested.
    """
    rows, cols = grid
    tols = dict(DEFAULT_TOLERANCES)
    if tolerances:
        tols.update(tolerances)
    n = chain.n
    h = fd_step if fd_step is not None else default_step(chain.domain.diameter, 1)
    g_eval = SurfaceEvaluator.from_chain(chain, eps_singular, fd_step=fd_step)

    zs, inside = chain.domain.grid(rows, cols)
    calabi_h = default_step(chain.domain.diameter, max(calabi_order, 1))
    margins = {
        "order1": stencil_halfwidth(1, h),
        "order2": stencil_halfwidth(2, h),
        "calabi": stencil_halfwidth(calabi_order, calabi_h),
    }

    records = []
    singular_count = 0
    from .chain import recursion_crosscheck

    for r in range(rows):
        for c in range(cols):
            if not inside[r, c]:
                continue
            z = complex(zs[r, c])
            sample = f_chain_at(chain, z, eps_singular)
            if sample.singular:
                singular_count += 1
                records.append(PointRecord(z, True, {}))
                continue
            F = sample.F
            if perturb:
                F = _apply_perturbation(F, perturb)
            norms = np.sqrt(np.sum(np.abs(F) ** 2, axis=1))
            res = {}

            iso = 0.0
            for j in range(n):
                for k in range(j, n):
                    val = abs(np.dot(F[j], F[k])) / (norms[j] * norms[k])
                    iso = max(iso, val)
            res["isotropy"] = iso

            herm = 0.0
            for j in range(n + 1):
                for k in range(j + 1, n + 1):
                    val = abs(np.dot(F[j], np.conj(F[k]))) / (norms[j] * norms[k])
                    herm = max(herm, val)
            res["hermitian_orthogonality"] = herm

            res["collinearity"] = pair_minors_max(F[-1], np.conj(F[-1])) / (
                norms[-1] ** 2
            )

            try:
                g = surface_at(sample, eps_singular)
            except SingularPointError:
                singular_count += 1
                records.append(PointRecord(z, True, res))
                continue

            circ = 0.0
            for s in range(n):
                a = chain_fundamental_form(sample, g, s)
                circ = max(circ, abs(np.dot(a, a)) / float(np.real(np.dot(a, np.conj(a)))))
            res["circularity"] = circ

            interior1 = chain.domain.contains(z, margin=margins["order1"])
            interior2 = chain.domain.contains(z, margin=margins["order2"])

            if interior1:
                try:
                    res["recursion"] = recursion_crosscheck(chain, z, h, eps_singular)
                except SingularPointError:
                    res["recursion"] = None

                if n >= 2:
                    fbar = 0.0
                    ok = True
                    for s in range(2, n + 1):
                        fld = _chain_field(chain, s - 1, eps_singular, conjugate=True)
                        try:
                            dbar = wirtinger(fld, z, 1, 0, h=h)
                        except SingularPointError:
                            ok = False
                            break
                        ratio = sample.norms_sq[s - 1] / sample.norms_sq[s - 2]
                        resid = np.linalg.norm(
                            dbar + ratio * np.conj(sample.F[s - 2])
                        )
                        scale = sample.norms_sq[s - 1] / np.sqrt(
                            sample.norms_sq[s - 2]
                        )
                        fbar = max(fbar, float(resid / scale))
                    res["fbar_identity"] = fbar if ok else None

                tangent = chain_fundamental_form(sample, g, 0)
                try:
                    dg = wirtinger(g_eval, z, 1, 0, h=h)
                    res["tangent_formula"] = float(
                        np.linalg.norm(dg - tangent) / np.linalg.norm(tangent)
                    )
                except SingularPointError:
                    res["tangent_formula"] = None

            if interior2:
                try:
                    res["minimality"] = minimality_residual(g_eval, z, h)
                except (SingularPointError, DegenerateSurfaceError):
                    res["minimality"] = None

            calabi_table = {}
            if calabi_order >= 1 and chain.domain.contains(
                z, margin=margins["calabi"]
            ):
                try:
                    calabi_table = calabi_check(g_eval, calabi_order, z)
                    res["calabi"] = max(calabi_table.values())
                except (SingularPointError, DomainError):
                    res["calabi"] = None

            records.append(PointRecord(z, False, res, calabi_table))

    summary = {}
    worst = {}
    for rec in records:
        for fam, val in rec.residuals.items():
            if val is None:
                continue
            if fam not in summary or val > summary[fam]:
                summary[fam] = val
                worst[fam] = rec.z
    status = {}
    for fam, val in summary.items():
        status[fam] = "PASS" if val <= tols.get(fam, np.inf) else "FAIL"
    passed = all(s == "PASS" for s in status.values())
    return DiagnosticsReport(
        n=n,
        rows=rows,
        cols=cols,
        tolerances=tols,
        records=records,
        summary=summary,
        worst_point=worst,
        status=status,
        passed=passed,
        singular_count=singular_count,
    )
