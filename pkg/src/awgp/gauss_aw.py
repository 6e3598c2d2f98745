"""Closed-form adapted 2-Wasserstein distances between Gaussian processes.

Discrete time: for nondegenerate N-step Gaussians with covariances S1, S2
and lower-triangular factors K1, K2,

    AW2^2 = tr(S1) + tr(S2) - 2 sum_n |(K1^T K2)_{n,n}|.

Continuous time, unit multiplicity: with canonical kernels k_i and intensity
measures mu_i,

    AW2^2 = int ||k1(., s)||^2 mu1(ds) + int ||k2(., s)||^2 mu2(ds)
            - 2 int |<k1(., s), k2(., s)>| sqrt(mu1 mu2)(ds),

where the geometric mean sqrt(mu1 mu2) vanishes on mutually singular parts.
Higher multiplicity replaces the absolute value by a trace norm of the
matrix of component inner products.  A partition-based triangular integral
approximates the cross term directly and serves as a structural cross-check.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConvergenceError, DomainError, NotPositiveDefiniteError
from .kernels import (Brownian, CallableKernel, GaussianProcessSpec, IntensityMeasure,
                      VolterraKernel, fbm_spec)
from .quadrature import QuadratureGrid, graded_gauss, graded_midpoint, grading_exponent

__all__ = [
    "CovMatrix",
    "TriangularFactor",
    "DistanceReport",
    "cholesky_causal_factor",
    "discrete_aw",
    "continuous_aw_unit",
    "continuous_aw_fbm",
    "continuous_aw_multi",
    "triangular_integral",
    "trace_bound_optimal_gamma",
    "levy_noncanonical_check",
    "discretized_fbm_aw",
]

_PIVOT_TOL = 1e-10
_SYM_TOL = 1e-12


@dataclass(frozen=True)
class CovMatrix:
    """Symmetric positive-definite covariance matrix."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError("covariance matrix must be square")
        scale = max(1.0, float(np.abs(a).max()))
        if np.abs(a - a.T).max() > _SYM_TOL * scale:
            raise DomainError("covariance matrix is not symmetric")
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def from_csv(cls, path) -> "CovMatrix":
        a = np.loadtxt(path, delimiter=",", ndmin=2)
        return cls(entries=a)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            for row in self.entries:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


@dataclass(frozen=True)
class TriangularFactor:
    """Lower-triangular matrix with positive diagonal (discrete causal factor)."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if np.any(np.triu(a, k=1) != 0.0):
            raise DomainError("factor must be strictly lower triangular above the diagonal")
        if np.any(np.diag(a) <= 0.0):
            raise DomainError("factor diagonal must be positive")
        object.__setattr__(self, "entries", a)


@dataclass
class DistanceReport:
    """Distance value with its trace/cross decomposition and grid metadata.

    ``optimal_correlation`` is a per-step/per-node sign array in the unit
    multiplicity and discrete cases, or a stack of per-node coupling factor
    matrices in the higher-multiplicity case.
    """

    distance_squared: float
    trace_term: float
    cross_term: float
    optimal_correlation: np.ndarray | None = None
    grid_meta: dict = field(default_factory=dict)

    def to_dict(self, include_correlation: bool = True) -> dict:
        d = {
            "distance_squared": self.distance_squared,
            "trace_term": self.trace_term,
            "cross_term": self.cross_term,
            "grid_meta": self.grid_meta,
        }
        if include_correlation and self.optimal_correlation is not None:
            d["optimal_correlation"] = np.asarray(self.optimal_correlation).tolist()
        return d

    def to_json(self, include_correlation: bool = True) -> str:
        return json.dumps(self.to_dict(include_correlation=include_correlation), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "DistanceReport":
        corr = d.get("optimal_correlation")
        return cls(
            distance_squared=float(d["distance_squared"]),
            trace_term=float(d["trace_term"]),
            cross_term=float(d["cross_term"]),
            optimal_correlation=None if corr is None else np.asarray(corr, dtype=float),
            grid_meta=dict(d.get("grid_meta", {})),
        )

    @classmethod
    def from_json(cls, text: str) -> "DistanceReport":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# discrete time
# ---------------------------------------------------------------------------

def cholesky_causal_factor(sigma: CovMatrix | np.ndarray) -> TriangularFactor:
    """Cholesky factor K with K K^T = sigma, positive diagonal.

    Raises NotPositiveDefiniteError naming the failing pivot when the matrix
    is degenerate (smallest pivot <= 1e-10 times the largest diagonal entry;
    degenerate inputs are rejected, not regularized).
    """
    a = sigma.entries if isinstance(sigma, CovMatrix) else CovMatrix(np.asarray(sigma)).entries
    try:
        low = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError(_first_failing_pivot(a)) from None
    pivots = np.diag(low) ** 2
    tol = _PIVOT_TOL * float(np.diag(a).max())
    if pivots.min() <= tol:
        raise NotPositiveDefiniteError(int(np.argmin(pivots)))
    return TriangularFactor(entries=low)


def _first_failing_pivot(a: np.ndarray) -> int:
    n = a.shape[0]
    low = np.zeros_like(a)
    for j in range(n):
        d = a[j, j] - np.dot(low[j, :j], low[j, :j])
        if d <= 0.0:
            return j
        low[j, j] = np.sqrt(d)
        low[j + 1:, j] = (a[j + 1:, j] - low[j + 1:, :j] @ low[j, :j]) / low[j, j]
    return n - 1


def discrete_aw(sigma1: CovMatrix | np.ndarray, sigma2: CovMatrix | np.ndarray) -> DistanceReport:
    """Adapted 2-Wasserstein distance (squared) between N(0, S1) and N(0, S2)."""
    s1 = sigma1 if isinstance(sigma1, CovMatrix) else CovMatrix(np.asarray(sigma1))
    s2 = sigma2 if isinstance(sigma2, CovMatrix) else CovMatrix(np.asarray(sigma2))
    if s1.dim != s2.dim:
        raise DomainError(f"dimension mismatch: {s1.dim} vs {s2.dim}")
    k1 = cholesky_causal_factor(s1).entries
    k2 = cholesky_causal_factor(s2).entries
    diag = np.sum(k1 * k2, axis=0)  # (K1^T K2)_{n,n}
    trace = float(np.trace(s1.entries) + np.trace(s2.entries))
    cross = float(np.sum(np.abs(diag)))
    corr = np.where(diag >= 0.0, 1.0, -1.0)  # tie (exact 0) resolved to +1
    return DistanceReport(
        distance_squared=trace - 2.0 * cross,
        trace_term=trace,
        cross_term=cross,
        optimal_correlation=corr,
        grid_meta={"n_steps": s1.dim, "scheme": "cholesky"},
    )


# ---------------------------------------------------------------------------
# continuous time: shared node machinery
# ---------------------------------------------------------------------------

def _pair_gammas(kernels1: Sequence[VolterraKernel], kernels2: Sequence[VolterraKernel]
                 ) -> tuple[float, float]:
    """Grading exponents for the shared s-grid and per-s t-grids."""
    all_k = list(kernels1) + list(kernels2)
    h_min = min(k.grading_hurst for k in all_k)
    alpha_s = 2.0 * max(k.origin_exponent for k in all_k)
    d1 = min(k.diag_exponent for k in kernels1)
    d2 = min(k.diag_exponent for k in kernels2)
    alpha_t = max(0.0, -2.0 * min(d1, d2))
    return grading_exponent(alpha_s, h_min), grading_exponent(alpha_t, h_min)


def _s_nodes(T: float, n: int, gamma: float, scheme: str) -> tuple[np.ndarray, np.ndarray]:
    if scheme == "midpoint":
        return graded_midpoint(0.0, T, n, gamma=gamma, cluster="left")
    return graded_gauss(0.0, T, max(n // 4, 4), order=4, gamma=gamma + 1.0, cluster="left")


def _t_matrix(s: np.ndarray, T: float, n_t: int, gamma: float, scheme: str
              ) -> tuple[np.ndarray, np.ndarray]:
    """Per-s-node t-quadrature on [s, T], clustered at t = s; shapes (n_s, n_t)."""
    if scheme == "midpoint":
        u, w = graded_midpoint(0.0, 1.0, n_t, gamma=gamma, cluster="left")
    else:
        u, w = graded_gauss(0.0, 1.0, max(n_t // 4, 4), order=4, gamma=gamma + 1.0, cluster="left")
    span = (T - s)[:, None]
    return s[:, None] + span * u[None, :], span * w[None, :]


def _eval_components(kernels: Sequence[VolterraKernel], t_mat: np.ndarray, s: np.ndarray
                     ) -> np.ndarray:
    s_mat = np.broadcast_to(s[:, None], t_mat.shape)
    out = np.empty((len(kernels),) + t_mat.shape)
    for i, k in enumerate(kernels):
        out[i] = k.eval(t_mat.ravel(), s_mat.ravel()).reshape(t_mat.shape)
    return out


def _stieltjes_trace(kernel: VolterraKernel, measure: IntensityMeasure, T: float,
                     grid: QuadratureGrid) -> float:
    """Trace term against a singular measure via a Stieltjes sum."""
    edges = np.linspace(0.0, T, grid.n_singular + 1)
    dmu = measure.cdf_increments(edges)
    mids = 0.5 * (edges[1:] + edges[:-1])
    live = dmu > 0.0
    mids, dmu = mids[live], dmu[live]
    gamma_t = grading_exponent(max(0.0, -2.0 * kernel.diag_exponent), kernel.grading_hurst)
    t_mat, w_mat = _t_matrix(mids, T, grid.n_t, gamma_t, "midpoint")
    vals = _eval_components([kernel], t_mat, mids)[0]
    norms = np.sum(vals * vals * w_mat, axis=1)
    return float(np.sum(norms * dmu))


def _distance_core(spec1: GaussianProcessSpec, spec2: GaussianProcessSpec,
                   grid: QuadratureGrid, scheme: str, use_trace_norm: bool
                   ) -> DistanceReport:
    if abs(spec1.T - spec2.T) > 1e-12:
        raise DomainError("horizon mismatch between process specs")
    T = spec1.T
    spec1.validate_ordering()
    spec2.validate_ordering()
    kernels1 = [k for k, _ in spec1.components]
    kernels2 = [k for k, _ in spec2.components]
    measures1 = [m for _, m in spec1.components]
    measures2 = [m for _, m in spec2.components]
    m, n = len(kernels1), len(kernels2)

    singular1 = measures1[0].is_singular
    singular2 = measures2[0].is_singular
    if (singular1 or singular2) and (m > 1 or n > 1):
        raise DomainError("singular measures are supported at unit multiplicity only")

    gamma_s, gamma_t = _pair_gammas(kernels1, kernels2)

    # trace terms (component sums); singular measure -> Stieltjes sum
    def trace_side(kernels, measures):
        total = 0.0
        if measures[0].is_singular:
            return _stieltjes_trace(kernels[0], measures[0], T, grid)
        s, ws = _s_nodes(T, grid.n_s, gamma_s, scheme)
        t_mat, w_mat = _t_matrix(s, T, grid.n_t, gamma_t, scheme)
        vals = _eval_components(kernels, t_mat, s)
        norms = np.einsum("ist,ist,st->is", vals, vals, w_mat)
        for i, meas in enumerate(measures):
            total += float(np.sum(norms[i] * meas.density_at(s) * ws))
        return total

    trace = trace_side(kernels1, measures1) + trace_side(kernels2, measures2)

    # cross term against the geometric mean of the leading measures
    if singular1 != singular2:
        # mutually singular: geometric mean vanishes, any coupling is optimal
        cross = 0.0
        corr = None
    else:
        s, ws = _s_nodes(T, grid.n_s, gamma_s, scheme)
        t_mat, w_mat = _t_matrix(s, T, grid.n_t, gamma_t, scheme)
        v1 = _eval_components(kernels1, t_mat, s)
        v2 = _eval_components(kernels2, t_mat, s)
        if singular1 and singular2:
            if measures1[0].singular_tag != measures2[0].singular_tag:
                raise DomainError("cannot mix distinct singular measures")
            # identical singular tags: geometric mean is the measure itself
            edges = np.linspace(0.0, T, grid.n_singular + 1)
            dgeo = measures1[0].cdf_increments(edges)
            mids = 0.5 * (edges[1:] + edges[:-1])
            live = dgeo > 0.0
            mids, dgeo = mids[live], dgeo[live]
            t_m, w_m = _t_matrix(mids, T, grid.n_t, gamma_t, "midpoint")
            ip = np.sum(_eval_components(kernels1, t_m, mids)[0]
                        * _eval_components(kernels2, t_m, mids)[0] * w_m, axis=1)
            cross = float(np.sum(np.abs(ip) * dgeo))
            corr = np.where(ip >= 0.0, 1.0, -1.0)
        elif use_trace_norm:
            rho1 = np.stack([meas.density_at(s) for meas in measures1])
            rho2 = np.stack([meas.density_at(s) for meas in measures2])
            # Radon-Nikodym ratios against the leading measures, 0/0 -> 0
            with np.errstate(divide="ignore", invalid="ignore"):
                r1 = np.sqrt(np.where(rho1[0] > 0.0, rho1 / rho1[0], 0.0))
                r2 = np.sqrt(np.where(rho2[0] > 0.0, rho2 / rho2[0], 0.0))
            ip = np.einsum("ist,jst,st->sij", v1, v2, w_mat)
            scaled = ip * r1.T[:, :, None] * r2.T[:, None, :]
            u_svd, sing, vh_svd = np.linalg.svd(scaled, full_matrices=False)
            tracenorm = np.sum(sing, axis=1)
            geo = np.sqrt(rho1[0] * rho2[0])
            cross = float(np.sum(tracenorm * geo * ws))
            corr = np.matmul(u_svd, vh_svd)  # per-node optimal coupling factor
        else:
            ip = np.einsum("st,st,st->s", v1[0], v2[0], w_mat)
            geo = np.sqrt(measures1[0].density_at(s) * measures2[0].density_at(s))
            cross = float(np.sum(np.abs(ip) * geo * ws))
            corr = np.where(ip >= 0.0, 1.0, -1.0)

    meta = grid.meta()
    meta.update({"scheme": scheme, "gamma_s": gamma_s, "gamma_t": gamma_t,
                 "multiplicity": [m, n]})
    return DistanceReport(
        distance_squared=trace - 2.0 * cross,
        trace_term=trace,
        cross_term=cross,
        optimal_correlation=corr,
        grid_meta=meta,
    )


def _run_with_crosscheck(run: Callable[[str], DistanceReport],
                         grid: QuadratureGrid) -> DistanceReport:
    report = run("midpoint")
    if grid.crosscheck_rtol is not None:
        alt = run("gauss")
        scale = max(abs(report.distance_squared), abs(report.trace_term), 1e-30)
        rel = abs(alt.distance_squared - report.distance_squared) / scale
        if rel > grid.crosscheck_rtol:
            raise ConvergenceError(
                f"two-scheme quadrature disagreement {rel:.3e} exceeds "
                f"tolerance {grid.crosscheck_rtol:.3e}")
        report.grid_meta["crosscheck_rel"] = rel
    return report


def continuous_aw_unit(spec1: GaussianProcessSpec, spec2: GaussianProcessSpec,
                       grid: QuadratureGrid | None = None) -> DistanceReport:
    """Squared adapted Wasserstein distance, unit multiplicity canonical specs."""
    if spec1.multiplicity != 1 or spec2.multiplicity != 1:
        raise DomainError("continuous_aw_unit requires unit multiplicity")
    grid = grid or QuadratureGrid()
    return _run_with_crosscheck(
        lambda scheme: _distance_core(spec1, spec2, grid, scheme, use_trace_norm=False), grid)


def continuous_aw_multi(spec1: GaussianProcessSpec, spec2: GaussianProcessSpec,
                        grid: QuadratureGrid | None = None) -> DistanceReport:
    """Squared adapted Wasserstein distance for finite multiplicities.

    At each node the matrix of scaled component inner products is reduced by
    singular value decomposition; its trace norm enters the cross term and
    U V^H is the per-node optimal coupling factor.
    """
    grid = grid or QuadratureGrid()
    return _run_with_crosscheck(
        lambda scheme: _distance_core(spec1, spec2, grid, scheme, use_trace_norm=True), grid)


def continuous_aw_fbm(h1: float, h2: float, T: float = 1.0,
                      grid: QuadratureGrid | None = None) -> DistanceReport:
    """Squared adapted Wasserstein distance between fractional Brownian motions.

    Computed as the double integral of the squared kernel difference, which
    is valid because both kernels are nonnegative (the absolute value in the
    cross term is inactive).
    """
    grid = grid or QuadratureGrid()
    spec1, spec2 = fbm_spec(h1, T), fbm_spec(h2, T)
    k1, k2 = spec1.components[0][0], spec2.components[0][0]

    def run(scheme: str) -> DistanceReport:
        gamma_s, gamma_t = _pair_gammas([k1], [k2])
        s, ws = _s_nodes(T, grid.n_s, gamma_s, scheme)
        t_mat, w_mat = _t_matrix(s, T, grid.n_t, gamma_t, scheme)
        v1 = _eval_components([k1], t_mat, s)[0]
        v2 = _eval_components([k2], t_mat, s)[0]
        diff_sq = np.einsum("st,st->s", (v1 - v2) ** 2, w_mat)
        dist = float(np.sum(diff_sq * ws))
        tr = float(np.sum(np.einsum("st,st->s", v1 * v1 + v2 * v2, w_mat) * ws))
        ip = np.einsum("st,st,st->s", v1, v2, w_mat)
        cross = float(np.sum(np.abs(ip) * ws))
        meta = grid.meta()
        meta.update({"scheme": scheme, "gamma_s": gamma_s, "gamma_t": gamma_t,
                     "h1": h1, "h2": h2, "T": T})
        return DistanceReport(distance_squared=dist, trace_term=tr, cross_term=cross,
                              optimal_correlation=np.where(ip >= 0.0, 1.0, -1.0),
                              grid_meta=meta)

    return _run_with_crosscheck(run, grid)


def triangular_integral(spec1: GaussianProcessSpec, spec2: GaussianProcessSpec,
                        partition_count: int, grid: QuadratureGrid | None = None) -> float:
    """Partition sum of Hilbert-Schmidt norms of diagonal-block compressions.

    For a uniform partition of [0, T] into ``partition_count`` cells, returns
    sum over cells of [ int int_{cell^2} |<k1(., r1), k2(., r2)>|^2
    mu1(dr1) mu2(dr2) ]^{1/2}.  As the partition refines this approaches the
    cross term of the unit-multiplicity distance formula.
    """
    if spec1.multiplicity != 1 or spec2.multiplicity != 1:
        raise DomainError("triangular_integral requires unit multiplicity")
    if abs(spec1.T - spec2.T) > 1e-12:
        raise DomainError("horizon mismatch between process specs")
    if partition_count < 1:
        raise DomainError("partition_count must be >= 1")
    grid = grid or QuadratureGrid()
    T = spec1.T
    k1, meas1 = spec1.components[0]
    k2, meas2 = spec2.components[0]
    if meas1.is_singular or meas2.is_singular:
        raise DomainError("triangular_integral requires absolutely continuous measures")

    gamma_s, gamma_t = _pair_gammas([k1], [k2])
    q = int(np.clip(grid.n_s // partition_count, 2, 64))
    edges = np.linspace(0.0, T, partition_count + 1)

    total = 0.0
    for c in range(partition_count):
        lo, hi = edges[c], edges[c + 1]
        if c == 0 and (k1.singular_at_origin or k2.singular_at_origin
                       or k1.origin_exponent > 0 or k2.origin_exponent > 0):
            r, w = graded_midpoint(lo, hi, q, gamma=gamma_s, cluster="left")
        else:
            r, w = graded_midpoint(lo, hi, q, gamma=1.0, cluster="left")
        r1 = np.repeat(r, q)
        r2 = np.tile(r, q)
        rmax = np.maximum(r1, r2)
        t_mat, w_mat = _t_matrix(rmax, T, grid.n_t, gamma_t, "midpoint")
        ip = np.sum(_eval_components([k1], t_mat, r1)[0]
                    * _eval_components([k2], t_mat, r2)[0] * w_mat, axis=1)
        w1 = (meas1.density_at(r) * w)[np.repeat(np.arange(q), q)]
        w2 = (meas2.density_at(r) * w)[np.tile(np.arange(q), q)]
        total += float(np.sqrt(np.sum(ip * ip * w1 * w2)))
    return total


# ---------------------------------------------------------------------------
# trace-norm bound and the non-canonical counterexample
# ---------------------------------------------------------------------------

def _psd_sqrt(a: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    vals, vecs = np.linalg.eigh(0.5 * (a + a.T))
    scale = max(1.0, float(np.abs(vals).max()))
    if vals.min() < -tol * scale:
        raise DomainError(f"matrix is not positive semidefinite (eigenvalue {vals.min():.3e})")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def trace_bound_optimal_gamma(a: np.ndarray, b: np.ndarray, c: np.ndarray
                              ) -> tuple[float, np.ndarray]:
    """Sharp bound on tr(C Gamma^T) over feasible cross-covariances Gamma.

    Feasible means the block matrix [[A, Gamma], [Gamma^T, B]] is positive
    semidefinite.  Returns (bound, gamma) with bound = ||A^1/2 C B^1/2||_tr
    and gamma = A^1/2 U V B^1/2 attaining it, where A^1/2 C B^1/2 = U S V.
    """
    c = np.asarray(c, dtype=float)
    ra = _psd_sqrt(a)
    rb = _psd_sqrt(b)
    if c.shape != (ra.shape[0], rb.shape[0]):
        raise DomainError("C must be m x n for A (m x m) and B (n x n)")
    u, sing, vh = np.linalg.svd(ra @ c @ rb, full_matrices=False)
    bound = float(np.sum(sing))
    gamma = ra @ u @ vh @ rb
    return bound, gamma


_LEVY_POLY = (3.0, -12.0, 10.0)


def _levy_kernel() -> CallableKernel:
    def phi(t, s):
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.where(t > 0.0, s / np.where(t > 0.0, t, 1.0), 0.0)
        return _LEVY_POLY[0] + _LEVY_POLY[1] * u + _LEVY_POLY[2] * u * u
    return CallableKernel(T=1.0, fn=phi)


def levy_noncanonical_check(grid: QuadratureGrid | None = None) -> dict:
    """Numeric demonstration that the distance formula needs canonicality.

    The kernel phi_t(s) = 3 - 12 (s/t) + 10 (s/t)^2 reproduces the Brownian
    covariance min(t, s), yet feeding this non-canonical representation into
    the distance formula against the true Brownian kernel yields a strictly
    positive value even though both processes are standard Brownian motions.
    """
    grid = grid or QuadratureGrid()
    phi = _levy_kernel()
    leb = IntensityMeasure.lebesgue()

    # (a) covariance reproduction on a grid of (t, s) pairs
    pts = np.linspace(0.1, 1.0, 10)
    worst = 0.0
    for t in pts:
        for s in pts:
            r, w = graded_midpoint(0.0, min(t, s), grid.n_t, gamma=1.0, cluster="left")
            val = float(np.sum(phi.eval(np.full_like(r, t), r)
                               * phi.eval(np.full_like(r, s), r) * w))
            worst = max(worst, abs(val - min(t, s)))

    spec_phi = GaussianProcessSpec(components=[(phi, leb)], T=1.0)
    spec_bm = GaussianProcessSpec(components=[(Brownian(T=1.0), leb)], T=1.0)
    naive = continuous_aw_unit(spec_phi, spec_bm, grid)
    self_bm = continuous_aw_unit(spec_bm, spec_bm, grid)
    return {
        "covariance_max_abs_err": worst,
        "naive_distance_squared": naive.distance_squared,
        "bm_self_distance_squared": self_bm.distance_squared,
    }


# ---------------------------------------------------------------------------
# transfer-principle discretization
# ---------------------------------------------------------------------------

def fbm_cov_matrix(h: float, times: np.ndarray) -> CovMatrix:
    """Exact fBM covariance 0.5 (t^2H + s^2H - |t-s|^2H) at the given times."""
    t = np.asarray(times, dtype=float)[:, None]
    s = np.asarray(times, dtype=float)[None, :]
    r = 0.5 * (t ** (2 * h) + s ** (2 * h) - np.abs(t - s) ** (2 * h))
    return CovMatrix(entries=0.5 * (r + r.T))


def discretized_fbm_aw(h1: float, h2: float, T: float, n_steps: int) -> DistanceReport:
    """Discrete-formula approximation of the continuous fBM distance.

    Samples both processes at midpoints of a uniform n-step grid and scales
    the discrete squared distance by the step so that it approximates the
    L^2([0, T]) path cost.
    """
    dt = T / n_steps
    times = (np.arange(n_steps) + 0.5) * dt
    rep = discrete_aw(fbm_cov_matrix(h1, times), fbm_cov_matrix(h2, times))
    return DistanceReport(
        distance_squared=rep.distance_squared * dt,
        trace_term=rep.trace_term * dt,
        cross_term=rep.cross_term * dt,
        optimal_correlation=rep.optimal_correlation,
        grid_meta={"n_steps": n_steps, "dt": dt, "scheme": "cholesky-midpoint-sampling"},
    )
