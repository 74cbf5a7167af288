"""Codimension-one statistical immersions.

An :class:`Immersion` maps an n-dimensional chart into an (n+1)-dimensional
ambient model. :func:`gauss_weingarten` splits the ambient derivatives of
pushed-forward fields and of the unit normal ξ into tangential and normal
parts for the ambient connection, its dual and its Levi-Civita connection:

    ∇̃_X f_*Y  = f_*∇_X Y  + h(X,Y) ξ       ∇̃_X ξ  = −f_*A*X + τ*(X) ξ
    ∇̃*_X f_*Y = f_*∇*_X Y + h*(X,Y) ξ      ∇̃*_X ξ = −f_*A X  + τ(X) ξ
    ∇̃°_X f_*Y = f_*∇°_X Y + II(X,Y) ξ      ∇̃°_X ξ = −f_*S X

with b = h − II (b(X,Y) = g(BX,Y)), B* = A* − S and ν = −(2/n) tr B*.
Linear operators are stored as ``M[k, i]`` (column i is M∂i).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateError, ImmersionError, StructureError, TheoremViolation, UsageError
from .model_zoo import build_model, sample_points
from .statmanifold import (
    DEFAULT_TOLERANCES,
    ChristoffelField,
    StatisticalManifoldModel,
    Tolerances,
    check_statistical,
    constant_curvature_fit,
    covariant_derivative_difference,
    curvature,
    dual_connection,
    hessian_curvature_residual,
    levi_civita,
    levi_civita_field,
)
from .tensor_core import (
    DEFAULT_SCHEME,
    ChartDomain,
    FDScheme,
    as_point,
    fd_derivative,
    fd_gradient,
    frame_components,
    metric_inverse,
    orthonormal_frame,
)

__all__ = [
    "Immersion",
    "HypersurfaceData",
    "TheoremReport",
    "IMMERSIONS",
    "build_immersion",
    "immersion_samples",
    "immersion_hypotheses",
    "unit_normal",
    "induce_structure",
    "induced_definition_residual",
    "gauss_weingarten",
    "gauss_equation_residual",
    "check_equiaffine",
    "lemma41_residuals",
    "theorem42_check",
    "codazzi_ricci_residuals",
]


@dataclass(frozen=True)
class Immersion:
    """f: M -> M̃ of codimension one.

    ``jacobian(p)`` has shape (n+1, n); ``second(p)`` has shape (n+1, n, n)
    with ``second[a, i, j] = ∂_i∂_j f^a``. Both fall back to finite
    differences of ``map`` when not supplied.
    """

    label: str
    map: Callable[[np.ndarray], np.ndarray]
    ambient: StatisticalManifoldModel
    source: ChartDomain
    normal_orientation: int = 1
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None
    second: Callable[[np.ndarray], np.ndarray] | None = None
    sample_box: tuple | None = None
    scheme: FDScheme = DEFAULT_SCHEME
    known: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.ambient.dim != self.source.dim + 1:
            raise UsageError("codimension must be one")
        if self.normal_orientation not in (1, -1):
            raise UsageError("normal_orientation must be +1 or -1")

    @property
    def dim(self) -> int:
        return self.source.dim

    def point(self, p) -> np.ndarray:
        p = as_point(p, self.dim)
        self.source.check(p)
        return p

    def image(self, p) -> np.ndarray:
        q = as_point(self.map(self.point(p)), self.ambient.dim)
        self.ambient.domain.check(q)
        return q

    def jac(self, p) -> np.ndarray:
        p = self.point(p)
        if self.jacobian is not None:
            J = np.asarray(self.jacobian(p), dtype=float)
        else:
            J = fd_gradient(self.map, p, self.scheme, self.source).T
        sv = np.linalg.svd(J, compute_uv=False)
        if sv[-1] <= 1e-10 * max(sv[0], 1e-300):
            raise ImmersionError(f"{self.label}: Jacobian is rank deficient at {p.tolist()}")
        return J

    def hess(self, p) -> np.ndarray:
        p = self.point(p)
        if self.second is not None:
            return np.asarray(self.second(p), dtype=float)
        # second[a, i, j]: derivative along i of column j of the Jacobian
        return fd_gradient(lambda q: self.jac(q), p, self.scheme, self.source).transpose(1, 0, 2)


# -------------------------------------------------------------- normal field


def unit_normal(f: Immersion, p) -> np.ndarray:
    """Unit ambient vector g̃-orthogonal to the image of the tangent space.

    Orientation: the last non-negligible component (scanning from the last
    ambient coordinate) is positive, multiplied by ``f.normal_orientation``.
    """
    J = f.jac(p)
    gt = f.ambient.g(f.image(p))
    _, _, vt = np.linalg.svd(J.T @ gt)
    xi = vt[-1]
    xi = xi / math.sqrt(xi @ gt @ xi)
    big = np.abs(xi) > 1e-12 * np.abs(xi).max()
    sign = np.sign(xi[np.nonzero(big)[0][-1]])
    return f.normal_orientation * sign * xi


def _split(J, xi, V):
    """Solve [J | ξ] c = V for the tangential and normal parts of V (columns)."""
    frame = np.column_stack([J, xi])
    coeffs = np.linalg.solve(frame, V.reshape(frame.shape[0], -1))
    n = J.shape[1]
    return coeffs[:n].reshape((n,) + V.shape[1:]), coeffs[n].reshape(V.shape[1:])


def _ambient_second(f, p, G, J):
    """V[a, i, j] = components of ∇̃_{∂i} f_*∂j for ambient symbols ``G``."""
    return f.hess(p) + np.einsum("abc,bi,cj->aij", G, J, J)


# -------------------------------------------------------- induced structure


def induce_structure(f: Immersion) -> StatisticalManifoldModel:
    """(∇, g) on M with g = f*g̃ and g(∇_X Y, Z) = g̃(∇̃_X f_*Y, f_*Z)."""

    def metric(p):
        J = f.jac(p)
        return J.T @ f.ambient.g(f.image(p)) @ J

    def conn(p):
        J = f.jac(p)
        gt = f.ambient.g(f.image(p))
        V = _ambient_second(f, p, f.ambient.connection(f.image(p)), J)
        low = np.einsum("aij,ab,bk->ijk", V, gt, J)
        return np.einsum("kl,ijl->kij", metric_inverse(J.T @ gt @ J), low)

    return StatisticalManifoldModel(
        label=f"induced by {f.label}",
        domain=f.source,
        metric=metric,
        connection=ChristoffelField(conn, "composed", f"induced by {f.label}"),
        scheme=f.scheme,
        sample_box=f.sample_box,
    )


def induced_definition_residual(f: Immersion, p) -> float:
    """max |g(∇_X Y, Z) − g̃(∇̃_X f_*Y, f_*Z)| with ∇ from the normal split."""
    data = gauss_weingarten(f, p)
    J = f.jac(p)
    gt = f.ambient.g(f.image(p))
    V = _ambient_second(f, p, f.ambient.connection(f.image(p)), J)
    lhs = np.einsum("kij,kl->ijl", data.nabla, data.g)
    rhs = np.einsum("aij,ab,bl->ijl", V, gt, J)
    return float(np.abs(lhs - rhs).max())


@dataclass
class HypersurfaceData:
    point: list
    g: np.ndarray
    xi: np.ndarray
    nabla: np.ndarray
    nabla_star: np.ndarray
    nabla_lc: np.ndarray
    h: np.ndarray
    h_star: np.ndarray
    II: np.ndarray
    A: np.ndarray
    A_star: np.ndarray
    S: np.ndarray
    tau: np.ndarray
    tau_star: np.ndarray
    lc_normal: np.ndarray
    b: np.ndarray
    B: np.ndarray
    B_star: np.ndarray
    nu: float
    reconstruction: float

    @property
    def frame(self) -> np.ndarray:
        return orthonormal_frame(self.g)

    def conjugacy_residual(self) -> float:
        """max of |g(AX,Y) − h(X,Y)| and |g(A*X,Y) − h*(X,Y)|."""
        r1 = np.abs(self.A.T @ self.g - self.h).max()
        r2 = np.abs(self.A_star.T @ self.g - self.h_star).max()
        return float(max(r1, r2))

    def in_frame(self) -> dict:
        """Forms, operators and covectors expressed in the g-orthonormal frame."""
        E = self.frame
        Einv = np.linalg.inv(E)
        form = lambda m: E.T @ m @ E
        op = lambda m: Einv @ m @ E
        return {
            "h": form(self.h),
            "h_star": form(self.h_star),
            "II": form(self.II),
            "b": form(self.b),
            "A": op(self.A),
            "A_star": op(self.A_star),
            "S": op(self.S),
            "B": op(self.B),
            "B_star": op(self.B_star),
            "tau": self.tau @ E,
            "tau_star": self.tau_star @ E,
        }


def gauss_weingarten(f: Immersion, p) -> HypersurfaceData:
    p = f.point(p)
    n = f.dim
    q = f.image(p)
    J = f.jac(p)
    xi = unit_normal(f, p)
    gt = f.ambient.g(q)
    g = J.T @ gt @ J
    dxi = fd_gradient(lambda s: unit_normal(f, s), p, f.scheme, f.source).T  # dxi[a, i] = ∂_i ξ^a

    connections = {
        "primal": f.ambient.connection(q),
        "dual": dual_connection(f.ambient, q),
        "lc": levi_civita(f.ambient, q),
    }
    parts = {}
    recon = 0.0
    for key, G in connections.items():
        V = _ambient_second(f, p, G, J)
        tang, normal = _split(J, xi, V)
        W = dxi + np.einsum("abc,bi,c->ai", G, J, xi)
        w_tang, w_norm = _split(J, xi, W)
        rebuilt = np.einsum("ak,kij->aij", J, tang) + np.einsum("a,ij->aij", xi, normal)
        recon = max(recon, float(np.abs(rebuilt - V).max()))
        parts[key] = (tang, normal, -w_tang, w_norm)

    nabla, h, A_star, tau_star = parts["primal"]
    nabla_star, h_star, A, tau = parts["dual"]
    nabla_lc, II, S, lc_normal = parts["lc"]
    b = h - II
    B = metric_inverse(g) @ b
    B_star = A_star - S
    return HypersurfaceData(
        point=p.tolist(),
        g=g,
        xi=xi,
        nabla=nabla,
        nabla_star=nabla_star,
        nabla_lc=nabla_lc,
        h=h,
        h_star=h_star,
        II=II,
        A=A,
        A_star=A_star,
        S=S,
        tau=tau,
        tau_star=tau_star,
        lc_normal=lc_normal,
        b=b,
        B=B,
        B_star=B_star,
        nu=float(-2.0 / n * np.trace(B_star)),
        reconstruction=recon,
    )


def gauss_equation_residual(f: Immersion, p) -> float:
    """Intrinsic curvature of ∇ against tan(R̃(f_*X, f_*Y)f_*Z) + h(Y,Z)A*X − h(X,Z)A*Y."""
    p = f.point(p)
    induced = induce_structure(f)
    R = curvature(induced.connection, p, f.scheme, f.source)
    q = f.image(p)
    Rt = curvature(f.ambient.connection, q, f.ambient.scheme, f.ambient.domain)
    J = f.jac(p)
    xi = unit_normal(f, p)
    pushed = np.einsum("aijk,ix,jy,kz->axyz", Rt, J, J, J)
    tang, _ = _split(J, xi, pushed)
    data = gauss_weingarten(f, p)
    predicted = tang + np.einsum("yz,lx->lxyz", data.h, data.A_star) - np.einsum("xz,ly->lxyz", data.h, data.A_star)
    return float(np.abs(frame_components(R - predicted, data.frame, 1)).max())


# ------------------------------------------------------------- theorem checks


@dataclass
class TheoremReport:
    name: str
    residuals: dict
    tolerances: dict
    verdict: str = ""
    predicted: dict = field(default_factory=dict)
    computed: dict = field(default_factory=dict)
    hypotheses: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.verdict:
            self.verdict = self._verdict()

    def _verdict(self) -> str:
        ok = all(self.residuals[k] < self.tolerances[k] for k in self.residuals)
        return "pass" if ok else "fail"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "verdict": self.verdict,
            "residuals": dict(self.residuals),
            "tolerances": dict(self.tolerances),
            "predicted": dict(self.predicted),
            "computed": dict(self.computed),
            "hypotheses": dict(self.hypotheses),
            "info": dict(self.info),
        }


def _samples(f: Immersion, samples):
    samples = list(samples)
    if not samples:
        raise UsageError("at least one sample point is required")
    return [f.point(s) for s in samples]


def _curvature_pair(model, samples, tol):
    """(k, k°) fits for a model's connection and its Levi-Civita connection."""
    pts = list(samples)
    if len(pts) < 2:
        pts = pts + [pts[0]]
    fit = constant_curvature_fit(model, None, pts, tol.curvature)
    fit_lc = constant_curvature_fit(model, levi_civita_field(model), pts, tol.curvature)
    return fit, fit_lc


def immersion_hypotheses(f: Immersion, samples, tol: Tolerances = DEFAULT_TOLERANCES, c_tilde=None) -> dict:
    """Evaluate the standing assumptions of the hypersurface results.

    ``trivial_constant`` : induced ∇ = ∇° and of constant curvature k.
    ``ambient_constant_distinct`` : ambient of constant curvature k̃ with
    Levi-Civita constant curvature k̃° ≠ k̃.
    ``ambient_hessian`` : ambient flat with constant Hessian curvature ``c_tilde``.
    """
    pts = _samples(f, samples)
    induced = induce_structure(f)
    trivial = 0.0
    for p in pts:
        E = orthonormal_frame(induced.g(p))
        diff = induced.connection(p) - levi_civita(induced, p)
        trivial = max(trivial, float(np.abs(frame_components(diff, E, 1)).max()))
    if f.dim >= 2:
        fit, fit_lc = _curvature_pair(induced, pts, tol)
        k, k_ok = fit.k_hat, fit.verdict == "constant"
    else:
        k, k_ok = 0.0, True
    images = [f.image(p) for p in pts]
    afit, afit_lc = _curvature_pair(f.ambient, images, tol)
    out = {
        "induced_nonlevi_civita": trivial,
        "induced_k": k,
        "induced_constant": k_ok,
        "ambient_k": afit.k_hat,
        "ambient_k_residual": afit.max_residual,
        "ambient_k_lc": afit_lc.k_hat,
        "ambient_k_lc_residual": afit_lc.max_residual,
    }
    out["trivial_constant"] = bool(trivial < tol.fd and k_ok)
    out["ambient_constant_distinct"] = bool(
        afit.verdict == "constant" and afit_lc.verdict == "constant" and abs(afit.k_hat - afit_lc.k_hat) > tol.fd
    )
    if c_tilde is not None:
        try:
            hres = hessian_curvature_residual(f.ambient, images, c_tilde, tol)
        except StructureError:
            hres = math.inf
        out["ambient_hessian_residual"] = hres
        out["ambient_hessian"] = bool(hres < tol.hessian)
    return out


def check_equiaffine(f: Immersion, samples, tol: Tolerances = DEFAULT_TOLERANCES) -> TheoremReport:
    """Residual max |τ*(e_a)| over samples (orthonormal e_a)."""
    pts = _samples(f, samples)
    hyp = immersion_hypotheses(f, pts, tol)
    tau = max(float(np.abs(gauss_weingarten(f, p).in_frame()["tau_star"]).max()) for p in pts)
    report = TheoremReport(
        name="equiaffine",
        residuals={"tau_star": tau},
        tolerances={"tau_star": tol.statistical},
        hypotheses=hyp,
    )
    if not (hyp["trivial_constant"] and hyp["ambient_constant_distinct"]):
        report.verdict = "hypotheses_not_met"
    return report


def _lemma_predictions(k, c_tilde, nu):
    return {
        "A_star": k * nu / c_tilde,
        "B_star": -nu / 2,
        "h_over_g": c_tilde / nu,
        "A": c_tilde / nu,
        "B": (2 * c_tilde**2 - (2 * k + c_tilde) * nu**2) / (2 * nu * c_tilde),
    }


def lemma41_residuals(f: Immersion, samples, k: float, c_tilde: float, tol: Tolerances = DEFAULT_TOLERANCES) -> TheoremReport:
    """Compare A*, B*, h, A, B with their scalar forms in terms of ν, k and c̃.

    ν is taken as −(2/n) tr B* at each point; the B* line then measures how
    far B* is from a multiple of the identity.
    """
    if c_tilde == 0:
        raise UsageError("c_tilde must be non-zero")
    pts = _samples(f, samples)
    eye = np.eye(f.dim)
    res = dict.fromkeys(("A_star", "B_star", "h", "A", "B", "nu_h_equals_c_g"), 0.0)
    nus = []
    for p in pts:
        data = gauss_weingarten(f, p)
        nu = data.nu
        if abs(nu) < 1e-12:
            raise DegenerateError(f"ν vanishes at {p.tolist()}")
        nus.append(nu)
        pred = _lemma_predictions(k, c_tilde, nu)
        fr = data.in_frame()
        res["A_star"] = max(res["A_star"], float(np.abs(fr["A_star"] - pred["A_star"] * eye).max()))
        res["B_star"] = max(res["B_star"], float(np.abs(fr["B_star"] - pred["B_star"] * eye).max()))
        res["h"] = max(res["h"], float(np.abs(fr["h"] - pred["h_over_g"] * eye).max()))
        res["A"] = max(res["A"], float(np.abs(fr["A"] - pred["A"] * eye).max()))
        res["B"] = max(res["B"], float(np.abs(fr["B"] - pred["B"] * eye).max()))
        res["nu_h_equals_c_g"] = max(res["nu_h_equals_c_g"], float(np.abs(nu * fr["h"] - c_tilde * eye).max()))
    nu_mean = float(np.mean(nus))
    return TheoremReport(
        name="shape_operators",
        residuals=res,
        tolerances=dict.fromkeys(res, tol.statistical),
        predicted={key: float(v) for key, v in _lemma_predictions(k, c_tilde, nu_mean).items()},
        computed={"nu": nu_mean, "nu_spread": float(np.ptp(nus))},
        info={"k": k, "c_tilde": c_tilde},
    )


def theorem42_check(f: Immersion, samples, k: float, c_tilde: float, tol: Tolerances = DEFAULT_TOLERANCES) -> TheoremReport:
    """Riemannian shape operator against S = ±(|c̃|/2c̃)√(2k+c̃)·I.

    For c̃ > 0 this is ±½√(2k+c̃)·I. The sign branch with the smaller
    residual is selected; both residuals are reported.
    """
    if c_tilde == 0:
        raise UsageError("c_tilde must be non-zero")
    disc = 2 * k + c_tilde
    if disc < -1e-9:
        raise TheoremViolation(f"2k + c̃ = {disc:.6g} is negative")
    disc = max(disc, 0.0)
    pts = _samples(f, samples)
    eye = np.eye(f.dim)
    s = abs(c_tilde) / (2 * c_tilde) * math.sqrt(disc)
    worst = {"+": 0.0, "-": 0.0}
    nu_worst = {"+": 0.0, "-": 0.0}
    nus = []
    S_diag = []
    for p in pts:
        data = gauss_weingarten(f, p)
        S = data.in_frame()["S"]
        S_diag.append(np.diag(S).tolist())
        nus.append(data.nu)
        for sign, mult in (("+", 1), ("-", -1)):
            worst[sign] = max(worst[sign], float(np.abs(S - mult * s * eye).max()))
            if disc > 0:
                nu_pred = mult * abs(c_tilde) / math.sqrt(disc)
                nu_worst[sign] = max(nu_worst[sign], abs(data.nu - nu_pred))
    branch = "+" if worst["+"] <= worst["-"] else "-"
    residuals = {"S": worst[branch]}
    if disc > 0:
        residuals["nu"] = nu_worst[branch]
    report = TheoremReport(
        name="riemannian_shape_operator",
        residuals=residuals,
        tolerances=dict.fromkeys(residuals, tol.statistical),
        predicted={"S_scale": s if branch == "+" else -s, "two_k_plus_c": 2 * k + c_tilde},
        computed={"nu": float(np.mean(nus)), "S_diagonal": S_diag[0]},
        info={
            "branch": branch,
            "S_residual_plus": worst["+"],
            "S_residual_minus": worst["-"],
            "boundary": disc == 0.0,
        },
    )
    return report


# --------------------------------------------------------- structure lines


def _data_fields(f):
    """Point -> hypersurface quantities as arrays suitable for differencing."""
    cache = {}

    def get(p):
        key = tuple(np.round(p, 15))
        if key not in cache:
            cache[key] = gauss_weingarten(f, p)
        return cache[key]

    return get


def codazzi_ricci_residuals(
    f: Immersion,
    samples,
    c_tilde: float | None = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> TheoremReport:
    """Gauss–Codazzi–Ricci type identities of a statistical hypersurface.

    Two families are evaluated, each only when its hypotheses hold:

    * constant-curvature ambient with k̃ ≠ k̃° and trivial induced structure
      of constant curvature ("ambient_constant" lines, plus the commutator
      [B, B*] and τ*(X)B*Y − τ*(Y)B*X);
    * Hessian ambient of constant Hessian curvature ``c_tilde`` ("hessian"
      lines).

    Residuals are maxima over samples and coordinate triples, measured in the
    g-orthonormal frame.
    """
    pts = _samples(f, samples)
    hyp = immersion_hypotheses(f, pts, tol, c_tilde)
    induced = induce_structure(f)
    get = _data_fields(f)
    n = f.dim
    kt, kt_lc = hyp["ambient_k"], hyp["ambient_k_lc"]
    k_m = hyp["induced_k"]
    k_m_lc = constant_curvature_fit(induced, levi_civita_field(induced), pts + pts[:1], tol.curvature).k_hat if n >= 2 else 0.0

    lines = {}

    def bump(name, arr):
        lines[name] = max(lines.get(name, 0.0), float(np.abs(arr).max()))

    flipped_gauss = 0.0
    for p in pts:
        d = get(p)
        g = d.g
        E = d.frame
        Kf = lambda q: induced.connection(q) - levi_civita(induced, q)
        K = Kf(p)
        G = d.nabla
        DK = covariant_derivative_difference(induced.connection, Kf, p, f.scheme, f.source)  # [i, l, j, k]
        db = fd_gradient(lambda q: get(q).b, p, f.scheme, f.source)  # [i, j, k]
        dBs = fd_gradient(lambda q: get(q).B_star, p, f.scheme, f.source)  # [i, l, j]
        dtau = fd_gradient(lambda q: get(q).tau_star, p, f.scheme, f.source)  # [i, j]
        nb = db - np.einsum("mij,mk->ijk", G, d.b) - np.einsum("mik,jm->ijk", G, d.b)
        nBs = dBs + np.einsum("lim,mj->ilj", G, d.B_star) - np.einsum("lm,mij->ilj", d.B_star, G)
        ntau = dtau - np.einsum("mij,m->ij", G, d.tau_star)
        h, b, As, Bs, B, tau = d.h, d.b, d.A_star, d.B_star, d.B, d.tau_star
        eye = np.eye(n)
        T = np.einsum("jk,li->lijk", g, eye) - np.einsum("ik,lj->lijk", g, eye)  # g(Y,Z)X − g(X,Z)Y
        DKl = DK.transpose(1, 0, 2, 3)  # (∇_i K)^l_jk
        gauss_rhs = (
            DKl
            - DKl.transpose(0, 2, 1, 3)
            - np.einsum("jk,li->lijk", b, As)
            + np.einsum("ik,lj->lijk", b, As)
            + np.einsum("ik,lj->lijk", h, Bs)
            - np.einsum("jk,li->lijk", h, Bs)
        )
        # τ* terms shared by the Codazzi line for b
        tau_b = (
            np.einsum("i,jk->ijk", tau, b)
            - np.einsum("j,ik->ijk", tau, b)
            - np.einsum("j,ik->ijk", tau, h)
            + np.einsum("i,jk->ijk", tau, h)
        )
        codazzi_b = nb - nb.transpose(1, 0, 2) + tau_b
        codazzi_Bs = (
            -np.einsum("j,li->lij", tau, As)
            + np.einsum("i,lj->lij", tau, As)
            - nBs.transpose(1, 0, 2)
            + nBs.transpose(1, 2, 0)
            + np.einsum("i,lj->lij", tau, Bs)
            - np.einsum("j,li->lij", tau, Bs)
        )
        hBs = h @ Bs  # hBs[i, j] = h(∂i, B*∂j)
        bAs = b @ As  # bAs[j, i] = b(∂j, A*∂i)
        ricci = -hBs + hBs.T + ntau - ntau.T + bAs.T - bAs
        if hyp["trivial_constant"] and hyp["ambient_constant_distinct"]:
            bump("ambient_constant:gauss", frame_components(2 * (kt - kt_lc) * T - gauss_rhs, E, 1))
            flipped_gauss = max(
                flipped_gauss, float(np.abs(frame_components(-2 * (kt - kt_lc) * T - gauss_rhs, E, 1)).max())
            )
            bump("ambient_constant:codazzi_b", frame_components(codazzi_b, E, 0))
            bump("ambient_constant:codazzi_B_star", frame_components(codazzi_Bs, E, 1))
            bump("ambient_constant:ricci", frame_components(ricci, E, 0))
            # g(BY,Z)B*X − g(BX,Z)B*Y with (gB)[k, j] = g(∂k, B∂j)
            BB = np.einsum("kj,li->lijk", g @ B, Bs) - np.einsum("ki,lj->lijk", g @ B, Bs)
            bump("ambient_constant:shape_gauss", frame_components((kt - kt_lc) * T + BB, E, 1))
            bump("ambient_constant:tau_B_star", frame_components(np.einsum("i,lj->lij", tau, Bs) - np.einsum("j,li->lij", tau, Bs), E, 1))
            bump("ambient_constant:commutator", np.linalg.inv(E) @ (B @ Bs - Bs @ B) @ E)
        if c_tilde is not None and hyp.get("ambient_hessian") and hyp["trivial_constant"]:
            lhs = 0.5 * c_tilde * T - 2 * (k_m - k_m_lc) * T
            rhs = gauss_rhs - DKl + DKl.transpose(0, 2, 1, 3)
            bump("hessian:gauss", frame_components(lhs - rhs, E, 1))
            hK = np.einsum("im,mjk->ijk", h, K)  # h(X, K(Y,Z)) with X=∂i
            bump("hessian:codazzi_b", frame_components(hK - hK.transpose(1, 0, 2) + codazzi_b, E, 0))
            KA = np.einsum("ljm,mi->lij", K, As)  # K(Y, A*X)
            bump("hessian:codazzi_B_star", frame_components(KA - KA.transpose(0, 2, 1) + codazzi_Bs, E, 1))
            bump("hessian:ricci", frame_components(ricci, E, 0))
            bump("hessian:commutator", np.linalg.inv(E) @ (B @ Bs - Bs @ B) @ E)

    report = TheoremReport(
        name="structure_equations",
        residuals=lines,
        tolerances=dict.fromkeys(lines, tol.statistical),
        hypotheses=hyp,
        info={"gauss_line_with_opposite_curvature_sign": flipped_gauss} if flipped_gauss else {},
    )
    if not lines:
        report.verdict = "hypotheses_not_met"
    return report


# ------------------------------------------------------------ named examples


def _linear_immersion(label, ambient, n, matrix, offset, box, orientation=1, **known):
    matrix = np.asarray(matrix, dtype=float)
    offset = np.asarray(offset, dtype=float)
    return Immersion(
        label=label,
        map=lambda p: matrix @ p + offset,
        ambient=ambient,
        source=ChartDomain(n, lambda p: ambient.domain.contains(matrix @ p + offset), f"R^{n}"),
        jacobian=lambda p: matrix.copy(),
        second=lambda p: np.zeros((n + 1, n, n)),
        sample_box=box,
        normal_orientation=int(orientation),
        known=known,
    )


def _example_4_1(a=1.0, b=1.0, orientation=1):
    ambient = build_model("affine_r3", a=a, b=b)
    M = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    return _linear_immersion("example_4_1", ambient, 2, M, np.zeros(3), ((-2.0, 2.0),) * 2, k=0.0, orientation=orientation)


def _example_4_2(y0=1.0, n=2, orientation=1):
    n = int(n)
    if not y0 > 0:
        raise UsageError("y0 must be positive")
    ambient = build_model("upper_half_space", dim=n + 1)
    M = np.vstack([np.eye(n), np.zeros((1, n))])
    off = np.zeros(n + 1)
    off[-1] = y0
    return _linear_immersion("example_4_2", ambient, n, M, off, ((-2.0, 2.0),) * n, k=0.0, c_tilde=4.0, orientation=orientation)


def _tilted_plane(y0=1.0, c=0.5, n=2, orientation=1):
    # the last coordinate rises along u¹, so the plane meets y^{n+1} > 0 for u¹ > −y0/c
    n = int(n)
    ambient = build_model("upper_half_space", dim=n + 1)
    M = np.vstack([np.eye(n), np.zeros((1, n))])
    M[-1, 0] = c
    off = np.zeros(n + 1)
    off[-1] = y0
    lo = -0.5 * y0 / abs(c) if c else -2.0
    box = ((max(lo, -2.0), 2.0),) + ((-2.0, 2.0),) * (n - 1)
    return _linear_immersion("tilted_plane", ambient, n, M, off, box, orientation=orientation)


def _euclidean_slice(n=2, height=0.0, orientation=1):
    n = int(n)
    ambient = build_model("euclidean", dim=n + 1)
    M = np.vstack([np.eye(n), np.zeros((1, n))])
    off = np.zeros(n + 1)
    off[-1] = height
    return _linear_immersion("euclidean_slice", ambient, n, M, off, ((-2.0, 2.0),) * n, k=0.0, c_tilde=0.0, orientation=orientation)


IMMERSIONS = {
    "example_4_1": (_example_4_1, {"a": 1.0, "b": 1.0, "orientation": 1}, "(x, y) -> (0, x, y) into affine_r3"),
    "example_4_2": (_example_4_2, {"y0": 1.0, "n": 2, "orientation": 1}, "horizontal slice y^{n+1} = y0 of upper_half_space"),
    "tilted_plane": (_tilted_plane, {"y0": 1.0, "c": 0.5, "n": 2, "orientation": 1}, "u -> (u, y0 + c u¹) into upper_half_space"),
    "euclidean_slice": (_euclidean_slice, {"n": 2, "height": 0.0, "orientation": 1}, "coordinate hyperplane of flat R^{n+1}"),
}


def build_immersion(name: str, **params) -> Immersion:
    entry = IMMERSIONS.get(name)
    if entry is None:
        raise UsageError(f"unknown immersion {name!r}; choose from {sorted(IMMERSIONS)}")
    builder, defaults, _ = entry
    unknown = set(params) - set(defaults)
    if unknown:
        raise UsageError(f"{name} does not take parameters {sorted(unknown)}")
    return builder(**{**defaults, **params})


def immersion_samples(f: Immersion, count: int, seed: int) -> list[np.ndarray]:
    return sample_points(f.sample_box, count, seed)
