"""One-loop self-energy, vertex, and photon polarization with on-shell
subtraction, divergence-structure fits, and the counterterm report.

The self-energy of level a with the other level's mass m in the loop is

    Sigma(p^2) = gamma^2 int_0^1 dx I_A(a^2(x))
               + 4 gamma^2_{tau lambda} p^tau p^lambda int_0^1 dx x^2 I_E(a^2(x)),

with a^2(x) = m^2 x + p^2 x (1 - x). The physical-mass condition
Delta m^2 = Sigma(-m^2) and the slope of the subtracted self-energy in
s = p^2 + m^2 give the mass shift and the wavefunction factor. The
tensor structure gamma^2_{tau lambda} p^tau p^lambda is carried as a
separate coefficient throughout (it renormalizes a different operator).

Two evaluation paths exist. The default expands in the mass splitting
b = delta/M^2 about the symmetric point (order 0 keeps M^2 only, order 1
adds the exact first derivative in delta). The exact path integrates
with the true masses and raises a kinematic domain error where the
integrand scale turns negative, which happens for the heavier level
exactly on shell: that is the physical decay threshold with a massless
photon in the loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .core import AtomPair, DipoleTensor, contractions, gamma_sq_dot, minkowski_dot
from .errors import KinematicDomainError
from .loops import (
    MasterIntegralKind,
    RegScheme,
    a_sq,
    b_sq,
    master_integral,
    master_integral_d_scale,
)

__all__ = [
    "SelfEnergyResult",
    "DivergenceFit",
    "RenormConstants",
    "self_energy",
    "mass_shift",
    "wavefunction_Z",
    "vertex_one_loop",
    "photon_polarization",
    "photon_exchange_kernel",
    "divergence_fit",
    "counterterm_report",
]

I_A = MasterIntegralKind.I_A
I_C = MasterIntegralKind.I_C
I_D = MasterIntegralKind.I_D
I_E = MasterIntegralKind.I_E


# ---------------------------------------------------------------------------
# self-energy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SelfEnergyResult:
    """Scalar and tensor parts of Sigma at one evaluation point.

    sigma_II_coeff is the coefficient of gamma^2_{tau lambda} p^tau
    p^lambda; sigma_II is that coefficient contracted with the supplied
    on-shell-family momentum. total = sigma_I + sigma_II.
    """

    sigma_I: float
    sigma_II_coeff: float
    sigma_II: float
    total: float
    p_sq: float
    on_shell_value: float
    level: int
    path: str


def _quad(f, lo: float, hi: float, tol: float):
    val, _ = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=tol, limit=300)
    return val


def _sigma_integrals_exact(p_sq: float, m_inner_sq: float, reg: RegScheme):
    """x-integrals of I_A and x^2 I_E at the true masses."""
    if p_sq < -m_inner_sq:
        raise KinematicDomainError(
            f"p^2 = {p_sq} below -m_inner^2 = {-m_inner_sq}: the loop scale a^2(x) turns "
            "negative (decay threshold); use the expansion path"
        )
    fa = lambda x: master_integral(I_A, a_sq(x, p_sq, m_inner_sq), reg.Lambda)
    fe = lambda x: x * x * master_integral(I_E, a_sq(x, p_sq, m_inner_sq), reg.Lambda)
    return _quad(fa, 0.0, 1.0, reg.quad_tol), _quad(fe, 0.0, 1.0, reg.quad_tol)


def _sigma_integrals_expansion(s: float, level: int, atoms: AtomPair, reg: RegScheme, order: int):
    """x-integrals expanded about the symmetric mass point.

    s = p^2 + m_level^2 is the off-shell offset. At order 0 the scale is
    a0^2 = M^2 x^2 + s x(1-x); order 1 adds the exact delta-derivative,
    which shifts both the inner mass and the on-shell reference.
    """
    if s < 0:
        raise KinematicDomainError(
            f"s = p^2 + m^2 = {s} < 0: below the massless-photon branch point"
        )
    if order not in (0, 1):
        raise ValueError(f"expansion order must be 0 or 1, got {order}")
    M2 = atoms.M2
    sign = 1.0 if level == 1 else -1.0

    def a0(x):
        return M2 * x * x + s * x * (1.0 - x)

    fa = lambda x: master_integral(I_A, a0(x), reg.Lambda)
    fe = lambda x: x * x * master_integral(I_E, a0(x), reg.Lambda)
    int_a = _quad(fa, 0.0, 1.0, reg.quad_tol)
    int_e = _quad(fe, 0.0, 1.0, reg.quad_tol)
    if order == 1:
        half_delta = 0.5 * atoms.delta
        da = lambda x: x * (2.0 - x) * master_integral_d_scale(I_A, a0(x), reg.Lambda)
        de = lambda x: x * x * x * (2.0 - x) * master_integral_d_scale(I_E, a0(x), reg.Lambda)
        int_a -= sign * half_delta * _quad(da, 0.0, 1.0, reg.quad_tol)
        int_e -= sign * half_delta * _quad(de, 0.0, 1.0, reg.quad_tol)
    return int_a, int_e


def _onshell_momentum(level: int, atoms: AtomPair, p_spatial: float = 0.0) -> np.ndarray:
    m = atoms.mass(level)
    return np.array([np.sqrt(p_spatial**2 + m**2), p_spatial, 0.0, 0.0])


def self_energy(
    level: int,
    p_sq: float,
    p: np.ndarray | None,
    atoms: AtomPair,
    gamma: DipoleTensor,
    reg: RegScheme,
    path: str = "expansion",
    b_order: int = 0,
) -> SelfEnergyResult:
    """One-loop self-energy of the given level at invariant p^2.

    p is the four-vector used to contract the tensor part (defaults to
    the rest-frame on-shell momentum of the level). path is "expansion"
    (in the mass splitting, default) or "exact".
    """
    if level not in (1, 2):
        raise ValueError(f"level must be 1 or 2, got {level}")
    if path not in ("expansion", "exact"):
        raise ValueError(f"path must be 'expansion' or 'exact', got {path!r}")
    m_level_sq = atoms.mass(level) ** 2
    m_inner_sq = atoms.mass(2 if level == 1 else 1) ** 2
    if p is None:
        p = _onshell_momentum(level, atoms)
    p = np.asarray(p, dtype=float)

    gsq = contractions(gamma)["gamma_sq"]
    gpp = gamma_sq_dot(gamma, p)

    if path == "exact":
        int_a, int_e = _sigma_integrals_exact(p_sq, m_inner_sq, reg)
        if p_sq == -m_level_sq:
            int_a0, int_e0 = int_a, int_e
        elif m_level_sq > m_inner_sq:
            # the heavier level's mass shell sits below the decay
            # threshold, so the subtraction point is unreachable here
            int_a0 = int_e0 = float("nan")
        else:
            int_a0, int_e0 = _sigma_integrals_exact(-m_level_sq, m_inner_sq, reg)
    else:
        atoms.require_small_b()
        s = p_sq + m_level_sq
        int_a, int_e = _sigma_integrals_expansion(s, level, atoms, reg, b_order)
        int_a0, int_e0 = (
            _sigma_integrals_expansion(0.0, level, atoms, reg, b_order) if s != 0.0 else (int_a, int_e)
        )

    sigma_I = gsq * int_a
    coeff = 4.0 * int_e
    sigma_II = coeff * gpp
    on_shell = gsq * int_a0 + 4.0 * int_e0 * gpp
    return SelfEnergyResult(
        sigma_I=sigma_I,
        sigma_II_coeff=coeff,
        sigma_II=sigma_II,
        total=sigma_I + sigma_II,
        p_sq=p_sq,
        on_shell_value=on_shell,
        level=level,
        path=path,
    )


def mass_shift(
    level: int,
    atoms: AtomPair,
    gamma: DipoleTensor,
    reg: RegScheme,
    p_spatial: float = 0.0,
    path: str = "expansion",
    b_order: int = 0,
) -> dict:
    """Delta m^2 = Sigma(-m^2) with the tensor part on the on-shell family.

    Returns the scalar part, the tensor coefficient, the contracted
    value at p = (E(|p|), |p|, 0, 0), and the total.
    """
    p = _onshell_momentum(level, atoms, p_spatial)
    res = self_energy(level, -atoms.mass(level) ** 2, p, atoms, gamma, reg, path=path, b_order=b_order)
    return {
        "scalar": res.sigma_I,
        "tensor_coeff": res.sigma_II_coeff,
        "tensor_contracted": res.sigma_II,
        "total": res.total,
        "p": p,
    }


def wavefunction_Z(
    level: int,
    atoms: AtomPair,
    gamma: DipoleTensor,
    reg: RegScheme,
    s_max_frac: float = 1e-3,
    n_points: int = 9,
    b_order: int = 0,
    curvature_limit: float = 1e-3,
) -> dict:
    """Extract the wavefunction factor from the subtracted self-energy.

    Fits Sigma(p^2) - Sigma(-m^2) = s * f on a one-sided grid
    s = p^2 + m^2 in [0, s_max_frac * M^2]. The scalar part of f comes
    from the I_A integrals, the tensor part (coefficient of
    gamma^2_{tau lambda} p^tau p^lambda) from the I_E integrals. The fit
    is rejected if the curvature residual exceeds curvature_limit times
    the slope magnitude.
    """
    if n_points < 3:
        raise ValueError("need at least 3 grid points")
    atoms.require_small_b()
    gsq = contractions(gamma)["gamma_sq"]
    M2 = atoms.M2
    s_grid = np.linspace(0.0, s_max_frac * M2, n_points)
    ints = [_sigma_integrals_expansion(s, level, atoms, reg, b_order) for s in s_grid]
    sub_a = gsq * (np.array([ia for ia, _ in ints]) - ints[0][0])
    sub_e = 4.0 * (np.array([ie for _, ie in ints]) - ints[0][1])

    def fit_through_origin(y):
        denom = float(s_grid @ s_grid)
        slope = float(s_grid @ y) / denom
        resid = y - slope * s_grid
        scale = abs(slope) * s_grid[-1]
        curvature = float(np.max(np.abs(resid))) / scale if scale > 0 else 0.0
        return slope, curvature

    f_scalar, curv_scalar = fit_through_origin(sub_a)
    f_tensor, curv_tensor = fit_through_origin(sub_e)
    curvature = max(curv_scalar, curv_tensor)
    accepted = curvature <= curvature_limit
    if not accepted:
        raise ArithmeticError(
            f"curvature residual {curvature:.3e} exceeds {curvature_limit:.0e} of the slope; "
            "narrow the s grid or reduce the mass splitting"
        )
    p_ref = _onshell_momentum(level, atoms)
    gpp = gamma_sq_dot(gamma, p_ref)
    return {
        "f_scalar": f_scalar,
        "f_tensor_coeff": f_tensor,
        "Z_phi_inv": 1.0 + f_scalar + f_tensor * gpp,
        "curvature_residual": curvature,
        "s_grid": s_grid,
        "p_ref": p_ref,
    }


# ---------------------------------------------------------------------------
# vertex
# ---------------------------------------------------------------------------


def _dblquad(f, tol: float) -> float:
    val, _ = integrate.dblquad(f, 0.0, 1.0, 0.0, 1.0, epsabs=0.0, epsrel=tol)
    return val


def vertex_one_loop(
    p: np.ndarray,
    p_prime: np.ndarray,
    q: np.ndarray,
    atoms: AtomPair,
    gamma: DipoleTensor,
    reg: RegScheme,
    symmetric_masses: bool = True,
) -> dict:
    """One-loop vertex correction, subtracted on the mass shell.

    The l l part gives the divergent coefficient of the bare structure
    gamma^{mu' mu} q_{mu'}:

        Gamma_I_coeff = -4 gamma^2 J,  J = int x dx dy I_D(b^2(x, y)).

    The momentum part contracts gamma^2_{alpha beta} with
    (p' - y q)_alpha (p' - y q)_beta; its y-moments K0, K1, K2 multiply
    p'p', -(p'q + qp'), and qq. Z1^{-1} = 1 - 2 gamma^2 J
    - 8 [K0 p'p' - K1 (p'q + qp') + K2 qq] contracted with gamma^2.

    With symmetric_masses the mass splitting is dropped inside b^2
    (leading order in b), mirroring the self-energy expansion path.
    """
    p = np.asarray(p, dtype=float)
    p_prime = np.asarray(p_prime, dtype=float)
    q = np.asarray(q, dtype=float)
    if not np.allclose(q, p_prime - p, rtol=0.0, atol=1e-9 * max(1.0, float(np.max(np.abs(p_prime))))):
        raise ValueError("momentum conservation violated: q != p' - p")
    q_sq = minkowski_dot(q, q)
    m2_sq = atoms.M2 if symmetric_masses else atoms.m2**2
    delta = 0.0 if symmetric_masses else atoms.delta

    def b2(x, y):
        val = b_sq(x, y, q_sq, m2_sq, delta)
        if val <= 0.0 and x > 0.0:
            raise KinematicDomainError(
                f"b^2(x={x:.3g}, y={y:.3g}) = {val:.3g} <= 0; timelike q beyond threshold"
            )
        return val

    tol = reg.quad_tol
    J = _dblquad(lambda y, x: x * master_integral(I_D, b2(x, y), reg.Lambda), tol)
    K = [
        _dblquad(lambda y, x: x**3 * y**mom * master_integral(I_C, b2(x, y), reg.Lambda), tol)
        for mom in (0, 1, 2)
    ]

    gsq = contractions(gamma)["gamma_sq"]
    t_pp = gamma_sq_dot(gamma, p_prime, p_prime)
    t_pq = gamma_sq_dot(gamma, p_prime, q) + gamma_sq_dot(gamma, q, p_prime)
    t_qq = gamma_sq_dot(gamma, q, q)
    tensor_contracted = K[0] * t_pp - K[1] * t_pq + K[2] * t_qq
    gamma_I_coeff = -4.0 * gsq * J
    z1_inv = 1.0 - 2.0 * gsq * J - 8.0 * tensor_contracted
    return {
        "J": J,
        "K0": K[0],
        "K1": K[1],
        "K2": K[2],
        "Gamma_I_coeff": gamma_I_coeff,
        "tensor_coeffs": {"pp": K[0], "pq_sym": -K[1], "qq": K[2]},
        "tensor_contracted": tensor_contracted,
        "Z1_inv": z1_inv,
        "q_sq": q_sq,
    }


# ---------------------------------------------------------------------------
# photon polarization and exchange kernel
# ---------------------------------------------------------------------------


def photon_polarization(q: np.ndarray, atoms: AtomPair, gamma: DipoleTensor, reg: RegScheme) -> dict:
    """Photon polarization tensor Pi^{mu nu} at momentum q.

    Pi^{mu nu} = 4 q_alpha q_beta gamma^{alpha mu} gamma^{beta nu} P(q^2)
    with P = int dx I_E(M^2(x)) and M^2(x) = m1^2 (1-x) + m2^2 x
    + q^2 x (1-x). Transversality q_mu Pi^{mu nu} = 0 holds by the
    antisymmetry of gamma and is returned as a residual for checking.
    """
    q = np.asarray(q, dtype=float)
    if np.allclose(q, 0.0):
        return {"Pi": np.zeros((4, 4)), "P_coeff": 0.0, "transversality": 0.0, "q_sq": 0.0}
    q_sq = minkowski_dot(q, q)
    m1_sq, m2_sq = atoms.m1**2, atoms.m2**2

    def M2x(x):
        val = m1_sq * (1.0 - x) + m2_sq * x + q_sq * x * (1.0 - x)
        if val <= 0.0:
            raise KinematicDomainError(
                f"M^2(x={x:.3g}) = {val:.3g} <= 0; q^2 = {q_sq:.3g} beyond the pair threshold"
            )
        return val

    P = _quad(lambda x: master_integral(I_E, M2x(x), reg.Lambda), 0.0, 1.0, reg.quad_tol)
    g = gamma.metric.g
    q_low = g @ q  # q with the index down equals g q for this metric
    w = gamma.components.T @ q_low  # w^nu = gamma^{alpha nu} q_alpha
    Pi = 4.0 * P * np.outer(w, w)
    trans = np.max(np.abs(q_low @ Pi))
    scale = np.max(np.abs(Pi))
    return {
        "Pi": Pi,
        "P_coeff": P,
        "transversality": float(trans / scale) if scale > 0 else 0.0,
        "q_sq": q_sq,
    }


def photon_exchange_kernel(q: np.ndarray, gamma: DipoleTensor) -> dict:
    """Single-photon exchange kernel between level pairs.

    V = gamma^{mu nu} gamma^{rho sigma} q_mu q_rho g_{nu sigma} / q^2
    in Feynman gauge, nonzero exactly for the level index assignments
    (1,2,1,2), (2,1,1,2), (2,1,2,1), (1,2,2,1), all equal.
    """
    from .errors import PoleError

    q = np.asarray(q, dtype=float)
    q_sq = minkowski_dot(q, q)
    if abs(q_sq) <= 1e-12 * max(1.0, float(q @ q)):
        raise PoleError(f"q^2 = {q_sq:.3e} is on the photon pole")
    g = gamma.metric.g
    q_low = g @ q
    w = gamma.components.T @ q_low  # w^nu = gamma^{mu nu} q_mu
    value = minkowski_dot(w, w) / q_sq
    return {
        "value": float(value),
        "index_set": ((1, 2, 1, 2), (2, 1, 1, 2), (2, 1, 2, 1), (1, 2, 2, 1)),
    }


# ---------------------------------------------------------------------------
# divergence fits and the counterterm report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DivergenceFit:
    """Least-squares coefficients of a regulated quantity on a Lambda grid.

    Model "quad_log_const": c_quad Lambda^2 + c_log M^2 ln(Lambda^2/M^2)
    + c_const M^2. Model "log_const" drops the Lambda^2 column.
    normalized() rescales so the leading coefficient is 1.
    """

    c_quad: float
    c_log: float
    c_const: float
    fit_residual: float
    lambda_grid: np.ndarray = field(repr=False)
    model: str = "quad_log_const"
    accepted: bool = True

    def normalized(self) -> tuple:
        lead = self.c_quad if self.model == "quad_log_const" else self.c_log
        if lead == 0:
            raise ArithmeticError("leading coefficient vanishes; cannot normalize")
        return (self.c_quad / lead, self.c_log / lead, self.c_const / lead)


def divergence_fit(
    values: np.ndarray,
    lambdas: np.ndarray,
    M_sq: float,
    model: str = "quad_log_const",
) -> DivergenceFit:
    """Fit cutoff dependence against the divergence basis.

    The grid must span at least two decades with min(Lambda)/M >= 10 so
    the basis is well conditioned; otherwise the grid is rejected.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    values = np.asarray(values, dtype=float)
    if lambdas.ndim != 1 or lambdas.shape != values.shape:
        raise ValueError("values and lambdas must be 1-d arrays of equal length")
    if model not in ("quad_log_const", "log_const"):
        raise ValueError(f"unknown model {model!r}")
    M = np.sqrt(M_sq)
    if lambdas.min() < 10.0 * M or lambdas.max() < 100.0 * lambdas.min():
        raise ValueError(
            "rejected grid: need min(Lambda) >= 10 M and a span of at least two decades"
        )
    logs = np.log(lambdas**2 / M_sq)
    if model == "quad_log_const":
        design = np.column_stack([lambdas**2, M_sq * logs, M_sq * np.ones_like(lambdas)])
    else:
        design = np.column_stack([M_sq * logs, M_sq * np.ones_like(lambdas)])
    cond = np.linalg.cond(design)
    if cond > 1e12:
        raise ValueError(f"rejected grid: design matrix condition number {cond:.2e}")
    coeffs, _, _, _ = np.linalg.lstsq(design, values, rcond=None)
    resid = float(np.max(np.abs(design @ coeffs - values)))
    if model == "quad_log_const":
        c_quad, c_log, c_const = (float(c) for c in coeffs)
        scale = abs(c_quad) * lambdas.max() ** 2
    else:
        c_quad = 0.0
        c_log, c_const = (float(c) for c in coeffs)
        scale = abs(c_log * M_sq * logs.max())
    accepted = scale > 0 and resid / scale <= 1e-4
    return DivergenceFit(
        c_quad=c_quad,
        c_log=c_log,
        c_const=c_const,
        fit_residual=resid,
        lambda_grid=lambdas,
        model=model,
        accepted=accepted,
    )


@dataclass(frozen=True)
class RenormConstants:
    """Collected one-loop renormalization data."""

    delta_m_sq: dict
    Z_phi_inv: dict
    Z1_inv: dict
    induced_couplings: dict
    prefactor_measured: float
    prefactor_ratio_to_printed: float


def counterterm_report(
    atoms: AtomPair,
    gamma: DipoleTensor,
    reg: RegScheme,
    p_spatial: float = 0.0,
    b_order: int = 0,
) -> RenormConstants:
    """Assemble mass shifts, Z factors, and the induced operators.

    The mass shift and scalar Z terms renormalize operators already in
    the action. Two genuinely new structures are induced at one loop:
    gamma^2_{mu nu} d^mu phi d^nu phi (from the self-energy tensor part)
    and (1/4) gamma^{lam mu} gamma^{tau nu} F_{lam mu} F_{tau nu} (from
    the polarization); their coefficients are the corresponding
    divergent integrals.
    """
    shifts = {}
    zs = {}
    for level in (1, 2):
        shifts[level] = mass_shift(level, atoms, gamma, reg, p_spatial=p_spatial, b_order=b_order)
        zs[level] = wavefunction_Z(level, atoms, gamma, reg, b_order=b_order)

    m1 = atoms.m1
    p_prime = _onshell_momentum(1, atoms)
    q = np.array([0.25 * m1, 0.25 * m1, 0.0, 0.0])  # lightlike: q^2 = 0
    p_in = p_prime - q
    vert = vertex_one_loop(p_in, p_prime, q, atoms, gamma, reg)

    # induced d phi d phi operator: divergent coefficient of gamma^2_{mu nu} p^mu p^nu
    induced_phi = shifts[1]["tensor_coeff"]
    # induced F F operator: 4 P(q^2 = 0) multiplies the
    # (1/4) gamma gamma F F structure; probe with a lightlike q
    q_probe = np.array([0.1 * m1, 0.1 * m1, 0.0, 0.0])
    pol = photon_polarization(q_probe, atoms, gamma, reg)
    induced_F = 4.0 * pol["P_coeff"]

    # measure the overall prefactor from the quadratic divergence of
    # Sigma^I / gamma^2 on a cutoff grid, and compare with 1/(2 pi)^3
    gsq = contractions(gamma)["gamma_sq"]
    m_ref = atoms.mass(1)
    lam_grid = np.geomspace(50.0 * m_ref, 5000.0 * m_ref, 12)
    vals = np.array(
        [
            self_energy(
                1, -m_ref**2, None, atoms, gamma,
                RegScheme(Lambda=lam, quad_tol=reg.quad_tol), b_order=b_order,
            ).sigma_I
            / gsq
            for lam in lam_grid
        ]
    )
    fit = divergence_fit(vals, lam_grid, atoms.M2)
    printed = 1.0 / (2.0 * np.pi) ** 3
    measured = fit.c_quad

    return RenormConstants(
        delta_m_sq={
            1: {"total": shifts[1]["total"], "scalar": shifts[1]["scalar"], "tensor": shifts[1]["tensor_contracted"], "operator_class": "original"},
            2: {"total": shifts[2]["total"], "scalar": shifts[2]["scalar"], "tensor": shifts[2]["tensor_contracted"], "operator_class": "original"},
        },
        Z_phi_inv={
            1: {"scalar": 1.0 + zs[1]["f_scalar"], "tensor_coeff": zs[1]["f_tensor_coeff"], "operator_class": "original"},
            2: {"scalar": 1.0 + zs[2]["f_scalar"], "tensor_coeff": zs[2]["f_tensor_coeff"], "operator_class": "original"},
        },
        Z1_inv={
            "scalar": 1.0 - 2.0 * gsq * vert["J"],
            "tensor_contracted": -8.0 * vert["tensor_contracted"],
            "total": vert["Z1_inv"],
            "operator_class": "original",
        },
        induced_couplings={
            "dphi_dphi": {"coefficient": induced_phi, "structure": "gamma^2_{mu nu} d^mu phi d^nu phi", "operator_class": "induced"},
            "F_F": {"coefficient": induced_F, "structure": "(1/4) gamma^{lam mu} gamma^{tau nu} F_{lam mu} F_{tau nu}", "operator_class": "induced"},
        },
        prefactor_measured=measured,
        prefactor_ratio_to_printed=measured / printed,
    )
