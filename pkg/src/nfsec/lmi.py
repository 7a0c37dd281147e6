"""Semidefinite constraint blocks for worst-case leakage control.

Every robust scheme caps the worst-case array gain toward an eavesdropper,
max |a^H w|^2 <= Gamma, over some model of the location uncertainty. The
sign-definiteness lemma turns each such semi-infinite constraint into one
linear matrix inequality:

* a norm-ball model of the steering error gives the (N+2) x (N+2) block of
  :func:`build_error_bound_lmi`;
* the per-cell first-order model in (range, angle) gives the 4 x 4 refined
  block of :func:`build_refined_lmi`, whose size is independent of N.

Blocks are affine in the complex beamformer(s) and in nonnegative auxiliary
multipliers, represented symbolically so any conic backend can consume them
and tests can assemble them numerically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import ArrayGeometry, PolarLocation, steering_vector
from .steering_error import steering_gradients
from .uncertainty import FanSubRegion


@dataclass(frozen=True, eq=False)
class VectorTerm:
    """One linear-in-w placement inside an LMI block.

    Contributes ``coeff @ v`` to rows ``row : row + m`` of column ``col``
    and the conjugate transpose to the mirrored entries, so the assembled
    matrix stays Hermitian for any value of the variable.
    """

    var: str
    row: int
    col: int
    coeff: np.ndarray  # (m, n) complex

    def __post_init__(self) -> None:
        if self.coeff.ndim != 2:
            raise ValueError("coeff must be a 2-D matrix")
        if self.col in range(self.row, self.row + self.coeff.shape[0]):
            raise ValueError("placement may not touch the diagonal")


@dataclass(frozen=True, eq=False)
class LmiBlock:
    """Hermitian PSD constraint, affine in complex vectors and nonneg scalars.

    M(v, s) = constant + sum_t [place(t, v) + place(t, v)^H]
                       + sum_j s_j * scalar_terms[j]   >= 0 (PSD),
    with every scalar variable constrained nonnegative.
    """

    size: int
    constant: np.ndarray
    vector_terms: tuple[VectorTerm, ...] = ()
    scalar_terms: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        c = self.constant
        if c.shape != (self.size, self.size):
            raise ValueError(f"constant must be {self.size}x{self.size}")
        if np.abs(c - c.conj().T).max() > 1e-12:
            raise ValueError("constant part must be Hermitian")
        for coeff in self.scalar_terms.values():
            if np.abs(coeff - coeff.conj().T).max() > 1e-12:
                raise ValueError("scalar coefficient matrices must be Hermitian")

    def scalar_ids(self) -> tuple[str, ...]:
        return tuple(self.scalar_terms)

    def vector_ids(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(t.var for t in self.vector_terms))

    def assemble(self, vectors: dict[str, np.ndarray], scalars: dict[str, float]) -> np.ndarray:
        """Numeric Hermitian matrix at a concrete variable assignment."""
        m = np.array(self.constant, dtype=complex)
        for t in self.vector_terms:
            col = t.coeff @ np.asarray(vectors[t.var])
            rows = slice(t.row, t.row + len(col))
            m[rows, t.col] += col
            m[t.col, rows] += col.conj()
        for name, coeff in self.scalar_terms.items():
            m += scalars[name] * coeff
        return m

    def min_eigenvalue(self, vectors: dict[str, np.ndarray], scalars: dict[str, float]) -> float:
        return float(np.linalg.eigvalsh(self.assemble(vectors, scalars))[0])


@dataclass(frozen=True)
class LeakageThreshold:
    """Cap on the squared array gain toward an eavesdropper.

    gamma = noise_power (2^rate_cap - 1) / (N |h_E|^2): a beamformer keeps
    the eavesdropping rate below rate_cap exactly when |a^H w|^2 <= gamma.
    """

    gamma: float
    noise_power: float
    rate_cap: float
    n_elements: int
    eve_gain_sq: float


def leakage_threshold(
    noise_power: float, rate_cap: float, n_elements: int, eve_gain_sq: float
) -> LeakageThreshold:
    """Leakage cap from the noise floor, tolerated rate, and channel gain."""
    if noise_power <= 0 or rate_cap <= 0 or n_elements <= 0 or eve_gain_sq <= 0:
        raise ValueError("all threshold inputs must be positive")
    gamma = noise_power * (2.0**rate_cap - 1.0) / (n_elements * eve_gain_sq)
    return LeakageThreshold(
        gamma=gamma,
        noise_power=noise_power,
        rate_cap=rate_cap,
        n_elements=n_elements,
        eve_gain_sq=eve_gain_sq,
    )


@dataclass(frozen=True)
class TightenedThreshold:
    """Leakage cap tightened by a bounded non-line-of-sight component.

    With NLoS power at most kappa^2 times the LoS power, the safe cap
    becomes gamma - kappa^2 p where the scalar variable p overbounds
    ||w||^2. ``gamma_terms`` names that variable and its (negative)
    coefficient on the cap; the caller must add the cone ||w||^2 <= p.
    """

    gamma: float
    power_var: str
    power_coeff: float

    @property
    def gamma_terms(self) -> dict[str, float]:
        return {self.power_var: self.power_coeff}


def nlos_tightened_threshold(
    base: LeakageThreshold, kappa: float, power_var: str = "p"
) -> TightenedThreshold:
    """Affine-in-p leakage cap accounting for bounded NLoS leakage.

    The conservative constraint N |h_E|^2 max|a^H w|^2 + kappa^2 N |h_E|^2
    ||w||^2 <= noise (2^rate_cap - 1) divides through by N |h_E|^2 into
    |a^H w|^2 <= gamma - kappa^2 p with ||w||^2 <= p. kappa -> 0 recovers
    the base cap.
    """
    if not 0 < kappa < 1:
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")
    return TightenedThreshold(gamma=base.gamma, power_var=power_var, power_coeff=-kappa**2)


def prop1_power_cap(gamma: float, eps_ub: float) -> float:
    """Necessary transmit-power cap gamma / eps_ub^2 of the norm-ball block.

    Any (w, lam) feasible for :func:`build_error_bound_lmi` satisfies
    ||w||^2 <= gamma / eps_ub^2. Returns inf for eps_ub = 0 (no cap).
    """
    if eps_ub < 0:
        raise ValueError(f"eps_ub must be >= 0, got {eps_ub}")
    if eps_ub == 0.0:
        return float("inf")
    return gamma / eps_ub**2


def _embed_gamma(
    size: int, gamma: float, gamma_terms: dict[str, float] | None
) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """Constant part with gamma at (0, 0), plus affine gamma corrections."""
    constant = np.zeros((size, size), dtype=complex)
    constant[0, 0] = gamma
    scalar_terms: dict[str, np.ndarray] = {}
    for name, coeff in (gamma_terms or {}).items():
        mat = np.zeros((size, size), dtype=complex)
        mat[0, 0] = coeff
        scalar_terms[name] = mat
    return constant, scalar_terms


def build_error_bound_lmi(
    gamma: float,
    a_hat: np.ndarray,
    eps_ub: float,
    var: str = "w",
    lam: str = "lam_e",
    gamma_terms: dict[str, float] | None = None,
) -> LmiBlock:
    """Norm-ball robust leakage constraint as an (N+2) x (N+2) block.

    Models the steering vector as a_hat + e with ||e|| <= eps_ub and
    enforces |(a_hat + e)^H w|^2 <= gamma for every such e:

        [ gamma - lam   a_hat^H w    0       ]
        [ w^H a_hat     1            eps w^H ]  >= 0,   lam >= 0.
        [ 0             eps w        lam I   ]
    """
    if eps_ub < 0:
        raise ValueError(f"eps_ub must be >= 0, got {eps_ub}")
    a_hat = np.asarray(a_hat, dtype=complex)
    n = a_hat.shape[0]
    size = n + 2
    constant, scalar_terms = _embed_gamma(size, gamma, gamma_terms)
    constant[1, 1] = 1.0
    lam_coeff = np.zeros((size, size), dtype=complex)
    lam_coeff[0, 0] = -1.0
    lam_coeff[2:, 2:] = np.eye(n)
    scalar_terms[lam] = lam_coeff
    terms = (
        VectorTerm(var=var, row=0, col=1, coeff=a_hat.conj()[None, :]),
        VectorTerm(var=var, row=2, col=1, coeff=eps_ub * np.eye(n, dtype=complex)),
    )
    return LmiBlock(size=size, constant=constant, vector_terms=terms, scalar_terms=scalar_terms)


def build_refined_lmi_from_vectors(
    gamma: float,
    a_s: np.ndarray,
    grad_range: np.ndarray,
    grad_angle: np.ndarray,
    half_range: float,
    half_angle: float,
    var: str = "w",
    lam_range: str = "lam_r",
    lam_angle: str = "lam_t",
    gamma_terms: dict[str, float] | None = None,
) -> LmiBlock:
    """Refined 4 x 4 block from precomputed surrogate vectors and gradients."""
    constant, scalar_terms = _embed_gamma(4, gamma, gamma_terms)
    constant[1, 1] = 1.0
    lam_r_coeff = np.zeros((4, 4), dtype=complex)
    lam_r_coeff[1, 1] = -1.0
    lam_r_coeff[2, 2] = 1.0
    lam_t_coeff = np.zeros((4, 4), dtype=complex)
    lam_t_coeff[1, 1] = -1.0
    lam_t_coeff[3, 3] = 1.0
    scalar_terms[lam_range] = lam_r_coeff
    scalar_terms[lam_angle] = lam_t_coeff
    terms = (
        VectorTerm(var=var, row=1, col=0, coeff=np.conj(a_s)[None, :]),
        VectorTerm(var=var, row=2, col=0, coeff=half_range * np.conj(grad_range)[None, :]),
        VectorTerm(var=var, row=3, col=0, coeff=half_angle * np.conj(grad_angle)[None, :]),
    )
    return LmiBlock(size=4, constant=constant, vector_terms=terms, scalar_terms=scalar_terms)


def build_refined_lmi(
    gamma: float,
    cell: FanSubRegion,
    geo: ArrayGeometry,
    var: str = "w",
    lam_range: str = "lam_r",
    lam_angle: str = "lam_t",
    gamma_terms: dict[str, float] | None = None,
) -> LmiBlock:
    """Per-cell first-order robust leakage constraint as a 4 x 4 block.

    Models the steering vector inside the cell by its Taylor expansion at
    the surrogate point and bounds the range/angle deviations by the cell
    half-widths. The block size is 4 regardless of the array size:

        [ gamma        w^H a_s             eps b_r^H          tht b_t^H ]
        [ a_s^H w      1 - lam_r - lam_t   0                  0         ]
        [ eps b_r      0                   lam_r              0         ]  >= 0
        [ tht b_t      0                   0                  lam_t     ]

    with b_r = grad_range^H w, b_t = grad_angle^H w evaluated at the
    surrogate, and lam_r, lam_t >= 0.
    """
    surrogate = PolarLocation(cell.phi_s, cell.r_s)
    a_s = steering_vector(surrogate, geo)
    grads = steering_gradients(surrogate, geo)
    return build_refined_lmi_from_vectors(
        gamma,
        a_s,
        grads.grad_range,
        grads.grad_angle,
        cell.half_range,
        cell.half_angle,
        var=var,
        lam_range=lam_range,
        lam_angle=lam_angle,
        gamma_terms=gamma_terms,
    )


def build_multiuser_lmis(
    gammas: list[float],
    cells_per_eve: list[list[FanSubRegion]],
    n_bobs: int,
    geo: ArrayGeometry,
    gamma_terms_per_bob: list[dict[str, float] | None] | None = None,
) -> list[LmiBlock]:
    """Refined 4 x 4 blocks for every (eve, bob, cell) triple.

    Beamformer k appears as variable ``w_k``; multipliers are indexed by
    (m, k, s). The block count is n_bobs * sum_m len(cells_per_eve[m]).
    """
    if len(gammas) != len(cells_per_eve):
        raise ValueError("need one gamma per eavesdropper")
    blocks = []
    for m, (gamma, cells) in enumerate(zip(gammas, cells_per_eve)):
        for k in range(n_bobs):
            terms = None if gamma_terms_per_bob is None else gamma_terms_per_bob[k]
            for s, cell in enumerate(cells):
                blocks.append(
                    build_refined_lmi(
                        gamma,
                        cell,
                        geo,
                        var=f"w_{k}",
                        lam_range=f"lam_r[{m},{k},{s}]",
                        lam_angle=f"lam_t[{m},{k},{s}]",
                        gamma_terms=terms,
                    )
                )
    return blocks
