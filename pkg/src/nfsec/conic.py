"""Generic conic programs: linear objective, quadratic cones, PSD blocks.

The decision variables are complex vectors plus nonnegative real scalars.
Problems are solved through cvxpy with an interior-point backend (Clarabel
by default), which is deterministic for fixed inputs and settings. Complex
Hermitian PSD blocks are lowered to real symmetric blocks of twice the size
via the standard embedding [[Re, -Im], [Im, Re]], whose eigenvalues are
those of the Hermitian matrix with doubled multiplicity.

:class:`CompiledProgram` keeps the constraint set compiled and re-solves
with fresh linear objectives, which is what an inner approximation loop
needs: constraints stay fixed while the objective linearization moves.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import cvxpy as cp
import numpy as np

from .lmi import LmiBlock

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
NUMERICAL_ERROR = "numerical_error"


@dataclass(frozen=True, eq=False)
class QuadCone:
    """sum_i ||A_i @ v_i||^2 <= bound_const + sum_j bound_scalars[j] * s_j.

    A rotated second-order cone over complex affine images of the vector
    variables, with an affine bound in the nonnegative scalars.
    """

    terms: tuple[tuple[str, np.ndarray], ...]
    bound_const: float
    bound_scalars: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class NormSumCone:
    """(sum_i ||A_i @ v_i||)^2 <= bound_const + sum_j bound_scalars[j] * s_j.

    The square of a sum of norms; with a single term it coincides with
    :class:`QuadCone`. This is the exact second-order-cone form of a
    norm-ball leakage constraint: (|a^H w| + eps ||w||)^2 <= gamma.
    """

    terms: tuple[tuple[str, np.ndarray], ...]
    bound_const: float
    bound_scalars: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class LinearObjective:
    """Maximize constant + sum_k Re(c_k^H w_k) + sum_j d_j s_j."""

    vector_coeffs: dict[str, np.ndarray] = field(default_factory=dict)
    scalar_coeffs: dict[str, float] = field(default_factory=dict)
    constant: float = 0.0


@dataclass(eq=False)
class ConicProgram:
    """Conic program over named complex vectors and nonnegative scalars."""

    vector_dims: dict[str, int]
    objective: LinearObjective
    cones: list[QuadCone | NormSumCone] = field(default_factory=list)
    lmis: list[LmiBlock] = field(default_factory=list)

    def scalar_ids(self) -> tuple[str, ...]:
        names: dict[str, None] = {}
        for block in self.lmis:
            for s in block.scalar_ids():
                names.setdefault(s)
        for cone in self.cones:
            for s in cone.bound_scalars:
                names.setdefault(s)
        for s in self.objective.scalar_coeffs:
            names.setdefault(s)
        return tuple(names)


@dataclass
class ConicSolution:
    status: str
    vectors: dict[str, np.ndarray]
    scalars: dict[str, float]
    objective: float | None
    raw_status: str


def _hermitian_expr(block: LmiBlock, vec_vars: dict, sc_vars: dict):
    """cvxpy expression for the block's Hermitian matrix."""
    size = block.size
    expr = cp.Constant(block.constant)
    for t in block.vector_terms:
        m = t.coeff.shape[0]
        left = np.zeros((size, m))
        left[t.row : t.row + m, :] = np.eye(m)
        right = np.zeros((1, size))
        right[0, t.col] = 1.0
        col = cp.reshape(cp.Constant(t.coeff) @ vec_vars[t.var], (m, 1), order="C")
        placed = cp.Constant(left) @ col @ cp.Constant(right)
        expr = expr + placed + placed.H
    for name, coeff in block.scalar_terms.items():
        expr = expr + sc_vars[name] * cp.Constant(coeff)
    return expr


def _real_embedding(m):
    return cp.bmat([[cp.real(m), -cp.imag(m)], [cp.imag(m), cp.real(m)]])


class CompiledProgram:
    """A conic program compiled once, re-solvable with new linear objectives."""

    def __init__(self, program: ConicProgram, solver: str = "CLARABEL"):
        self.program = program
        self.solver = solver
        self._vec_vars = {
            name: cp.Variable(dim, complex=True, name=name)
            for name, dim in program.vector_dims.items()
        }
        self._sc_vars = {
            name: cp.Variable(nonneg=True, name=name) for name in program.scalar_ids()
        }
        constraints = []
        for cone in program.cones:
            if isinstance(cone, NormSumCone):
                lhs = cp.square(
                    sum(cp.norm(cp.Constant(a) @ self._vec_vars[v]) for v, a in cone.terms)
                )
            else:
                lhs = sum(
                    cp.sum_squares(cp.Constant(a) @ self._vec_vars[v]) for v, a in cone.terms
                )
            rhs = cp.Constant(cone.bound_const) + sum(
                coeff * self._sc_vars[s] for s, coeff in cone.bound_scalars.items()
            )
            constraints.append(lhs <= rhs)
        for block in program.lmis:
            constraints.append(
                _real_embedding(_hermitian_expr(block, self._vec_vars, self._sc_vars)) >> 0
            )
        self._obj_params = {
            name: cp.Parameter(dim, complex=True, name=f"c_{name}")
            for name, dim in program.vector_dims.items()
        }
        self._sc_params = {
            name: cp.Parameter(name=f"d_{name}") for name in self._sc_vars
        }
        objective = sum(
            cp.real(self._obj_params[name] @ var) for name, var in self._vec_vars.items()
        ) + sum(self._sc_params[name] * var for name, var in self._sc_vars.items())
        self._problem = cp.Problem(cp.Maximize(objective), constraints)

    def solve(self, objective: LinearObjective | None = None) -> ConicSolution:
        obj = objective if objective is not None else self.program.objective
        for name, par in self._obj_params.items():
            c = obj.vector_coeffs.get(name)
            par.value = (
                np.zeros(par.shape, dtype=complex) if c is None else np.conj(np.asarray(c))
            )
        for name, par in self._sc_params.items():
            par.value = float(obj.scalar_coeffs.get(name, 0.0))
        try:
            with warnings.catch_warnings():
                # inaccurate-solution warnings are folded into the status
                warnings.simplefilter("ignore", UserWarning)
                self._problem.solve(solver=self.solver)
        except cp.error.SolverError:
            return ConicSolution(NUMERICAL_ERROR, {}, {}, None, "solver_error")
        raw = self._problem.status
        if raw in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
            vectors = {n: np.array(v.value) for n, v in self._vec_vars.items()}
            scalars = {n: float(v.value) for n, v in self._sc_vars.items()}
            value = float(self._problem.value) + obj.constant
            return ConicSolution(OPTIMAL, vectors, scalars, value, raw)
        if raw in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
            return ConicSolution(INFEASIBLE, {}, {}, None, raw)
        return ConicSolution(NUMERICAL_ERROR, {}, {}, None, raw)


def solve_conic(program: ConicProgram, solver: str = "CLARABEL") -> ConicSolution:
    """One-shot solve of a conic program.

    Deterministic for identical inputs and solver settings; infeasibility
    and numerical failure are reported as distinct statuses.
    """
    return CompiledProgram(program, solver=solver).solve()
