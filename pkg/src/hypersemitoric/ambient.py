"""Constrained C^8 model of the octagon manifold.

Points of M are represented by vectors ``z`` in C^8 satisfying six quadratic
constraints; the quotient by the 6-torus N is never formed.  Every function
here broadcasts over leading axes: ``z`` has shape ``(..., 8)``.

Gradients are returned in complex form ``G_k = df/dx_k + i df/dy_k`` so that
the Euclidean pairing with a displacement ``v`` is ``Re(conj(G) . v)``.  With
``omega = sum dy_k ^ dx_k`` Hamilton's equations read ``dz/dt = -i G``; the
flow of ``J`` is ``z_1 -> exp(-i s) z_1``, of period ``2 pi``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError
from .polygon import make_octagon

OCTAGON = make_octagon()
WEIGHTS = np.asarray(OCTAGON.normals, dtype=int)          # e_k -> u_k
OFFSETS = np.asarray(OCTAGON.offsets, dtype=float)

# rows a with sum_k a_k u_k = 0; a = e_k - (u_k)_x e_1 - (u_k)_y e_3 for the
# six facets other than 1 and 3 (the echelon integer basis of the kernel)
DEPENDENT_FACETS = (1, 3, 4, 5, 6, 7)  # 0-based: facets 2, 4, 5, 6, 7, 8
ORBIT_BASIS = np.zeros((6, 8), dtype=int)
for _r, _k in enumerate(DEPENDENT_FACETS):
    ORBIT_BASIS[_r, _k] = 1
    ORBIT_BASIS[_r, 0] -= WEIGHTS[_k, 0]
    ORBIT_BASIS[_r, 2] -= WEIGHTS[_k, 1]

# phase weights of the monomial conj(z2 z3 z4) z6 z7 z8
GAMMA1_WEIGHTS = np.array([0, -1, -1, -1, 0, 1, 1, 1])

OBSERVABLES = ("J", "H", "gamma1", "gamma2", "gamma3", "gamma4", "Ht")

# largest |dJ| = |z_1| over M (J <= 3)
DJ_SCALE = np.sqrt(6.0)


@dataclass(frozen=True)
class PerturbationParams:
    t1: float = 0.0
    t2: float = 0.0
    t3: float = 0.0
    t4: float = 0.0

    def __post_init__(self):
        if not np.all(np.isfinite(self.as_array())):
            raise DomainError("perturbation parameters must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.t1, self.t2, self.t3, self.t4], dtype=float)

    @classmethod
    def coerce(cls, t) -> "PerturbationParams":
        if isinstance(t, cls):
            return t
        arr = np.asarray(t, dtype=float).reshape(-1)
        if arr.size != 4:
            raise DomainError(f"expected 4 perturbation parameters, got {arr.size}")
        return cls(*map(float, arr))


TLike = Union[PerturbationParams, Sequence[float], np.ndarray]


def _t(t: TLike) -> np.ndarray:
    return PerturbationParams.coerce(t).as_array()


@dataclass(frozen=True)
class ObservableSet:
    J: np.ndarray
    H: np.ndarray
    gamma1: np.ndarray
    gamma2: np.ndarray
    gamma3: np.ndarray
    gamma4: np.ndarray
    Ht: np.ndarray


def _z(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != 8:
        raise DomainError(f"ambient points have 8 complex coordinates, got shape {z.shape}")
    return z


def moduli_halfsq(z) -> np.ndarray:
    """``|z_k|^2 / 2`` for k = 1..8."""
    return 0.5 * np.abs(_z(z)) ** 2


def constraint_residual(z) -> np.ndarray:
    """Six residuals ``|z_k|^2/2 - ell_k(J, H)`` for facets 2, 4, 5, 6, 7, 8."""
    m = moduli_halfsq(z)
    J, H = m[..., 0], m[..., 2]
    out = []
    for k in DEPENDENT_FACETS:
        ux, uy = WEIGHTS[k]
        out.append(m[..., k] - (ux * J + uy * H - OFFSETS[k]))
    return np.stack(out, axis=-1)


def constraint_gradients(z) -> np.ndarray:
    """Complex gradients of the six residuals, shape ``(..., 6, 8)``."""
    z = _z(z)
    G = np.zeros(z.shape[:-1] + (6, 8), dtype=complex)
    for r, k in enumerate(DEPENDENT_FACETS):
        ux, uy = WEIGHTS[k]
        G[..., r, k] += z[..., k]
        G[..., r, 0] -= ux * z[..., 0]
        G[..., r, 2] -= uy * z[..., 2]
    return G


def sample_fiber_point(x, theta=None, tol: float = 1e-12) -> np.ndarray:
    """Representative ``z_k = sqrt(2 ell_k(x)) exp(i theta_k)`` over ``x`` in the octagon."""
    x = np.asarray(x, dtype=float)
    ell = OCTAGON.facet_values(x)
    if np.any(ell < -tol):
        raise DomainError(f"point {x.tolist()} is outside the octagon")
    mod = np.sqrt(2.0 * np.clip(ell, 0.0, None))
    if theta is None:
        return mod.astype(complex)
    theta = np.asarray(theta, dtype=float)
    return mod * np.exp(1j * theta)


def _gamma1_monomial(z):
    return np.conj(z[..., 1] * z[..., 2] * z[..., 3]) * z[..., 5] * z[..., 6] * z[..., 7]


def eval_observables(z, t: TLike = (0, 0, 0, 0)) -> ObservableSet:
    z = _z(z)
    tt = _t(t)
    a2 = np.abs(z) ** 2
    J = 0.5 * a2[..., 0]
    H = 0.5 * a2[..., 2]
    g1 = np.real(_gamma1_monomial(z)) / 50.0
    g2 = a2[..., 4] ** 2 * a2[..., 3] ** 2 / 50.0
    g3 = a2[..., 3] ** 2 * a2[..., 6] ** 2 / 50.0
    g4 = a2[..., 4] ** 2 * a2[..., 6] ** 2 / 100.0
    Ht = (1 - 2 * tt[0]) * H + tt[0] * g1 + tt[1] * g2 + tt[2] * g3 + tt[3] * g4
    return ObservableSet(J, H, g1, g2, g3, g4, Ht)


def observable(name: str, z, t: TLike = (0, 0, 0, 0)) -> np.ndarray:
    if name not in OBSERVABLES:
        raise KeyError(f"unknown observable {name!r}")
    return getattr(eval_observables(z, t), name)


def observable_gradient(name: str, z, t: TLike = (0, 0, 0, 0)) -> np.ndarray:
    """Analytic complex gradient ``df/dx + i df/dy``, shape ``(..., 8)``."""
    z = _z(z)
    G = np.zeros(z.shape, dtype=complex)
    a2 = np.abs(z) ** 2
    if name == "J":
        G[..., 0] = z[..., 0]
    elif name == "H":
        G[..., 2] = z[..., 2]
    elif name == "gamma1":
        z2, z3, z4, z6, z7, z8 = (z[..., k] for k in (1, 2, 3, 5, 6, 7))
        hi = z6 * z7 * z8
        G[..., 1] = np.conj(z3 * z4) * hi
        G[..., 2] = np.conj(z2 * z4) * hi
        G[..., 3] = np.conj(z2 * z3) * hi
        lo = z2 * z3 * z4
        G[..., 5] = lo * np.conj(z7 * z8)
        G[..., 6] = lo * np.conj(z6 * z8)
        G[..., 7] = lo * np.conj(z6 * z7)
        G /= 50.0
    elif name in ("gamma2", "gamma3", "gamma4"):
        p, q, coef = {"gamma2": (4, 3, 50.0), "gamma3": (3, 6, 50.0), "gamma4": (4, 6, 100.0)}[name]
        G[..., p] = 4 * a2[..., p] * z[..., p] * a2[..., q] ** 2 / coef
        G[..., q] = 4 * a2[..., q] * z[..., q] * a2[..., p] ** 2 / coef
    elif name == "Ht":
        tt = _t(t)
        G = (1 - 2 * tt[0]) * observable_gradient("H", z)
        for k, name_k in enumerate(("gamma1", "gamma2", "gamma3", "gamma4")):
            if tt[k] != 0.0:
                G = G + tt[k] * observable_gradient(name_k, z)
    else:
        raise KeyError(f"unknown observable {name!r}")
    return G


FuncLike = Union[str, Callable[[np.ndarray], np.ndarray]]


def _as_callable(f: FuncLike, t: TLike) -> Callable[[np.ndarray], np.ndarray]:
    if callable(f):
        return f
    return lambda zz: observable(f, zz, t)


def numeric_gradient(f: FuncLike, z, t: TLike = (0, 0, 0, 0), step: float = 1e-5,
                     richardson: bool = False) -> np.ndarray:
    """Central-difference complex gradient; ``richardson`` adds one extrapolation level."""
    z = _z(z)
    func = _as_callable(f, t)

    def central(hstep):
        G = np.zeros(z.shape, dtype=complex)
        for k in range(8):
            e = np.zeros(8, dtype=complex)
            e[k] = hstep
            dx = (func(z + e) - func(z - e)) / (2 * hstep)
            e[k] = 1j * hstep
            dy = (func(z + e) - func(z - e)) / (2 * hstep)
            G[..., k] = dx + 1j * dy
        return G

    G = central(step)
    if richardson:
        G = (4 * central(step / 2) - G) / 3
    return G


def bracket_from_gradients(F: np.ndarray, G: np.ndarray) -> np.ndarray:
    """``sum_k (df/dx_k dg/dy_k - df/dy_k dg/dx_k)``."""
    return np.sum(np.imag(np.conj(F) * G), axis=-1)


def poisson_bracket_num(f: FuncLike, g: FuncLike, z, t: TLike = (0, 0, 0, 0),
                        step: float = 1e-5, richardson: bool = False) -> np.ndarray:
    """Ambient Poisson bracket from central finite differences.

    For N-invariant functions evaluated on the constraint set this equals
    the bracket on M.
    """
    F = numeric_gradient(f, z, t, step, richardson)
    G = numeric_gradient(g, z, t, step, richardson)
    return bracket_from_gradients(F, G)


def poisson_bracket(f: str, g: str, z, t: TLike = (0, 0, 0, 0)) -> np.ndarray:
    """Same bracket from analytic gradients."""
    return bracket_from_gradients(observable_gradient(f, z, t), observable_gradient(g, z, t))


def orbit_directions(z) -> np.ndarray:
    """Infinitesimal N-orbit directions ``i a_k z_k``, shape ``(..., 6, 8)``."""
    z = _z(z)
    return 1j * ORBIT_BASIS * z[..., None, :]


def n_invariance_residual(z, f: FuncLike, t: TLike = (0, 0, 0, 0), step: float = 1e-5) -> np.ndarray:
    """Largest |derivative| of ``f`` along the six N-orbit directions."""
    z = _z(z)
    if isinstance(f, str):
        G = observable_gradient(f, z, t)
    else:
        G = numeric_gradient(f, z, t, step)
    V = orbit_directions(z)
    d = np.real(np.conj(G[..., None, :]) * V).sum(axis=-1)
    return np.max(np.abs(d), axis=-1)


def _realify(G: np.ndarray) -> np.ndarray:
    return np.concatenate([G.real, G.imag], axis=-1)


def dFt_singular_values(z, t: TLike = (0, 0, 0, 0), off_tol: float = 1e-9) -> np.ndarray:
    """Singular values of ``d(J, H_t)`` restricted to the constraint tangent space."""
    z = _z(z)
    res = np.max(np.abs(constraint_residual(z)), axis=-1)
    if np.any(res > off_tol):
        raise DomainError(f"point is off the constraint set (residual {float(np.max(res)):.3g})")
    C = _realify(constraint_gradients(z))                    # (..., 6, 16)
    _, _, Vh = np.linalg.svd(C, full_matrices=True)
    tangent = Vh[..., 6:, :]                                  # (..., 10, 16)
    A = np.stack([_realify(observable_gradient("J", z)),
                  _realify(observable_gradient("Ht", z, t))], axis=-2)
    return np.linalg.svd(A @ np.swapaxes(tangent, -1, -2), compute_uv=False)


def rank_scale(t: TLike) -> float:
    return float(DJ_SCALE * max(1.0, np.max(np.abs(_t(t)))))


def dFt_rank(z, t: TLike = (0, 0, 0, 0), tol: float = 1e-7, off_tol: float = 1e-9):
    """Rank (0, 1 or 2) of ``dF_t`` on ``T_[z] M``.

    Singular values below ``tol * rank_scale(t)`` count as zero.
    """
    s = dFt_singular_values(z, t, off_tol)
    rank = np.sum(s > tol * rank_scale(t), axis=-1)
    return int(rank) if np.ndim(rank) == 0 else rank


def hamiltonian_vector_field(name: str, z, t: TLike = (0, 0, 0, 0)) -> np.ndarray:
    return -1j * observable_gradient(name, z, t)


def flow(name: str, z0, duration: float, t: TLike = (0, 0, 0, 0),
         rtol: float = 1e-11, atol: float = 1e-12) -> np.ndarray:
    """Integrate Hamilton's equations of an observable for ``duration``."""
    z0 = _z(z0)
    shape = z0.shape

    def rhs(_, y):
        zz = (y[: y.size // 2] + 1j * y[y.size // 2:]).reshape(shape)
        v = hamiltonian_vector_field(name, zz, t).reshape(-1)
        return np.concatenate([v.real, v.imag])

    y0 = np.concatenate([z0.real.reshape(-1), z0.imag.reshape(-1)])
    sol = solve_ivp(rhs, (0.0, duration), y0, method="DOP853", rtol=rtol, atol=atol)
    y = sol.y[:, -1]
    return (y[: y.size // 2] + 1j * y[y.size // 2:]).reshape(shape)


def fixed_point_representatives() -> dict[tuple[int, int], np.ndarray]:
    """Real representatives of the four S^1-fixed points over vertices with J in {1, 2}."""
    from .polygon import VERTEX_MODULI

    return {v: np.asarray(m, dtype=complex) for v, m in VERTEX_MODULI.items()}


def lift(j, h, phi, gauge=None) -> np.ndarray:
    """Ambient representative of the reduced point ``(j, h, phi)``.

    ``gauge`` (shape ``(..., 8)``) supplies arbitrary starting phases; the
    last phase is then shifted so that the monomial angle equals ``phi``.
    """
    j, h, phi = np.broadcast_arrays(np.asarray(j, float), np.asarray(h, float), np.asarray(phi, float))
    theta = np.zeros(j.shape + (8,))
    if gauge is not None:
        theta = theta + np.broadcast_to(np.asarray(gauge, float), j.shape + (8,))
    theta[..., 7] += phi - theta @ GAMMA1_WEIGHTS
    return sample_fiber_point(np.stack([j, h], axis=-1), theta)


def check_facet_indexing(tol: float = 1e-12) -> None:
    """Re-derive the facet order from the four fixed points.

    ``|z_k|^2 / 2`` at each fixed point must equal the facet function
    ``l_k`` at its vertex.  Raises ``RuntimeError`` on any mismatch.
    """
    for v, z in fixed_point_representatives().items():
        got = moduli_halfsq(z)
        want = OCTAGON.facet_values(np.asarray(v, float))
        if np.max(np.abs(got - want)) > tol:
            raise RuntimeError(f"facet indexing mismatch at vertex {v}: {got} vs {want}")


check_facet_indexing()
