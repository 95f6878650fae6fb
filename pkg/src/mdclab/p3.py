"""Period-3 staircase reduction: two coupled discrete oscillators.

The second-order evolution in the primary direction is

    xh1 + xh2 + xd1 + s (2 x1 + x2) = 0
    xh2 + xd1 + xd2 + s (x1 + 2 x2) = 0,

(h = forward step, d = backward step) and the third lattice direction supplies
the commuting flow

    (1 + t t')(xb1 + xd1) + xb2 + t t' xd2 + (t + t')(2 x1 + x2) = 0
    (1 + t t')(xb2 + xd2) + t t' xb1 + xd1 + (t + t')(x1 + 2 x2) = 0.

Both flows are generated by quadratic one-step Lagrangians whose conjugate
momenta  X_i = -dL/dx_i  define a shared phase space z = (x1, x2, X1, X2).
On that phase space each evolution is a 4x4 unit-determinant matrix, the two
matrices commute, and the quadratic forms

    I1 = x1 X1 - 2 x1 X2 + 2 x2 X1 - x2 X2
    I2 = (1 - 3 s^2/4)(x1^2 + x1 x2 + x2^2) + X1^2 - X1 X2 + X2^2

are preserved by both and Poisson-commute with each other.

The eigenvalues of the primary map are exp(+-i mu_pm) with

    cos(mu_pm) = -3s/4 +- sqrt(1 - 3 s^2/4)/2;

the partner angles nu_pm of the commuting map are extracted from the shared
eigenvectors (the closed form quoted for them elsewhere does not reproduce
the map spectrum; see printed_angle_residuals).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import DegenerateParams, OutOfRegime

if TYPE_CHECKING:
    from .params import DerivedParams

_J4 = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])


def _phi_grad(x1: float, x2: float) -> tuple[float, float]:
    # gradient of x1^2 + x1 x2 + x2^2
    return 2.0 * x1 + x2, x1 + 2.0 * x2


def p3_hat_map(state, s: float) -> np.ndarray:
    """One step of the primary flow on z = (x1, x2, X1, X2).

    Solves the momentum definitions for the new positions and pushes the
    momenta forward with the discrete Legendre transform of
    L1 = x1 (xh1 + xh2) + x2 xh2 + s (Phi(x) + Phi(xh)) / 2.
    """
    x1, x2, X1, X2 = np.asarray(state, dtype=float)
    g1, g2 = _phi_grad(x1, x2)
    xh2 = -X2 - 0.5 * s * g2
    xh1 = -X1 + X2 + 0.5 * s * (x2 - x1)
    gh1, gh2 = _phi_grad(xh1, xh2)
    Xh1 = x1 + 0.5 * s * gh1
    Xh2 = x1 + x2 + 0.5 * s * gh2
    return np.array([xh1, xh2, Xh1, Xh2])


def p3_bar_map(state, t: float, tprime: float) -> np.ndarray:
    """One step of the commuting flow, from the Lagrangian
    L2 = A (x1 xb1 + x2 xb2) + B (x1 xb2 + t t' x2 xb1) + C (Phi(x) + Phi(xb))
    with A = (1 + tt')/(1 - tt'), B = 1/(1 - tt'), C = (t + t')/(2 (1 - tt'))."""
    tt = t * tprime
    if abs(1.0 - tt) < 1e-12:
        raise DegenerateParams(f"commuting flow undefined: 1 - t t' = {1.0 - tt!r}")
    A = (1.0 + tt) / (1.0 - tt)
    B = 1.0 / (1.0 - tt)
    C = 0.5 * (t + tprime) / (1.0 - tt)
    x1, x2, X1, X2 = np.asarray(state, dtype=float)
    g1, g2 = _phi_grad(x1, x2)
    m = np.array([[A, B], [B * tt, A]])
    xb1, xb2 = np.linalg.solve(m, -np.array([X1 + C * g1, X2 + C * g2]))
    gb1, gb2 = _phi_grad(xb1, xb2)
    Xb1 = A * x1 + B * tt * x2 + C * gb1
    Xb2 = A * x2 + B * x1 + C * gb2
    return np.array([xb1, xb2, Xb1, Xb2])


def _matrix_of(map_fn) -> np.ndarray:
    cols = [map_fn(e) for e in np.eye(4)]
    return np.column_stack(cols)


def p3_hat_matrix(s: float) -> np.ndarray:
    return _matrix_of(lambda z: p3_hat_map(z, s))


def p3_bar_matrix(t: float, tprime: float) -> np.ndarray:
    return _matrix_of(lambda z: p3_bar_map(z, t, tprime))


def p3_commutator_residual(derived: "DerivedParams") -> float:
    H = p3_hat_matrix(derived.s)
    B = p3_bar_matrix(derived.t, derived.tprime)
    return float(np.max(np.abs(H @ B - B @ H)))


def p3_momenta(x1, x2, xh1, xh2, s) -> tuple[float, float]:
    """Conjugate momenta X_i = -dL1/dx_i evaluated on a step (x, xh)."""
    g1, g2 = _phi_grad(x1, x2)
    return -(xh1 + xh2 + 0.5 * s * g1), -(xh2 + 0.5 * s * g2)


def p3_invariants(state, s: float) -> tuple[float, float]:
    x1, x2, X1, X2 = np.asarray(state, dtype=float)
    i1 = x1 * X1 - 2.0 * x1 * X2 + 2.0 * x2 * X1 - x2 * X2
    k = 1.0 - 0.75 * s * s
    i2 = k * (x1 * x1 + x1 * x2 + x2 * x2) + X1 * X1 - X1 * X2 + X2 * X2
    return float(i1), float(i2)


# -- Quadratic observables and the canonical bracket --------------------------

@dataclass(frozen=True)
class QuadraticObservable:
    """Quadratic phase-space function F(z) = z^T M z with M symmetric."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (4, 4) or np.max(np.abs(m - m.T)) > 1e-12 * max(1.0, np.max(np.abs(m))):
            raise ValueError("QuadraticObservable needs a symmetric 4x4 matrix")
        object.__setattr__(self, "matrix", m)

    def __call__(self, state) -> float:
        z = np.asarray(state, dtype=float)
        return float(z @ self.matrix @ z)

    @staticmethod
    def invariant_one() -> "QuadraticObservable":
        m = np.zeros((4, 4))
        m[0, 2] = m[2, 0] = 0.5      # x1 X1
        m[0, 3] = m[3, 0] = -1.0     # -2 x1 X2
        m[1, 2] = m[2, 1] = 1.0      # +2 x2 X1
        m[1, 3] = m[3, 1] = -0.5     # -x2 X2
        return QuadraticObservable(m)

    @staticmethod
    def invariant_two(s: float) -> "QuadraticObservable":
        k = 1.0 - 0.75 * s * s
        m = np.zeros((4, 4))
        m[0, 0] = m[1, 1] = k
        m[0, 1] = m[1, 0] = 0.5 * k
        m[2, 2] = m[3, 3] = 1.0
        m[2, 3] = m[3, 2] = -0.5
        return QuadraticObservable(m)


def poisson_bracket_form(F: QuadraticObservable, G: QuadraticObservable) -> QuadraticObservable:
    """{F, G} as a quadratic observable, computed exactly from the matrices.

    With F = z^T M z, grad F = 2 M z, so {F, G} = 4 z^T M J N z whose
    symmetric part is 2 (M J N - N J M).
    """
    M, N = F.matrix, G.matrix
    K = 2.0 * (M @ _J4 @ N - N @ _J4 @ M)
    return QuadraticObservable(0.5 * (K + K.T))


def poisson_bracket(F: QuadraticObservable, G: QuadraticObservable) -> float:
    """Max-norm of the bracket's coefficient matrix; zero iff in involution."""
    return float(np.max(np.abs(poisson_bracket_form(F, G).matrix)))


# -- Second-order residuals along orbits --------------------------------------

def p3_hat_equation_residual(prev, cur, nxt, s: float) -> float:
    """Max residual of the two primary-direction second-order equations."""
    r1 = nxt[0] + nxt[1] + prev[0] + s * (2 * cur[0] + cur[1])
    r2 = nxt[1] + prev[0] + prev[1] + s * (cur[0] + 2 * cur[1])
    return max(abs(r1), abs(r2))


def p3_bar_equation_residual(prev, cur, nxt, t: float, tprime: float) -> float:
    """Max residual of the two commuting-direction second-order equations."""
    tt = t * tprime
    T = t + tprime
    r1 = (1 + tt) * (nxt[0] + prev[0]) + nxt[1] + tt * prev[1] + T * (2 * cur[0] + cur[1])
    r2 = (1 + tt) * (nxt[1] + prev[1]) + tt * nxt[0] + prev[0] + T * (cur[0] + 2 * cur[1])
    return max(abs(r1), abs(r2))


# -- Joint solution ------------------------------------------------------------

@dataclass(frozen=True)
class JointMode:
    """One oscillation branch of the commuting pair.

    lam = exp(i mu) is the primary-map eigenvalue, sigma = exp(i nu) the
    commuting-map eigenvalue on the same eigenvector; v holds the complex
    position components (v1, v2) of that eigenvector.
    """

    mu: float
    nu: float
    v: tuple[complex, complex]


def p3_joint_modes(derived: "DerivedParams") -> tuple[JointMode, JointMode]:
    """The two independent modes, extracted from the shared eigenvectors.

    Raises OutOfRegime if the primary map has non-unimodular eigenvalues
    (hyperbolic) where no real angles exist.
    """
    H = p3_hat_matrix(derived.s)
    B = p3_bar_matrix(derived.t, derived.tprime)
    evals, evecs = np.linalg.eig(H)
    if np.max(np.abs(np.abs(evals) - 1.0)) > 1e-9:
        raise OutOfRegime("period-3 primary map has non-unimodular eigenvalues")
    modes = []
    seen: list[float] = []
    for idx in range(4):
        lam = evals[idx]
        mu = float(np.angle(lam))
        if mu <= 0.0:
            continue  # keep one of each conjugate pair
        if any(abs(mu - m) < 1e-9 for m in seen):
            continue
        seen.append(mu)
        vec = evecs[:, idx]
        w = B @ vec
        k = int(np.argmax(np.abs(vec)))
        sigma = w[k] / vec[k]
        if np.max(np.abs(w - sigma * vec)) > 1e-8 * np.max(np.abs(vec)):
            raise OutOfRegime("commuting map does not share the eigenvector")
        modes.append(JointMode(mu=mu, nu=float(np.angle(sigma)), v=(complex(vec[0]), complex(vec[1]))))
    if len(modes) != 2:
        raise OutOfRegime(f"expected two independent modes, found {len(modes)}")
    modes.sort(key=lambda m: math.cos(m.mu), reverse=True)  # plus branch first
    return modes[0], modes[1]


def p3_joint_solution(
    m: int,
    n: int,
    amplitudes: tuple[float, float, float, float],
    modes: tuple[JointMode, JointMode],
    nu_shift: tuple[float, float] = (0.0, 0.0),
) -> tuple[float, float]:
    """(x1, x2) of the joint field at grid point (m, n).

    amplitudes = (re_plus, im_plus, re_minus, im_minus) weight the real and
    imaginary parts of each branch.  nu_shift perturbs the commuting-flow
    angles, which is used to show the solution breaks if nu is wrong.
    """
    x1 = 0.0
    x2 = 0.0
    for mode, re_w, im_w, dnu in (
        (modes[0], amplitudes[0], amplitudes[1], nu_shift[0]),
        (modes[1], amplitudes[2], amplitudes[3], nu_shift[1]),
    ):
        phase = np.exp(1j * (mode.mu * m + (mode.nu + dnu) * n))
        w = complex(re_w, im_w)
        x1 += (w * mode.v[0] * phase).real
        x2 += (w * mode.v[1] * phase).real
    return x1, x2


def p3_joint_solution_residual(
    derived: "DerivedParams",
    amplitudes: tuple[float, float, float, float],
    m_range: range = range(0, 5),
    n_range: range = range(0, 5),
    nu_shift: tuple[float, float] = (0.0, 0.0),
) -> float:
    """Max residual of all four second-order equations on a grid of the
    joint solution."""
    modes = p3_joint_modes(derived)

    def x(m, n):
        return p3_joint_solution(m, n, amplitudes, modes, nu_shift)

    worst = 0.0
    for m in m_range:
        for n in n_range:
            worst = max(worst, p3_hat_equation_residual(x(m - 1, n), x(m, n), x(m + 1, n), derived.s))
            worst = max(
                worst,
                p3_bar_equation_residual(x(m, n - 1), x(m, n), x(m, n + 1), derived.t, derived.tprime),
            )
    return worst


def cos_mu_closed_form(s: float) -> tuple[float, float]:
    """cos(mu_pm) = -3s/4 +- sqrt(1 - 3 s^2/4)/2 (verified against the map)."""
    disc = 1.0 - 0.75 * s * s
    if disc < 0.0:
        raise OutOfRegime(f"complex angles at s={s!r}")
    root = 0.5 * math.sqrt(disc)
    return -0.75 * s + root, -0.75 * s - root


def cos_nu_from_elimination(t: float, tprime: float) -> tuple[float, float]:
    """cos(nu_pm) as roots of  D c^2 + 3T(1+tt') c + 3T^2 - (1 - tt')^2 = 0
    with c = 2 cos(nu), where D = 1 + tt' + (tt')^2 and T = t + t'.

    This is the characteristic condition obtained by eliminating the
    eigenvector from the commuting-flow mode equations.
    """
    tt = t * tprime
    T = t + tprime
    D = 1.0 + tt + tt * tt
    disc = 9.0 * T * T * (1.0 + tt) ** 2 - 4.0 * D * (3.0 * T * T - (1.0 - tt) ** 2)
    if disc < 0.0:
        raise OutOfRegime("complex commuting-flow angles")
    root = math.sqrt(disc)
    return (
        (-3.0 * T * (1.0 + tt) + root) / (4.0 * D),
        (-3.0 * T * (1.0 + tt) - root) / (4.0 * D),
    )


def printed_angle_residuals(derived: "DerivedParams") -> dict[str, float]:
    """Distance between map-spectrum angles and the quoted closed forms.

    cos(mu_pm) agrees with its closed form.  The quoted closed form for
    cos(nu_pm) does not reproduce the commuting-map spectrum; the elimination
    form in cos_nu_from_elimination does.  Reported, not asserted.
    """
    plus, minus = p3_joint_modes(derived)
    cm = cos_mu_closed_form(derived.s)
    ce = cos_nu_from_elimination(derived.t, derived.tprime)
    tt = derived.t * derived.tprime
    T = derived.t + derived.tprime
    D = 1.0 + tt + tt * tt
    spread = D - 0.75 * T * T
    quoted_half = 0.5 * ((1.0 - tt) / D) ** 2 * math.sqrt(max(spread, 0.0))
    quoted_mid = -3.0 * T * (1.0 + tt) / (4.0 * D)
    return {
        "cos_mu_plus": abs(math.cos(plus.mu) - cm[0]),
        "cos_mu_minus": abs(math.cos(minus.mu) - cm[1]),
        "cos_nu_plus_elimination": abs(math.cos(plus.nu) - ce[0]),
        "cos_nu_minus_elimination": abs(math.cos(minus.nu) - ce[1]),
        "cos_nu_plus_quoted": abs(math.cos(plus.nu) - (quoted_mid + quoted_half)),
        "cos_nu_minus_quoted": abs(math.cos(minus.nu) - (quoted_mid - quoted_half)),
    }
