"""One-particle space: rapidity grid, test-function transforms, Poincare action, lightray generators.

Conventions: mass shell p(theta) = (m cosh theta, m sinh theta); Minkowski product
p.a = p0 a0 - p1 a1; light-cone momentum p_+ = p0 + p1 = m e^theta.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class QuadratureError(RuntimeError):
    """Raised when an oscillatory integral cannot be resolved to the requested tolerance."""


@dataclass(frozen=True)
class RapidityGrid:
    """Uniform rapidity samples on [-theta_max, theta_max] with trapezoid weights."""
    theta: np.ndarray
    weights: np.ndarray
    mass: float = 1.0

    def __post_init__(self):
        if len(self.theta) != len(self.weights):
            raise ValueError("theta and weights must have the same length")
        if np.any(np.diff(self.theta) <= 0):
            raise ValueError("theta must be strictly increasing")
        if np.any(self.weights <= 0):
            raise ValueError("weights must be strictly positive")
        if self.mass <= 0:
            raise ValueError("mass must be positive")

    @property
    def size(self):
        return len(self.theta)

    @property
    def spacing(self):
        return float(self.theta[1] - self.theta[0])

    def momentum(self):
        """(p0, p1) = (m cosh theta, m sinh theta) on the grid."""
        return self.mass * np.cosh(self.theta), self.mass * np.sinh(self.theta)

    def lightcone_momentum(self, sign=+1):
        """p_+ = m e^theta (sign +) or p_- = m e^{-theta} (sign -)."""
        return self.mass * np.exp(sign * self.theta)

    def inner(self, u, v):
        """Quadrature inner product, antilinear in the first slot."""
        return complex(np.sum(self.weights * np.conj(np.asarray(u)) * np.asarray(v)))

    def norm(self, u):
        return float(np.sqrt(self.inner(u, u).real))

    def to_ortho(self, values):
        """Coefficients in the orthonormal (weight-absorbed) coordinates."""
        return np.sqrt(self.weights) * np.asarray(values, dtype=complex)

    def from_ortho(self, coeffs):
        return np.asarray(coeffs, dtype=complex) / np.sqrt(self.weights)


def make_grid(theta_half_width, n_points, mass=1.0):
    if theta_half_width <= 0:
        raise ValueError("theta_half_width must be positive")
    if n_points < 2:
        raise ValueError("need at least two grid points")
    if mass <= 0:
        raise ValueError("mass must be positive")
    theta = np.linspace(-theta_half_width, theta_half_width, n_points)
    h = theta[1] - theta[0]
    w = np.full(n_points, h)
    w[0] = w[-1] = h / 2
    return RapidityGrid(theta=theta, weights=w, mass=float(mass))


@dataclass(frozen=True)
class OneParticleVector:
    """Function values psi(theta_i) on a rapidity grid."""
    values: np.ndarray
    grid: RapidityGrid

    def __post_init__(self):
        if len(self.values) != self.grid.size:
            raise ValueError("value vector length must match grid size")

    def norm(self):
        return self.grid.norm(self.values)

    def inner(self, other):
        return self.grid.inner(self.values, other.values)


# ----------------------------------------------------------------------
# test functions on two-dimensional Minkowski space
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class TestFunction:
    """Complex test function on R^2 with a declared support box ((a0_lo,a0_hi),(a1_lo,a1_hi))."""
    evaluator: Callable
    support: tuple
    label: str = ""

    def __call__(self, a0, a1):
        return self.evaluator(a0, a1)

    def check_support(self, n_samples=200, tol=1e-12, rng=None):
        """Sample outside the declared box and report the largest leak."""
        rng = rng or np.random.default_rng(0)
        (l0, u0), (l1, u1) = self.support
        s0, s1 = u0 - l0, u1 - l1
        pts0 = rng.uniform(l0 - 2 * s0, u0 + 2 * s0, size=n_samples)
        pts1 = rng.uniform(l1 - 2 * s1, u1 + 2 * s1, size=n_samples)
        outside = (pts0 < l0) | (pts0 > u0) | (pts1 < l1) | (pts1 > u1)
        if not np.any(outside):
            return 0.0
        vals = np.abs(np.asarray(self.evaluator(pts0[outside], pts1[outside]), dtype=complex))
        leak = float(vals.max())
        return leak if leak > tol else 0.0


def _bump1d(x, c, w):
    u = (np.asarray(x, dtype=float) - c) / w
    out = np.zeros_like(u)
    m = np.abs(u) < 1
    out[m] = np.exp(-1.0 / (1.0 - u[m] ** 2))
    return out


def bump(center, halfwidth, amplitude=1.0):
    """Product of two C-infinity bumps, exactly supported on the box center +- halfwidth."""
    c0, c1 = center
    w0, w1 = halfwidth
    ev = lambda a0, a1: amplitude * _bump1d(a0, c0, w0) * _bump1d(a1, c1, w1)
    box = ((c0 - w0, c0 + w0), (c1 - w1, c1 + w1))
    return TestFunction(evaluator=ev, support=box, label=f"bump@({c0},{c1})")


def gaussian(center, sigma, amplitude=1.0, cut=8.0):
    """Gaussian bump; support box declared at +-cut*sigma (tails < 1e-12 outside)."""
    c0, c1 = center
    s0, s1 = sigma
    ev = lambda a0, a1: amplitude * np.exp(
        -0.5 * (((np.asarray(a0) - c0) / s0) ** 2 + ((np.asarray(a1) - c1) / s1) ** 2))
    box = ((c0 - cut * s0, c0 + cut * s0), (c1 - cut * s1, c1 + cut * s1))
    return TestFunction(evaluator=ev, support=box, label=f"gauss@({c0},{c1})")


TEST_FUNCTION_FAMILIES = {"bump": bump, "gaussian": gaussian}


def test_function_from_spec(spec):
    """Build a test function from a declarative dict {family, center, width, [amplitude]}."""
    fam = spec.get("family")
    if fam not in TEST_FUNCTION_FAMILIES:
        raise ValueError(f"unknown test-function family {fam!r}")
    kw = {"center": tuple(spec["center"])}
    if fam == "bump":
        kw["halfwidth"] = tuple(spec["width"])
    else:
        kw["sigma"] = tuple(spec["width"])
    if "amplitude" in spec:
        kw["amplitude"] = spec["amplitude"]
    return TEST_FUNCTION_FAMILIES[fam](**kw)


# ---------- wedge geometry on support boxes ----------

def box_in_right_wedge(box, margin=0.0):
    """Whole box inside W_R = {a1 > |a0|}, with margin."""
    (l0, u0), (l1, u1) = box
    return l1 - margin > max(abs(l0), abs(u0))


def box_in_left_wedge(box, margin=0.0):
    (l0, u0), (l1, u1) = box
    return -u1 - margin > max(abs(l0), abs(u0))


def boxes_spacelike(box_a, box_b, margin=0.0):
    """Sufficient condition: max time distance < min spatial distance between the boxes."""
    (a0l, a0u), (a1l, a1u) = box_a
    (b0l, b0u), (b1l, b1u) = box_b
    max_dt = max(abs(a0l - b0u), abs(a0u - b0l))
    if a1l > b1u:
        min_dx = a1l - b1u
    elif b1l > a1u:
        min_dx = b1l - a1u
    else:
        min_dx = 0.0
    return min_dx - margin > max_dt


# ----------------------------------------------------------------------
# f_pm transforms and one-particle operators
# ----------------------------------------------------------------------

def pm_transform(f, grid, n_quad=200, tol=None):
    """f_pm(theta) = (1/2pi) int d^2a f(a) exp(+-i p(theta).a), by tensor Gauss-Legendre.

    Returns (f_plus, f_minus) as OneParticleVector. With tol set, the result is
    compared against a refined rule and QuadratureError is raised on disagreement.
    """
    fp, fm = _pm_fixed(f, grid, n_quad)
    if tol is not None:
        fp2, fm2 = _pm_fixed(f, grid, int(n_quad * 1.5))
        err = max(np.abs(fp - fp2).max(), np.abs(fm - fm2).max())
        if err > tol:
            raise QuadratureError(f"oscillatory quadrature not resolved: est {err:.3e} > {tol:.3e}")
    return (OneParticleVector(fp, grid), OneParticleVector(fm, grid))


def _pm_fixed(f, grid, nq):
    (l0, u0), (l1, u1) = f.support
    x, w = np.polynomial.legendre.leggauss(nq)
    a0 = 0.5 * (u0 - l0) * x + 0.5 * (u0 + l0)
    a1 = 0.5 * (u1 - l1) * x + 0.5 * (u1 + l1)
    W = np.outer(w, w) * (0.25 * (u0 - l0) * (u1 - l1))
    F = np.asarray(f(a0[:, None], a1[None, :]), dtype=complex) * W
    p0, p1 = grid.momentum()
    phase = p0[:, None, None] * a0[None, :, None] - p1[:, None, None] * a1[None, None, :]
    fplus = np.einsum("tij,ij->t", np.exp(1j * phase), F) / (2 * np.pi)
    fminus = np.einsum("tij,ij->t", np.exp(-1j * phase), F) / (2 * np.pi)
    return fplus, fminus


@dataclass(frozen=True)
class OneParticleOperator:
    """Matrix acting on function values; boundary_loss flags dropped off-grid components."""
    matrix: np.ndarray
    grid: RapidityGrid
    boundary_loss: bool = False

    def apply(self, psi):
        return OneParticleVector(self.matrix @ psi.values, self.grid)

    def ortho_matrix(self):
        """Same operator in orthonormal coordinates."""
        s = np.sqrt(self.grid.weights)
        return (s[:, None] * self.matrix) / s[None, :]


def poincare_u1(a, lam, grid):
    """U1(a,lambda) psi(theta) = exp(i p(theta).a) psi(theta - lambda).

    Boosts lambda must be integer multiples of the grid spacing; components shifted
    off the grid are dropped (boundary_loss is set on the returned operator).
    """
    h = grid.spacing
    steps = lam / h
    k = int(round(steps))
    if abs(steps - k) > 1e-9:
        raise ValueError("boost parameter must be an integer multiple of the grid spacing")
    d = grid.size
    shift = np.zeros((d, d))
    # psi(theta_i - lambda) = psi(theta_{i-k})
    for i in range(d):
        j = i - k
        if 0 <= j < d:
            shift[i, j] = 1.0
    p0, p1 = grid.momentum()
    a0, a1 = a
    phase = np.exp(1j * (p0 * a0 - p1 * a1))
    return OneParticleOperator(matrix=phase[:, None] * shift, grid=grid, boundary_loss=(k != 0))


def lightray_generator(grid, sign=+1):
    """Diagonal multiplication by m e^{sign*theta}; strictly positive spectrum."""
    return OneParticleOperator(matrix=np.diag(grid.lightcone_momentum(sign)), grid=grid)


def lightray_function(grid, func, sign=+1):
    """Functional calculus func(P) for the diagonal lightray generator."""
    vals = func(grid.lightcone_momentum(sign))
    return OneParticleOperator(matrix=np.diag(np.asarray(vals, dtype=complex)), grid=grid)
