"""Special functions and constants on the n-sphere.

Everything here is parametrised by the sphere dimension n >= 2 through
``Dimension``, which carries the Gegenbauer index ``lam = (n - 1) / 2``
and the total surface measure ``sigma``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import ConfigurationError, DomainError

__all__ = [
    "Dimension",
    "gamma_ln",
    "gegenbauer",
    "gegenbauer_dtheta",
    "zonal_kernel",
    "surface_measure",
    "harmonic_dim",
    "gegenbauer_sq_norm",
    "QuadratureRule",
    "gauss_jacobi",
    "gegenbauer_coefficient",
]

# harmonic_dim switches from exact integer arithmetic to a log-space
# approximation once the result would no longer be exactly representable.
_EXACT_LIMIT = 2.0**53


@dataclass(frozen=True)
class Dimension:
    """Sphere dimension n with derived constants.

    Parameters
    ----------
    n : int
        Dimension of the sphere S^n (the sphere lives in R^{n+1}).
        Must be >= 2.
    """

    n: int

    def __post_init__(self) -> None:
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise ConfigurationError(f"sphere dimension must be an integer, got {self.n!r}")
        if self.n < 2:
            raise ConfigurationError(f"sphere dimension must be >= 2, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def lam(self) -> float:
        """Gegenbauer index lambda = (n - 1) / 2."""
        return 0.5 * (self.n - 1)

    @property
    def sigma(self) -> float:
        """Total surface measure of S^n: 2 pi^(lam + 1) / Gamma(lam + 1)."""
        lam = self.lam
        return 2.0 * math.pi ** (lam + 1.0) / math.gamma(lam + 1.0)

    @property
    def ambient(self) -> int:
        """Dimension of the ambient Euclidean space, n + 1."""
        return self.n + 1


def gamma_ln(x: float) -> float:
    """log Gamma(x) for x > 0."""
    if x <= 0.0:
        raise DomainError(f"gamma_ln requires x > 0, got {x}")
    return math.lgamma(x)


def _check_t(t):
    arr = np.asarray(t, dtype=np.float64)
    if arr.size and (np.abs(arr) > 1.0 + 1e-12).any():
        raise DomainError("Gegenbauer argument must satisfy |t| <= 1")
    return np.clip(arr, -1.0, 1.0)


def gegenbauer(l: int, lam: float, t):
    """Gegenbauer polynomial C_l^lam(t) for |t| <= 1, lam > 0.

    Evaluated by the three-term forward recurrence

        l C_l = 2 (l + lam - 1) t C_{l-1} - (l + 2 lam - 2) C_{l-2},

    which is stable on [-1, 1].  Accepts scalar or array ``t``.
    """
    if l < 0:
        raise DomainError(f"degree must be >= 0, got {l}")
    if lam <= 0.0:
        raise DomainError(f"Gegenbauer index must be positive, got {lam}")
    return backend.gegenbauer_batch(int(l), float(lam), _check_t(t))


def gegenbauer_dtheta(l: int, lam: float, theta):
    """d/dtheta of C_l^lam(cos theta).

    Uses d/dt C_l^lam = 2 lam C_{l-1}^{lam+1} and the chain rule, so the
    result is -sin(theta) * 2 lam * C_{l-1}^{lam+1}(cos theta); identically
    zero for l = 0.
    """
    if l < 0:
        raise DomainError(f"degree must be >= 0, got {l}")
    if lam <= 0.0:
        raise DomainError(f"Gegenbauer index must be positive, got {lam}")
    th = np.asarray(theta, dtype=np.float64)
    scalar = th.ndim == 0
    if l == 0:
        out = np.zeros_like(th)
        return float(out) if scalar else out
    inner = backend.gegenbauer_batch(int(l - 1), float(lam + 1.0), np.cos(th))
    out = -np.sin(th) * 2.0 * lam * inner
    return float(out) if scalar else out


def zonal_kernel(l: int, dim: Dimension, t):
    """Normalised zonal kernel K_l(t) = ((l + lam) / lam) C_l^lam(t).

    K_l(1) equals the dimension of the degree-l harmonic space (see
    ``harmonic_dim``), and |K_l(t)| <= K_l(1) on [-1, 1].
    """
    lam = dim.lam
    return (l + lam) / lam * gegenbauer(l, lam, t)


def surface_measure(dim: Dimension) -> float:
    """Total surface measure of S^n (equals ``dim.sigma``)."""
    return dim.sigma


def harmonic_dim(dim: Dimension, l: int):
    """Dimension N(n, l) of the space of degree-l spherical harmonics on S^n.

    N(n, 0) = 1 and for l >= 1

        N(n, l) = (2 l + n - 1) (l + n - 2)! / ((n - 1)! l!).

    Returns an exact ``int`` whenever the value is <= 2**53, taking an
    all-integer path for small n + 2 l.  Raises OverflowError once the
    value can no longer be rounded reliably to the nearest integer.
    """
    if l < 0:
        raise DomainError(f"degree must be >= 0, got {l}")
    n = dim.n
    if l == 0:
        return 1
    if n + 2 * l <= 60:
        # (2l + n - 1) * C(l + n - 2, l) / (n - 1); the division is exact.
        num = (2 * l + n - 1) * math.comb(l + n - 2, l)
        q, r = divmod(num, n - 1)
        assert r == 0
        return q
    log_val = (
        math.log(2 * l + n - 1)
        + math.lgamma(l + n - 1)
        - math.lgamma(n)
        - math.lgamma(l + 1)
    )
    if log_val > math.log(_EXACT_LIMIT):
        raise OverflowError(
            f"harmonic_dim(n={n}, l={l}) exceeds 2**53 and cannot be "
            "returned as an exact integer"
        )
    return int(round(math.exp(log_val)))


def gegenbauer_sq_norm(l: int, lam: float) -> float:
    """Squared L^2 weight-norm of C_l^lam over [-1, 1].

    With weight (1 - t^2)^(lam - 1/2),

        h_l = pi 2^(1 - 2 lam) Gamma(l + 2 lam) / (l! (l + lam) Gamma(lam)^2).
    """
    if l < 0:
        raise DomainError(f"degree must be >= 0, got {l}")
    if lam <= 0.0:
        raise DomainError(f"Gegenbauer index must be positive, got {lam}")
    log_h = (
        math.log(math.pi)
        + (1.0 - 2.0 * lam) * math.log(2.0)
        + math.lgamma(l + 2.0 * lam)
        - math.lgamma(l + 1.0)
        - math.log(l + lam)
        - 2.0 * math.lgamma(lam)
    )
    return math.exp(log_h)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights for integration against (1 - t^2)^(lam - 1/2) dt."""

    nodes: np.ndarray
    weights: np.ndarray
    lam: float

    def integrate(self, f) -> float:
        """Integral of f(t) (1 - t^2)^(lam - 1/2) dt over [-1, 1]."""
        return float(np.dot(self.weights, f(self.nodes)))


def gauss_jacobi(q: int, lam: float) -> QuadratureRule:
    """Gauss quadrature for the symmetric Jacobi weight (1 - t^2)^(lam - 1/2).

    Golub-Welsch: nodes are eigenvalues of the tridiagonal Jacobi matrix
    built from the alpha = beta = lam - 1/2 recurrence coefficients, weights
    are mu0 times the squared first eigenvector components.  Exact for
    polynomial integrands up to degree 2 q - 1.
    """
    if q < 1:
        raise ConfigurationError(f"quadrature size must be >= 1, got {q}")
    if q > 2048:
        raise ConfigurationError(f"quadrature size too large ({q} > 2048)")
    if lam <= 0.0:
        raise DomainError(f"Gegenbauer index must be positive, got {lam}")
    from scipy.linalg import eigh_tridiagonal

    alpha = lam - 0.5
    # Total mass of the weight: int_{-1}^{1} (1-t^2)^(lam-1/2) dt
    mu0 = math.exp(
        math.log(math.pi) * 0.5 + math.lgamma(alpha + 1.0) - math.lgamma(alpha + 1.5)
    )
    diag = np.zeros(q)
    j = np.arange(1, q, dtype=np.float64)
    s = 2.0 * j + 2.0 * alpha
    # b_j^2 for symmetric Jacobi; the j = 1 case reduces to 1 / (2 alpha + 3).
    bsq = 4.0 * j * (j + alpha) ** 2 * (j + 2.0 * alpha) / (s**2 * (s + 1.0) * (s - 1.0))
    if q > 1:
        vals, vecs = eigh_tridiagonal(diag, np.sqrt(bsq))
        nodes = vals
        weights = mu0 * vecs[0, :] ** 2
    else:
        nodes = np.zeros(1)
        weights = np.array([mu0])
    return QuadratureRule(nodes=nodes, weights=weights, lam=float(lam))


def gegenbauer_coefficient(f, l: int, lam: float, q: int | None = None) -> float:
    """Coefficient of C_l^lam in the expansion of a function on [-1, 1].

    For f(t) = sum_k c_k C_k^lam(t), orthogonality against the weight
    (1 - t^2)^(lam - 1/2) gives

        c_l = (1 / h_l) * int f(t) C_l^lam(t) (1 - t^2)^(lam - 1/2) dt

    with h_l = ``gegenbauer_sq_norm``.  The integral is done by
    ``gauss_jacobi``; a rule of size q recovers c_l exactly (up to roundoff)
    whenever f is a polynomial of degree <= 2 q - 1 - l.  ``f`` must accept
    an array of nodes.
    """
    if q is None:
        q = max(4 * (l + 1), 64)
    rule = gauss_jacobi(q, lam)
    proj = float(np.dot(rule.weights, f(rule.nodes) * gegenbauer(l, lam, rule.nodes)))
    return proj / gegenbauer_sq_norm(l, lam)
