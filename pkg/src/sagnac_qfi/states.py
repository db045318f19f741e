"""Two-branch GHZ-type input states and their correlation functions.

Both interferometer input families share one shape: an equal superposition of
two N-fold product branches, one per spin orientation, each branch carrying a
single bosonic mode state,

    |psi> = ( |+1, u>^{(x)N} + |-1, v>^{(x)N} ) / sqrt(2).

Because the spin factors of the two branches are orthogonal at every site,
the state is exactly normalized whatever the spatial overlap <u|v>, and every
expectation of operators diagonal in the spin label reduces to the equal
weight average of per-branch expectations.  That branch-average rule is what
correlations_generic implements; correlations_closed_form carries the
tabulated special cases for D(alpha)|n> branches (partially entangled) and
|alpha>, |-alpha> coherent branches (globally entangled).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .exceptions import TruncationError

DEFAULT_LEAKAGE = 1e-10


@dataclass(frozen=True)
class BranchState:
    """One product branch: a spin eigenvalue and a truncated mode state."""

    spin_sign: int
    mode_amplitudes: np.ndarray

    def __post_init__(self):
        if self.spin_sign not in (+1, -1):
            raise ValueError(f"spin_sign must be +1 or -1, got {self.spin_sign}")
        amps = np.asarray(self.mode_amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size < 1:
            raise ValueError("mode_amplitudes must be a nonempty 1-d vector")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"branch not normalized: sum |amp|^2 = {norm!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "mode_amplitudes", amps)

    @property
    def truncation(self) -> int:
        return self.mode_amplitudes.size


@dataclass(frozen=True)
class GhzProductState:
    branch_up: BranchState
    branch_down: BranchState
    n_particles: int

    def __post_init__(self):
        if self.branch_up.spin_sign != +1 or self.branch_down.spin_sign != -1:
            raise ValueError("branch_up must carry spin +1 and branch_down spin -1")
        if self.branch_up.truncation != self.branch_down.truncation:
            raise ValueError("both branches must share one truncation")
        if self.n_particles < 1:
            raise ValueError(f"n_particles must be positive, got {self.n_particles}")

    @property
    def truncation(self) -> int:
        return self.branch_up.truncation


@dataclass(frozen=True)
class CorrelationSet:
    """The six correlation functions feeding the general QFI.

    X is the quadrature C1 a^dag + C1* a on one site; indices 1, 2 label any
    two distinct sites (all sites are equivalent by permutation symmetry).
    """

    var_x1: float
    var_sz1: float
    cov_x1_sz1: float
    cov_x1_x2: float
    cov_sz1_sz2: float
    cov_x1_sz2: float

    def __post_init__(self):
        if self.var_x1 < -1e-12 or self.var_sz1 < -1e-12:
            raise ValueError("variances must be nonnegative")
        bound = math.sqrt(max(self.var_x1, 0.0) * max(self.var_sz1, 0.0))
        if abs(self.cov_x1_sz1) > bound + 1e-10:
            raise ValueError(
                f"Cauchy-Schwarz violated: |{self.cov_x1_sz1}| > sqrt({self.var_x1} * {self.var_sz1})"
            )


def displaced_fock_amplitudes(alpha: complex, n: int, d: int) -> np.ndarray:
    """Fock amplitudes <m|D(alpha)|n> for m = 0..d-1.

    Associated-Laguerre closed form, evaluated through log-Gamma so large
    factorial ratios never overflow.  This is the independent counterpart of
    the oracle's matrix-exponential displacement column.
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    if d < 1:
        raise ValueError(f"d must be positive, got {d}")
    if n >= d:
        raise ValueError(f"Fock level n = {n} does not fit in truncation d = {d}")
    alpha = complex(alpha)
    if alpha == 0:
        amps = np.zeros(d, dtype=complex)
        amps[n] = 1.0
        return amps
    m = np.arange(d)
    x = abs(alpha) ** 2
    theta = np.angle(alpha)
    out = np.zeros(d, dtype=complex)

    hi = m >= n
    k = m[hi] - n
    log_mag = 0.5 * (gammaln(n + 1) - gammaln(m[hi] + 1)) + k * math.log(abs(alpha))
    out[hi] = (
        np.exp(log_mag - x / 2.0)
        * np.exp(1j * k * theta)
        * eval_genlaguerre(n, k, x)
    )
    lo = ~hi
    k = n - m[lo]
    log_mag = 0.5 * (gammaln(m[lo] + 1) - gammaln(n + 1)) + k * math.log(abs(alpha))
    out[lo] = (
        np.exp(log_mag - x / 2.0)
        * (-np.exp(-1j * theta)) ** k
        * eval_genlaguerre(m[lo], k, x)
    )
    return out


def auto_truncation(alpha: complex, n: int = 0, leakage: float = DEFAULT_LEAKAGE) -> int:
    """Smallest d with Poisson(|alpha|^2) tail mass below the leakage bound,
    plus n + 10 headroom levels.  The headroom pushes the realized tail of
    D(alpha)|n> orders of magnitude below the bound."""
    lam = abs(alpha) ** 2
    if lam == 0.0:
        return n + 11
    term = math.exp(-lam)
    cum = term
    d0 = 1
    while 1.0 - cum > leakage:
        term *= lam / d0
        cum += term
        d0 += 1
        if d0 > 10_000:
            raise TruncationError(f"no truncation found for |alpha|^2 = {lam}")
    return d0 + n + 10


def _build_branches(amps: np.ndarray, d: int, leakage: float, alpha, n):
    leak = 1.0 - float(np.sum(np.abs(amps) ** 2))
    if leak > leakage:
        raise TruncationError(
            f"truncation d = {d} leaks {leak:.3e} > {leakage:.3e} for "
            f"alpha = {alpha}, n = {n}",
            suggested_d=auto_truncation(alpha, n, leakage),
        )
    amps = amps / math.sqrt(1.0 - leak)
    return amps


def make_partially_entangled(
    alpha: complex,
    n: int,
    d: int = 0,
    n_particles: int = 1,
    leakage: float = DEFAULT_LEAKAGE,
) -> GhzProductState:
    """Both branches carry the same displaced Fock state D(alpha)|n>;
    only the spins differ."""
    if d == 0:
        d = auto_truncation(alpha, n, leakage)
    amps = _build_branches(displaced_fock_amplitudes(alpha, n, d), d, leakage, alpha, n)
    return GhzProductState(
        branch_up=BranchState(+1, amps),
        branch_down=BranchState(-1, amps.copy()),
        n_particles=n_particles,
    )


def make_globally_entangled(
    alpha: complex,
    d: int = 0,
    n_particles: int = 1,
    leakage: float = DEFAULT_LEAKAGE,
) -> GhzProductState:
    """Spin +1 branch carries |alpha>, spin -1 branch carries |-alpha>."""
    if d == 0:
        d = auto_truncation(alpha, 0, leakage)
    up = _build_branches(displaced_fock_amplitudes(alpha, 0, d), d, leakage, alpha, 0)
    down = _build_branches(
        displaced_fock_amplitudes(-alpha, 0, d), d, leakage, -alpha, 0
    )
    return GhzProductState(
        branch_up=BranchState(+1, up),
        branch_down=BranchState(-1, down),
        n_particles=n_particles,
    )


def _mode_moments(amps: np.ndarray):
    """<a>, <a^2>, <n> of a truncated mode state."""
    d = amps.size
    k = np.arange(d, dtype=float)
    a_mean = complex(np.sum(np.conj(amps[:-1]) * amps[1:] * np.sqrt(k[1:])))
    if d >= 3:
        a2_mean = complex(
            np.sum(np.conj(amps[:-2]) * amps[2:] * np.sqrt(k[1:-1] * (k[1:-1] + 1.0)))
        )
    else:
        a2_mean = 0.0 + 0.0j
    n_mean = float(np.sum(k * np.abs(amps) ** 2))
    return a_mean, a2_mean, n_mean


def _branch_x_moments(amps: np.ndarray, c1: complex):
    """<X> and <X^2> on one branch, X = c1 a^dag + c1* a."""
    a_mean, a2_mean, n_mean = _mode_moments(amps)
    x = 2.0 * (np.conj(c1) * a_mean).real
    x2 = 2.0 * (np.conj(c1) ** 2 * a2_mean).real + abs(c1) ** 2 * (2.0 * n_mean + 1.0)
    return x, x2


def correlations_generic(state: GhzProductState, c1: complex) -> CorrelationSet:
    """All six correlations by branch averaging.

    Cross-branch matrix elements vanish because the two branches differ in
    every spin factor and X, sigma_z never flip spins; this holds even at
    N = 1 where it is the spin orthogonality alone doing the work.  So every
    moment is the equal-weight average of branch moments, with two-site
    moments factorizing inside a branch.
    """
    x_u, x2_u = _branch_x_moments(state.branch_up.mode_amplitudes, c1)
    x_d, x2_d = _branch_x_moments(state.branch_down.mode_amplitudes, c1)
    s_u = float(state.branch_up.spin_sign)
    s_d = float(state.branch_down.spin_sign)

    x_mean = 0.5 * (x_u + x_d)
    s_mean = 0.5 * (s_u + s_d)
    return CorrelationSet(
        var_x1=0.5 * (x2_u + x2_d) - x_mean**2,
        var_sz1=0.5 * (s_u**2 + s_d**2) - s_mean**2,
        cov_x1_sz1=0.5 * (x_u * s_u + x_d * s_d) - x_mean * s_mean,
        cov_x1_x2=0.5 * (x_u**2 + x_d**2) - x_mean**2,
        cov_sz1_sz2=0.5 * (s_u**2 + s_d**2) - s_mean**2,
        cov_x1_sz2=0.5 * (x_u * s_u + x_d * s_d) - x_mean * s_mean,
    )


def correlations_closed_form(
    kind: str, alpha: complex, c1: complex, n: int = 0
) -> CorrelationSet:
    """Tabulated correlations.

    kind "partial": branches D(alpha)|n> with opposite spins.  The X moments
    are displacement-independent, Var(X1) = (2n+1)|c1|^2, and all X-spin and
    X-X covariances vanish.

    kind "global": coherent branches |alpha>, |-alpha>.  With
    re = Re(c1 alpha*), Var(X1) = 4 re^2 + |c1|^2, Cov(X1,X2) = 4 re^2 and
    the X-spin covariances equal 2 re.
    """
    if kind == "partial":
        return CorrelationSet(
            var_x1=(2.0 * n + 1.0) * abs(c1) ** 2,
            var_sz1=1.0,
            cov_x1_sz1=0.0,
            cov_x1_x2=0.0,
            cov_sz1_sz2=1.0,
            cov_x1_sz2=0.0,
        )
    if kind == "global":
        re = (c1 * np.conj(alpha)).real
        return CorrelationSet(
            var_x1=4.0 * re**2 + abs(c1) ** 2,
            var_sz1=1.0,
            cov_x1_sz1=2.0 * re,
            cov_x1_x2=4.0 * re**2,
            cov_sz1_sz2=1.0,
            cov_x1_sz2=2.0 * re,
        )
    raise ValueError(f"unknown closed-form kind {kind!r}")


def correlations_single_branch(n: int, c1: complex) -> CorrelationSet:
    """Correlations of a plain product state D(alpha)|n> (x) |up> per site, no
    superposition.  All covariances and the spin variance vanish, so the QFI
    is purely shot-noise: F = 4 N t_c^2 (2n+1) |c1|^2."""
    return CorrelationSet(
        var_x1=(2.0 * n + 1.0) * abs(c1) ** 2,
        var_sz1=0.0,
        cov_x1_sz1=0.0,
        cov_x1_x2=0.0,
        cov_sz1_sz2=0.0,
        cov_x1_sz2=0.0,
    )
