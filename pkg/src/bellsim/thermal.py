"""Sign correlations for entangled displaced-thermal states.

The state is a Gaussian mixture of even coherent superpositions: two thermal
P distributions with variance V, centered at d, weight the same four-dyad
skeleton used in `catstates`.  Every per-sample operation is therefore the
coherent-dyad machinery evaluated at the sampled amplitudes, and the full
correlation is a Gauss-Hermite integral over the two distributions.

Three evaluators with different trade-offs:

* `cets_quadrature` integrates the P distributions numerically.  The rotation
  angle enters each dyad only through four cos/sin routing coefficients, so
  the two mode integrals factorize into angle-independent pattern scalars and
  the cost is O(order^2) instead of O(order^4).  An order / order+8 agreement
  check guards convergence.  This is the ground-truth path.
* `cets_closed_form` evaluates an Erf/Erfi helper expression assembled by
  `ets_helpers`.  It is kept for diagnostics: it disagrees with the
  quadrature oracle (see the `validate` CLI check), so nothing downstream
  consumes it.
* `ets_correlation` is the closed form *of the quadrature*: both Gaussian
  integrals are doable analytically for the sign readout, leaving three
  scalars (`ets_moments`).  It matches `cets_quadrature` to the quadrature's
  own convergence floor and is what the Bell-optimization layer calls.

Decoherence before the measurement optics maps to a transmissivity through
`gamma_to_eta` and is applied as the pre-rotation loss.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass

import numpy as np

from .catstates import DyadTerm, GaussianDyadState, cat_rotation, dyad_loss, joint_sign_probs
from .fockspace import LossPlacement
from .numerics import erf_c, erfi_c, gauss_hermite

log = logging.getLogger(__name__)

_SQRT2 = math.sqrt(2.0)
_PATTERNS = ("kk", "kf", "fk", "ff")


@dataclass(frozen=True)
class ThermalParams:
    """Displaced thermal ensemble: variance V, center d, mean photon number nbar.

    The three satisfy V = 2 (nbar - d^2) + 1.  Construct with (V, d) and nbar
    is derived; if nbar is supplied as well it must be consistent.
    """

    V: float
    d: float
    nbar: float | None = None

    def __post_init__(self):
        if not (isinstance(self.d, (int, float)) and math.isfinite(self.d) and self.d > 0.0):
            raise ValueError(f"ThermalParams: d must be a finite positive real, got {self.d!r}")
        if not (isinstance(self.V, (int, float)) and math.isfinite(self.V) and self.V >= 1.0):
            raise ValueError(f"ThermalParams: V must be a finite real >= 1, got {self.V!r}")
        derived = 0.5 * (self.V - 1.0) + self.d * self.d
        if self.nbar is None:
            object.__setattr__(self, "nbar", derived)
        elif abs(float(self.nbar) - derived) > 1e-9 * max(1.0, derived):
            raise ValueError(
                f"ThermalParams: nbar={self.nbar!r} inconsistent with V={self.V!r}, "
                f"d={self.d!r} (expected {derived!r})"
            )


def gamma_to_eta(gamma_t: float) -> float:
    """Transmissivity equivalent to a decoherence time, eta = exp(-gamma t).

    The result is meant to be used as the pre-rotation loss (eta_before):
    photons lost during state preparation and storage are gone before any
    measurement optics act.
    """
    if not (isinstance(gamma_t, (int, float)) and math.isfinite(gamma_t) and gamma_t >= 0.0):
        raise ValueError(f"gamma_to_eta: gamma_t must be a finite real >= 0, got {gamma_t!r}")
    return math.exp(-float(gamma_t))


# ---------------------------------------------------------------------------
# Closed-form helper expression
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EtsHelperSet:
    """Helper values entering the closed-form correlation at one angle pair.

    For real angles g is real (Erfi of a real argument) and f_plus/f_minus
    are complex conjugates of each other; h is even in its angle.  These
    identities are covered by the tests.
    """

    s_a: float
    s_b: float
    h_a: float
    h_b: float
    g_a: complex
    g_b: complex
    v1: float
    v2: complex
    q: complex
    f_plus_a: complex
    f_minus_a: complex
    f_plus_b: complex
    f_minus_b: complex


def _sign(theta: float) -> float:
    # sign convention with s(0) = +1, so the expression is deterministic there
    return 1.0 if theta >= 0.0 else -1.0


def ets_helpers(theta_a: float, theta_b: float, params: ThermalParams, eta: float) -> EtsHelperSet:
    """Evaluate every helper of the closed-form correlation.

    Raises ValueError naming the offending helper if any evaluation is
    non-finite (the h and Q exponents overflow for extreme d^2/V or tiny d).
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"ets_helpers: eta must lie in (0, 1], got {eta!r}")
    v, d = float(params.V), float(params.d)
    ta, tb = float(theta_a), float(theta_b)

    def guarded_exp(name: str, real_part: float, imag_part: float = 0.0) -> complex:
        try:
            mag = math.exp(real_part)
        except OverflowError:
            mag = math.inf
        if not math.isfinite(mag):
            raise ValueError(
                f"ets_helpers: helper {name} overflowed (exponent {real_part:.6g}) "
                f"at V={v}, d={d}"
            )
        return mag * cmath.exp(1j * imag_part)

    h_a = guarded_exp("h(theta_a)", 2.0 * (d ** 4 + ta * ta) / (d * d * v)).real
    h_b = guarded_exp("h(theta_b)", 2.0 * (d ** 4 + tb * tb) / (d * d * v)).real
    # 1 + V^2 e^(4 d^2 / V) combined in log space so v1 survives where the
    # inner exponential alone would overflow
    v1 = 0.125 * math.exp(-np.logaddexp(0.0, 2.0 * math.log(v) + 4.0 * d * d / v))
    v2 = guarded_exp(
        "V2",
        -2.0 * (1.0 + v * v) * (ta * ta + tb * tb) / (d * d * v),
        -4.0 * (ta + tb),
    )
    q = 8.0 * guarded_exp("Q", 2.0 * v * (ta * ta + tb * tb) / (d * d), 4.0 * tb)

    g_scale = _SQRT2 * eta / (d * math.sqrt(v * v - eta * eta * v * (v - 1.0)))
    f_scale = _SQRT2 * eta / (d * math.sqrt(1.0 + eta * eta * (v - 1.0)))
    named = {
        "g(theta_a)": complex(erfi_c(g_scale * ta)),
        "g(theta_b)": complex(erfi_c(g_scale * tb)),
        "f_plus(theta_a)": complex(erf_c(f_scale * (d * d + 1j * v * ta))),
        "f_minus(theta_a)": complex(erf_c(f_scale * (d * d - 1j * v * ta))),
        "f_plus(theta_b)": complex(erf_c(f_scale * (d * d + 1j * v * tb))),
        "f_minus(theta_b)": complex(erf_c(f_scale * (d * d - 1j * v * tb))),
    }
    for name, value in named.items():
        if not (math.isfinite(value.real) and math.isfinite(value.imag)):
            raise ValueError(f"ets_helpers: helper {name} is non-finite at V={v}, d={d}, eta={eta}")
    return EtsHelperSet(
        s_a=_sign(ta),
        s_b=_sign(tb),
        h_a=h_a,
        h_b=h_b,
        g_a=named["g(theta_a)"],
        g_b=named["g(theta_b)"],
        v1=v1,
        v2=v2,
        q=q,
        f_plus_a=named["f_plus(theta_a)"],
        f_minus_a=named["f_minus(theta_a)"],
        f_plus_b=named["f_plus(theta_b)"],
        f_minus_b=named["f_minus(theta_b)"],
    )


def cets_closed_form(theta_a: float, theta_b: float, params: ThermalParams, eta: float) -> float:
    """Closed-form correlation assembled from the `ets_helpers` values.

    All positive exponents are combined in log space before exponentiation
    (the literal v1 * h and v1 * Q products overflow long before the combined
    exponent does).  Returns the real part; the imaginary residue is logged
    at DEBUG level.

    The quadrature oracle disagrees with this expression away from trivial
    points, so it is retained for diagnostics only; see the `validate` CLI
    check for the recorded comparison.
    """
    hs = ets_helpers(theta_a, theta_b, params, eta)
    v, d = float(params.V), float(params.d)
    ta, tb = float(theta_a), float(theta_b)

    l_v1 = math.log(0.125) - np.logaddexp(0.0, 2.0 * math.log(v) + 4.0 * d * d / v)
    l_h_a = 2.0 * (d ** 4 + ta * ta) / (d * d * v)
    l_h_b = 2.0 * (d ** 4 + tb * tb) / (d * d * v)
    re_l_v2 = -2.0 * (1.0 + v * v) * (ta * ta + tb * tb) / (d * d * v)
    ph_v2 = cmath.exp(-4j * (ta + tb))
    l_q = math.log(8.0) + 2.0 * v * (ta * ta + tb * tb) / (d * d)
    ph_q = cmath.exp(4j * tb)

    # every combined real exponent below is <= 0, so math.exp cannot overflow
    piece_a = (
        hs.g_a * hs.g_b * hs.s_b
        * ph_q * cmath.exp(4j * ta) * ph_v2
        * math.exp(l_v1 + re_l_v2 + l_q)
    )
    piece_b = (
        1j * hs.g_a * (hs.f_minus_b - cmath.exp(8j * tb) * hs.f_plus_b)
        * cmath.exp(4j * ta) * ph_v2
        * math.exp(2.0 * l_v1 + re_l_v2 + 2.0 * d * d / v + l_h_b)
    )
    piece_c = (
        1j * hs.g_b * hs.s_b * (hs.f_minus_a - cmath.exp(8j * tb) * hs.f_plus_a)
        * cmath.exp(4j * tb) * ph_v2
        * math.exp(2.0 * l_v1 + re_l_v2 + l_h_a + 2.0 * v * tb * tb / (d * d))
    )
    piece_d = (
        4.0 * (hs.f_minus_b * hs.f_plus_a + hs.f_minus_a * hs.f_plus_b)
        * cmath.exp(8j * ta) * ph_v2
        * math.exp(3.0 * l_v1 + re_l_v2 + l_h_a + l_h_b)
    )
    total = piece_a + piece_b + piece_c + piece_d
    log.debug(
        "cets_closed_form(%g, %g, V=%g, d=%g, eta=%g): imaginary residue %.3e",
        ta, tb, v, d, eta, abs(total.imag),
    )
    return total.real


# ---------------------------------------------------------------------------
# Gauss-Hermite quadrature over the P distributions
# ---------------------------------------------------------------------------


def _n_plus(params: ThermalParams) -> float:
    v, d = float(params.V), float(params.d)
    return 1.0 / (2.0 * (1.0 + math.exp(-4.0 * d * d / v) / (v * v)))


def _overlap_arr(bra: np.ndarray, ket: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * (np.abs(ket) ** 2 + np.abs(bra) ** 2) + np.conj(bra) * ket)


def _loss_damp_arr(ket: np.ndarray, bra: np.ndarray, eta: float) -> np.ndarray:
    return np.exp(-0.5 * (1.0 - eta) * (np.abs(ket) ** 2 + np.abs(bra) ** 2 - 2.0 * np.conj(bra) * ket))


def _halfline_diff_arr(ket: np.ndarray, bra: np.ndarray) -> np.ndarray:
    # integral of sign(x) <x|ket><bra|x> dx = <bra|ket> erf((ket + conj(bra)) / sqrt 2)
    return _overlap_arr(bra, ket) * erf_c((ket + np.conj(bra)) / _SQRT2)


def _rotation_coeffs(theta: float) -> dict[str, complex]:
    # routing coefficients of the cat rotation: ket kept/flipped times bra
    # kept/flipped, matching the path factors in catstates.cat_rotation
    c, s = math.cos(theta), math.sin(theta)
    return {"kk": complex(c * c), "kf": -1j * c * s, "fk": 1j * s * c, "ff": complex(s * s)}


def _pattern_scalars(
    params: ThermalParams, eta1: float, eta2: float, order: int
) -> dict[tuple[float, float], dict[str, tuple[complex, complex]]]:
    """Angle-independent per-mode quadrature sums.

    For each initial dyad sign pair (s1, s2) and each rotation routing
    pattern, integrates the P-weighted product of the eta1 damping, the eta2
    damping, and the readout factor.  Each entry is (norm, diff): the plain
    overlap integral (I+ + I-) and the signed half-line difference (I+ - I-).
    Both modes share these scalars because their marginals are identical.
    """
    v, d = float(params.V), float(params.d)
    rule = gauss_hermite(order)
    spread = math.sqrt(0.5 * (v - 1.0))
    x, y = np.meshgrid(rule.nodes, rule.nodes, indexing="ij")
    weight = np.outer(rule.weights, rule.weights) / math.pi
    alpha = d + spread * (x + 1j * y)
    kept = math.sqrt(eta1) * alpha
    root2 = math.sqrt(eta2)
    out: dict[tuple[float, float], dict[str, tuple[complex, complex]]] = {}
    for s1 in (1.0, -1.0):
        for s2 in (1.0, -1.0):
            damp1 = _loss_damp_arr(s1 * alpha, s2 * alpha, eta1)
            pats: dict[str, tuple[complex, complex]] = {}
            for pat, ket, bra in (
                ("kk", s1 * kept, s2 * kept),
                ("kf", s1 * kept, -s2 * kept),
                ("fk", -s1 * kept, s2 * kept),
                ("ff", -s1 * kept, -s2 * kept),
            ):
                damp2 = _loss_damp_arr(ket, bra, eta2)
                common = weight * damp1 * damp2
                norm = complex(np.sum(common * _overlap_arr(root2 * bra, root2 * ket)))
                diff = complex(np.sum(common * _halfline_diff_arr(root2 * ket, root2 * bra)))
                pats[pat] = (norm, diff)
            out[(s1, s2)] = pats
    return out


def _assemble_correlation(
    scal: dict[tuple[float, float], dict[str, tuple[complex, complex]]],
    n_plus: float,
    theta_a: float,
    theta_b: float,
) -> complex:
    """Contract precomputed pattern scalars with the two rotation angles."""
    ca, cb = _rotation_coeffs(theta_a), _rotation_coeffs(theta_b)
    total = 0.0 + 0.0j
    for pats in scal.values():
        diff_a = sum(ca[p] * pats[p][1] for p in _PATTERNS)
        diff_b = sum(cb[p] * pats[p][1] for p in _PATTERNS)
        total += diff_a * diff_b
    return n_plus * total


def _ets_engine(
    theta_a: float,
    theta_b: float,
    params: ThermalParams,
    eta1: float,
    eta2: float,
    order: int,
) -> complex:
    """Factorized sign correlation at one quadrature order, both losses free."""
    scal = _pattern_scalars(params, eta1, eta2, order)
    return _assemble_correlation(scal, _n_plus(params), theta_a, theta_b)


def _ets_sign_probs(
    theta_a: float,
    theta_b: float,
    params: ThermalParams,
    eta1: float,
    eta2: float,
    order: int,
) -> tuple[float, float, float, float]:
    """Joint quadrature-sign probabilities (++, +-, -+, --) from the scalars."""
    scal = _pattern_scalars(params, eta1, eta2, order)
    ca, cb = _rotation_coeffs(theta_a), _rotation_coeffs(theta_b)
    sums = [0.0 + 0.0j] * 4
    for pats in scal.values():
        norm_a = sum(ca[p] * pats[p][0] for p in _PATTERNS)
        diff_a = sum(ca[p] * pats[p][1] for p in _PATTERNS)
        norm_b = sum(cb[p] * pats[p][0] for p in _PATTERNS)
        diff_b = sum(cb[p] * pats[p][1] for p in _PATTERNS)
        a_plus, a_minus = 0.5 * (norm_a + diff_a), 0.5 * (norm_a - diff_a)
        b_plus, b_minus = 0.5 * (norm_b + diff_b), 0.5 * (norm_b - diff_b)
        for i, term in enumerate((a_plus * b_plus, a_plus * b_minus, a_minus * b_plus, a_minus * b_minus)):
            sums[i] += term
    n_plus = _n_plus(params)
    raw = []
    for value in sums:
        value *= n_plus
        if abs(value.imag) > 1e-10:
            raise ValueError(
                f"_ets_sign_probs: imaginary residue {value.imag:.3e} exceeds 1e-10"
            )
        raw.append(value.real)
    if abs(sum(raw) - 1.0) > 1e-6:
        raise ValueError(f"_ets_sign_probs: probabilities sum to {sum(raw)!r}, state corrupted")
    return tuple(min(1.0, max(0.0, p)) for p in raw)


def _cets_per_sample(
    theta_a: float,
    theta_b: float,
    params: ThermalParams,
    eta1: float,
    eta2: float,
    order: int,
) -> float:
    """Literal per-sample pipeline, kept as the reference the fast path must match.

    Every P-representation sample pair becomes a four-dyad state that is
    pushed through dyad_loss / cat_rotation / joint_sign_probs with the
    rotation basis anchored at that sample's decayed amplitude.  Cost grows
    as order^4, so this is for cross-checks at small orders only.
    """
    v, d = float(params.V), float(params.d)
    rule = gauss_hermite(order)
    spread = math.sqrt(0.5 * (v - 1.0))
    samples = [
        (d + spread * (xi + 1j * yi), wi * wj / math.pi)
        for xi, wi in zip(rule.nodes, rule.weights)
        for yi, wj in zip(rule.nodes, rule.weights)
    ]
    root1 = math.sqrt(eta1)
    total = 0.0
    for amp_a, w_a in samples:
        for amp_b, w_b in samples:
            terms = tuple(
                DyadTerm(1.0, s1 * amp_a, s2 * amp_a, s1 * amp_b, s2 * amp_b)
                for s1 in (1.0, -1.0)
                for s2 in (1.0, -1.0)
            )
            tr = GaussianDyadState(terms=terms).trace().real
            state = GaussianDyadState(
                terms=tuple(
                    DyadTerm(t.coeff / tr, t.ket_a, t.bra_a, t.ket_b, t.bra_b) for t in terms
                )
            )
            state = dyad_loss(state, "a", eta1)
            state = dyad_loss(state, "b", eta1)
            state = cat_rotation(state, "a", theta_a, root1 * amp_a)
            state = cat_rotation(state, "b", theta_b, root1 * amp_b)
            state = dyad_loss(state, "a", eta2)
            state = dyad_loss(state, "b", eta2)
            p_pp, p_pm, p_mp, p_mm = joint_sign_probs(state)
            total += w_a * w_b * tr * (p_pp - p_pm - p_mp + p_mm)
    return _n_plus(params) * total


def cets_quadrature(
    theta_a: float, theta_b: float, params: ThermalParams, eta: float, order: int
) -> float:
    """Quadrature-oracle correlation with eta applied as the pre-rotation loss.

    Evaluates the factorized Gauss-Hermite sum at `order` and `order + 8` and
    requires the pair to agree within 1e-4 (raises with both values
    otherwise); the refined evaluation is returned.  The N_+ normalization of
    the state is included.
    """
    if isinstance(order, bool) or not isinstance(order, int) or not 8 <= order <= 48:
        raise ValueError(f"cets_quadrature: order must be an integer in [8, 48], got {order!r}")
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"cets_quadrature: eta must lie in (0, 1], got {eta!r}")
    if not (math.isfinite(theta_a) and math.isfinite(theta_b)):
        raise ValueError(f"cets_quadrature: angles must be finite, got {theta_a!r}, {theta_b!r}")
    coarse = _ets_engine(theta_a, theta_b, params, eta, 1.0, order)
    fine = _ets_engine(theta_a, theta_b, params, eta, 1.0, order + 8)
    if not abs(fine - coarse) < 1e-4:
        raise ValueError(
            f"cets_quadrature: no convergence at order {order}: "
            f"E({order}) = {coarse.real!r}, E({order + 8}) = {fine.real!r}"
        )
    if abs(fine.imag) > 1e-10:
        raise ValueError(f"cets_quadrature: imaginary residue {fine.imag:.3e} exceeds 1e-10")
    return fine.real


# ---------------------------------------------------------------------------
# Reduced closed form of the quadrature
# ---------------------------------------------------------------------------


def ets_moments(params: ThermalParams, loss: LossPlacement) -> tuple[float, float, float]:
    """The three scalars (n_plus, f0, jx) of the reduced sign correlation.

    The half-line sign difference of each lossy dyad is an erf of a linear
    function of the sampled amplitude, so both P integrals have closed forms.
    Same-sign dyads keep the plain detection factor f0; the cross dyads pick
    up the coherence-damping factor jx, which carries the pre-rotation-loss
    suppression exp(-2 (1 - eta1) d^2 / W) / W with W = 1 + (1 - eta1)(V - 1).
    Mixed keep/flip routing patterns integrate to zero because the thermal
    weight is symmetric in Im(alpha).
    """
    v, d = float(params.V), float(params.d)
    eta1, eta2 = loss.eta_before, loss.eta_after
    both = eta1 * eta2
    f0 = float(erf_c(math.sqrt(2.0 * both) * d / math.sqrt(1.0 + both * (v - 1.0))).real)
    w = 1.0 + (1.0 - eta1) * (v - 1.0)
    jx = (
        float(erf_c(math.sqrt(2.0 * both) * d / math.sqrt(w * (w + both * (v - 1.0)))).real)
        * math.exp(-2.0 * (1.0 - eta1) * d * d / w)
        / w
    )
    return _n_plus(params), f0, jx


def ets_correlation(theta_a: float, theta_b: float, params: ThermalParams, loss: LossPlacement) -> float:
    """Reduced closed form of the quadrature, for fast optimization.

    E = 2 N_+ [f0^2 cos 2theta_a cos 2theta_b - jx^2 sin 2theta_a sin 2theta_b],
    with the scalars from `ets_moments`.  Agrees with `cets_quadrature` to the
    quadrature's convergence floor (covered by the tests).
    """
    n_plus, f0, jx = ets_moments(params, loss)
    return (
        2.0
        * n_plus
        * (
            f0 * f0 * math.cos(2.0 * theta_a) * math.cos(2.0 * theta_b)
            - jx * jx * math.sin(2.0 * theta_a) * math.sin(2.0 * theta_b)
        )
    )
