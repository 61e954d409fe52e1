"""Gaussian-dyad algebra for entangled coherent states.

A state is a finite sum of coherent dyads

    coeff * |ket_a><bra_a| (x) |ket_b><bra_b|,

and every pipeline step acts term by term in closed form: beam-splitter loss
rescales amplitudes and multiplies a scalar, the cat-basis rotation expands a
term into at most four, and the sign-binned homodyne readout is a Gaussian
half-line integral with an erf closed form.  Nothing is truncated, so the
pipeline is exact up to float rounding.  A truncated Fock-basis oracle with
numerically integrated quadrature distributions provides an independent
cross-check.

Conventions: quadrature x = a + a^dag (vacuum variance 1), so
<x|g> = (2pi)^(-1/4) exp(-(x - 2 Re g)^2 / 4 + i Im g (x - Re g)).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .fockspace import LossPlacement
from .numerics import erf_c

__all__ = [
    "DyadTerm",
    "GaussianDyadState",
    "coherent_overlap",
    "make_ecs",
    "dyad_loss",
    "cat_rotation",
    "homodyne_halfline",
    "joint_sign_probs",
    "correlation_ecs",
    "correlation_ecs_closed",
    "fock_oracle_ecs",
]

_SQRT2 = math.sqrt(2.0)


def coherent_overlap(bra: complex, ket: complex) -> complex:
    """<bra|ket> = exp(-(|ket|^2 + |bra|^2)/2 + conj(bra) ket)."""
    b = complex(bra)
    k = complex(ket)
    return cmath.exp(-0.5 * (abs(k) ** 2 + abs(b) ** 2) + b.conjugate() * k)


@dataclass(frozen=True)
class DyadTerm:
    """One weighted coherent dyad |ket_a><bra_a| (x) |ket_b><bra_b|."""

    coeff: complex
    ket_a: complex
    bra_a: complex
    ket_b: complex
    bra_b: complex

    def __post_init__(self):
        for name in ("coeff", "ket_a", "bra_a", "ket_b", "bra_b"):
            value = complex(getattr(self, name))
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise ValueError(f"DyadTerm.{name} must be finite, got {value!r}")

    def dagger(self) -> "DyadTerm":
        return DyadTerm(
            coeff=complex(self.coeff).conjugate(),
            ket_a=self.bra_a,
            bra_a=self.ket_a,
            ket_b=self.bra_b,
            bra_b=self.ket_b,
        )


@dataclass(frozen=True)
class GaussianDyadState:
    """Finite dyad expansion of a two-mode state."""

    terms: tuple[DyadTerm, ...]

    def trace(self) -> complex:
        return sum(
            t.coeff * coherent_overlap(t.bra_a, t.ket_a) * coherent_overlap(t.bra_b, t.ket_b)
            for t in self.terms
        )

    def validate(self) -> None:
        """Assert unit trace (1e-10) and Hermiticity of the term list."""
        tr = self.trace()
        if abs(tr - 1.0) > 1e-10:
            raise ValueError(f"trace deviates from 1 by {abs(tr - 1.0):.3e}")
        for t in self.terms:
            want = t.dagger()
            if not any(
                abs(o.coeff - want.coeff) <= 1e-12 * max(1.0, abs(want.coeff))
                and o.ket_a == want.ket_a
                and o.bra_a == want.bra_a
                and o.ket_b == want.ket_b
                and o.bra_b == want.bra_b
                for o in self.terms
            ):
                raise ValueError(f"missing conjugate partner for term {t!r}")


def make_ecs(alpha: float) -> GaussianDyadState:
    """Even superposition of |alpha,alpha> and |-alpha,-alpha>, normalized.

    All four dyads carry the same coefficient N^2 = 1 / (2 (1 + e^(-4 alpha^2))).
    """
    if not isinstance(alpha, (int, float)) or not 0.0 < alpha <= 4.0:
        raise ValueError(f"make_ecs: alpha must lie in (0, 4], got {alpha!r}")
    a = float(alpha)
    n2 = 1.0 / (2.0 * (1.0 + math.exp(-4.0 * a * a)))
    terms = tuple(
        DyadTerm(coeff=n2, ket_a=sk * a, bra_a=sb * a, ket_b=sk * a, bra_b=sb * a)
        for sk in (1.0, -1.0)
        for sb in (1.0, -1.0)
    )
    return GaussianDyadState(terms=terms)


def dyad_loss(state: GaussianDyadState, mode: str, eta: float) -> GaussianDyadState:
    """Pure-loss channel with transmissivity eta on one mode.

    Per term, |k><b| -> exp[-(1-eta)(|k|^2 + |b|^2 - 2 conj(b) k)/2] |sqrt(eta) k><sqrt(eta) b|;
    the scalar is 1 for diagonal dyads, so the trace is preserved.
    """
    if mode not in ("a", "b"):
        raise ValueError(f"dyad_loss: mode must be 'a' or 'b', got {mode!r}")
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"dyad_loss: eta must lie in [0, 1], got {eta}")
    root = math.sqrt(eta)
    out = []
    for t in state.terms:
        k = complex(t.ket_a if mode == "a" else t.ket_b)
        b = complex(t.bra_a if mode == "a" else t.bra_b)
        damp = cmath.exp(-0.5 * (1.0 - eta) * (abs(k) ** 2 + abs(b) ** 2 - 2.0 * b.conjugate() * k))
        if mode == "a":
            out.append(DyadTerm(t.coeff * damp, root * k, root * b, t.ket_b, t.bra_b))
        else:
            out.append(DyadTerm(t.coeff * damp, t.ket_a, t.bra_a, root * k, root * b))
    return GaussianDyadState(terms=tuple(out))


def _classify_sign(amp: complex, basis_amp: complex, tol: float = 1e-9) -> float:
    if abs(amp - basis_amp) <= tol:
        return 1.0
    if abs(amp + basis_amp) <= tol:
        return -1.0
    raise ValueError(
        f"cat_rotation: amplitude {amp!r} is not within {tol} of +/-{basis_amp!r}; "
        "rotation is undefined off the cat basis"
    )


def cat_rotation(state: GaussianDyadState, mode: str, theta: float, basis_amp: complex) -> GaussianDyadState:
    """Rotation exp[i theta X] in the cat qubit built on {|g>, |-g>}, g = basis_amp.

    X swaps the symmetric-orthogonalized (Loewdin) basis vectors, i.e. it is
    P_even - P_odd on the normalized even/odd cat combinations.  Expanding
    back over the nonorthogonal pair gives the exact closed action

        exp(i theta X) |+-g> = cos(theta) |+-g> + i sin(theta) |-+g>,

    valid for any overlap <g|-g>, so the dyad span is closed under the map and
    the trace is preserved.  basis_amp may be complex (the thermal quadrature
    feeds per-sample amplitudes through this same channel).
    """
    if mode not in ("a", "b"):
        raise ValueError(f"cat_rotation: mode must be 'a' or 'b', got {mode!r}")
    if not math.isfinite(theta):
        raise ValueError(f"cat_rotation: theta must be finite, got {theta}")
    g = complex(basis_amp)
    c, s = math.cos(theta), math.sin(theta)
    # (scalar factor, flip?) pairs for the ket side and the bra side
    ket_paths = ((complex(c), False), (1j * s, True))
    bra_paths = ((complex(c), False), (-1j * s, True))
    merged: dict[tuple, complex] = {}
    for t in state.terms:
        k = complex(t.ket_a if mode == "a" else t.ket_b)
        b = complex(t.bra_a if mode == "a" else t.bra_b)
        ks = _classify_sign(k, g)
        bs = _classify_sign(b, g)
        for kf, kflip in ket_paths:
            for bf, bflip in bra_paths:
                new_k = (-ks if kflip else ks) * g
                new_b = (-bs if bflip else bs) * g
                if mode == "a":
                    key = (new_k, new_b, t.ket_b, t.bra_b)
                else:
                    key = (t.ket_a, t.bra_a, new_k, new_b)
                merged[key] = merged.get(key, 0.0 + 0.0j) + t.coeff * kf * bf
    terms = tuple(
        DyadTerm(coeff, ket_a, bra_a, ket_b, bra_b)
        for (ket_a, bra_a, ket_b, bra_b), coeff in merged.items()
        if coeff != 0.0
    )
    return GaussianDyadState(terms=terms)


def homodyne_halfline(ket: complex, bra: complex, sign: str) -> complex:
    """Half-line quadrature integral int_{x>0 or x<0} dx <x|ket><bra|x>.

    With mu = ket + conj(bra), the Gaussian integral evaluates to

        (1/2) <bra|ket> [1 +/- erf(mu / sqrt(2))],

    so the two signs sum to <bra|ket> exactly.  The x = 0 boundary belongs to
    the "+" bin (measure zero, fixed for determinism).
    """
    if sign not in ("+", "-"):
        raise ValueError(f"homodyne_halfline: sign must be '+' or '-', got {sign!r}")
    k = complex(ket)
    b = complex(bra)
    mu = k + b.conjugate()
    e = erf_c(mu / _SQRT2)
    pm = 1.0 if sign == "+" else -1.0
    return 0.5 * coherent_overlap(b, k) * (1.0 + pm * e)


def joint_sign_probs(state: GaussianDyadState) -> tuple[float, float, float, float]:
    """Probabilities of the four joint quadrature-sign outcomes (++, +-, -+, --).

    Each entry is the dyad sum of per-mode half-line integrals.  Imaginary
    residues up to 1e-10 are truncated (larger ones indicate an algebra bug
    and raise), the four entries are checked to sum to 1, and each is clamped
    to [0, 1].
    """
    plus_a, minus_a, plus_b, minus_b = [], [], [], []
    for t in state.terms:
        pa = homodyne_halfline(t.ket_a, t.bra_a, "+")
        pb = homodyne_halfline(t.ket_b, t.bra_b, "+")
        plus_a.append(pa)
        plus_b.append(pb)
        minus_a.append(coherent_overlap(t.bra_a, t.ket_a) - pa)
        minus_b.append(coherent_overlap(t.bra_b, t.ket_b) - pb)
    raw = []
    for fa, fb in ((plus_a, plus_b), (plus_a, minus_b), (minus_a, plus_b), (minus_a, minus_b)):
        total = sum(t.coeff * va * vb for t, va, vb in zip(state.terms, fa, fb))
        if abs(total.imag) > 1e-10:
            raise ValueError(
                f"joint_sign_probs: imaginary residue {total.imag:.3e} exceeds 1e-10; "
                "state is not Hermitian"
            )
        raw.append(total.real)
    norm = sum(raw)
    if abs(norm - 1.0) > 1e-6:
        raise ValueError(f"joint_sign_probs: probabilities sum to {norm!r}, state corrupted")
    clamped = tuple(min(1.0, max(0.0, p)) for p in raw)
    return clamped  # (P_pp, P_pm, P_mp, P_mm)


def correlation_ecs(alpha: float, theta_a: float, theta_b: float, loss: LossPlacement) -> float:
    """Sign correlation E = P_pp + P_mm - P_pm - P_mp for the full pipeline.

    Order: loss eta_before on both modes, cat rotations (theta_a, theta_b) in
    the basis of the decayed amplitude sqrt(eta_before) * alpha, loss
    eta_after on both modes, then the joint sign readout.
    """
    state = make_ecs(alpha)
    state = dyad_loss(state, "a", loss.eta_before)
    state = dyad_loss(state, "b", loss.eta_before)
    basis = math.sqrt(loss.eta_before) * alpha
    state = cat_rotation(state, "a", theta_a, basis)
    state = cat_rotation(state, "b", theta_b, basis)
    state = dyad_loss(state, "a", loss.eta_after)
    state = dyad_loss(state, "b", loss.eta_after)
    p_pp, p_pm, p_mp, p_mm = joint_sign_probs(state)
    return p_pp + p_mm - p_pm - p_mp


def correlation_ecs_closed(alpha: float, theta_a: float, theta_b: float, loss: LossPlacement) -> float:
    """Closed form of correlation_ecs, for fast optimization.

    Off-diagonal dyads drop out of the sign correlation (their half-line
    difference carries erf(0) = 0), which collapses the pipeline to

        E = 2 N^2 F^2 [cos 2theta_a cos 2theta_b - L sin 2theta_a sin 2theta_b],

    with F = erf(sqrt(2 eta1 eta2) alpha) and the cross-term damping
    L = exp(-4 (1 - eta1) alpha^2).  Equal to correlation_ecs to machine
    precision (covered by the tests).
    """
    if not 0.0 < alpha <= 4.0:
        raise ValueError(f"correlation_ecs_closed: alpha must lie in (0, 4], got {alpha!r}")
    eta1, eta2 = loss.eta_before, loss.eta_after
    n2 = 1.0 / (2.0 * (1.0 + math.exp(-4.0 * alpha * alpha)))
    f = float(erf_c(math.sqrt(2.0 * eta1 * eta2) * alpha).real)
    lam = math.exp(-4.0 * (1.0 - eta1) * alpha * alpha)
    return (
        2.0
        * n2
        * f
        * f
        * (
            math.cos(2.0 * theta_a) * math.cos(2.0 * theta_b)
            - lam * math.sin(2.0 * theta_a) * math.sin(2.0 * theta_b)
        )
    )


# ---------------------------------------------------------------------------
# Truncated Fock-basis oracle
# ---------------------------------------------------------------------------


def _coherent_fock_vector(gamma: complex, n_max: int) -> np.ndarray:
    out = np.empty(n_max + 1, dtype=complex)
    out[0] = 1.0
    for k in range(1, n_max + 1):
        out[k] = out[k - 1] * gamma / math.sqrt(k)
    return out * math.exp(-0.5 * abs(gamma) ** 2)


def _poisson_tail_exceeds(alpha: float, n_max: int, bound: float = 1e-12) -> bool:
    mean = alpha * alpha
    term = math.exp(-mean)
    cumulative = term
    for k in range(1, n_max + 1):
        term *= mean / k
        cumulative += term
    return (1.0 - cumulative) >= bound


def _loss_on_axis(rho: np.ndarray, eta: float, ket_axis: int, bra_axis: int) -> np.ndarray:
    """Pure-loss channel on one Fock axis pair.

    The k-photon-loss Kraus operator is a shift by k with a rank-1 weight,
    so the channel reduces to shifted Hadamard updates; this avoids one
    dense matrix product per Kraus term.
    """
    d = rho.shape[ket_axis]
    r = np.moveaxis(rho, (ket_axis, bra_axis), (0, 1))
    out = np.zeros_like(r)
    trailing = (1,) * (r.ndim - 2)
    for k in range(d):
        m = np.arange(k, d)
        u = np.sqrt(
            np.array([math.comb(int(mm), k) for mm in m])
            * eta ** (m - k)
            * (1.0 - eta) ** k
        )
        w = np.outer(u, u).reshape(d - k, d - k, *trailing)
        out[: d - k, : d - k] += w * r[k:, k:]
    return np.moveaxis(out, (0, 1), (ket_axis, bra_axis))


def _unitary_on_axis(rho: np.ndarray, u: np.ndarray, ket_axis: int, bra_axis: int) -> np.ndarray:
    t = np.moveaxis(np.tensordot(u, rho, axes=([1], [ket_axis])), 0, ket_axis)
    return np.moveaxis(np.tensordot(u.conj(), t, axes=([1], [bra_axis])), 0, bra_axis)


def _cat_rotation_unitary(theta: float, basis_amp: complex, n_max: int) -> np.ndarray:
    """exp[i theta (P_even - P_odd)] on the truncated cat span, identity elsewhere."""
    v_plus = _coherent_fock_vector(basis_amp, n_max)
    v_minus = _coherent_fock_vector(-basis_amp, n_max)
    even = v_plus + v_minus
    odd = v_plus - v_minus
    even /= np.linalg.norm(even)
    u = np.eye(n_max + 1, dtype=complex)
    u += (cmath.exp(1j * theta) - 1.0) * np.outer(even, even.conj())
    odd_norm = np.linalg.norm(odd)
    if odd_norm > 0.0:  # degenerate at basis_amp = 0, where the span is 1-D
        odd /= odd_norm  # exactly orthogonal to even (opposite parity)
        u += (cmath.exp(-1j * theta) - 1.0) * np.outer(odd, odd.conj())
    return u


def _sign_matrix(n_max: int) -> np.ndarray:
    """Fock-basis matrix of sign(x), from composite Gauss-Legendre on x > 0.

    S = 2 B - I with B_{mn} = int_0^inf phi_m phi_n dx; the negative half-line
    follows from completeness.  Wavefunctions are evaluated by the stable
    normalized-Hermite recurrence in u = x / sqrt(2).
    """
    x_max = 2.0 * math.sqrt(2.0 * n_max + 1.0) + 12.0
    panels = int(math.ceil(x_max))
    gl_nodes, gl_weights = np.polynomial.legendre.leggauss(24)
    xs = []
    ws = []
    for p in range(panels):
        lo = x_max * p / panels
        hi = x_max * (p + 1) / panels
        half = 0.5 * (hi - lo)
        xs.append(half * gl_nodes + 0.5 * (hi + lo))
        ws.append(half * gl_weights)
    x = np.concatenate(xs)
    w = np.concatenate(ws)

    u = x / _SQRT2
    phi = np.empty((n_max + 1, x.size))
    phi[0] = math.pi ** (-0.25) * np.exp(-0.5 * u * u)
    if n_max >= 1:
        phi[1] = _SQRT2 * u * phi[0]
    for n in range(1, n_max):
        phi[n + 1] = math.sqrt(2.0 / (n + 1)) * u * phi[n] - math.sqrt(n / (n + 1.0)) * phi[n - 1]
    phi *= 2.0 ** (-0.25)  # d u / d x Jacobian folded into the normalization

    b_plus = (phi * w) @ phi.T
    return 2.0 * b_plus - np.eye(n_max + 1)


def fock_oracle_ecs(alpha: float, theta_a: float, theta_b: float, loss: LossPlacement, n_max: int = 40) -> float:
    """Same pipeline as correlation_ecs in a truncated number basis.

    Independent of the dyad algebra: coherent vectors, Kraus loss, the cat
    rotation as a dense unitary, and a sign observable integrated numerically
    on a half-line grid.  Used to validate the closed-form machinery.
    """
    if not 0.0 < alpha <= 4.0:
        raise ValueError(f"fock_oracle_ecs: alpha must lie in (0, 4], got {alpha!r}")
    if _poisson_tail_exceeds(alpha, n_max):
        raise ValueError(
            f"fock_oracle_ecs: n_max={n_max} leaves a coherent tail >= 1e-12 at alpha={alpha}"
        )
    d = n_max + 1
    n2 = 1.0 / (2.0 * (1.0 + math.exp(-4.0 * alpha * alpha)))
    v_plus = _coherent_fock_vector(alpha, n_max)
    v_minus = _coherent_fock_vector(-alpha, n_max)
    psi = np.tensordot(v_plus, v_plus, axes=0) + np.tensordot(v_minus, v_minus, axes=0)
    psi *= math.sqrt(n2)
    rho = np.einsum("ab,cd->abcd", psi, psi.conj())  # (ket_a, ket_b, bra_a, bra_b)

    eta1, eta2 = loss.eta_before, loss.eta_after
    rho = _loss_on_axis(rho, eta1, 0, 2)
    rho = _loss_on_axis(rho, eta1, 1, 3)
    basis = math.sqrt(eta1) * alpha
    rho = _unitary_on_axis(rho, _cat_rotation_unitary(theta_a, basis, n_max), 0, 2)
    rho = _unitary_on_axis(rho, _cat_rotation_unitary(theta_b, basis, n_max), 1, 3)
    rho = _loss_on_axis(rho, eta2, 0, 2)
    rho = _loss_on_axis(rho, eta2, 1, 3)

    s = _sign_matrix(n_max)
    return float(np.einsum("abcd,ca,db->", rho, s, s).real)
