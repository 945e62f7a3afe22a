"""Regularisation-filter design, benchmark IIR systems and their simulation.

Frequencies are normalised to the sampling frequency (Nyquist = 0.5).
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import signal

from .errors import DesignError, ParameterError, SingularityError

__all__ = [
    "BandKind",
    "BandSpec",
    "FirDesign",
    "SystemSpec",
    "design_fir_windowed",
    "build_regularisation_filter_matrix",
    "design_cheby1",
    "impulse_response",
    "filter_signal",
    "frequency_response",
]


class BandKind(str, Enum):
    LOWPASS = "lowpass"
    HIGHPASS = "highpass"
    BANDPASS = "bandpass"
    BANDSTOP = "bandstop"
    MULTIBANDSTOP = "multibandstop"


@dataclass(frozen=True)
class BandSpec:
    """Band type plus its strictly increasing edge frequencies."""

    kind: BandKind
    edges: tuple

    def __post_init__(self):
        object.__setattr__(self, "kind", BandKind(self.kind))
        edges = tuple(float(e) for e in np.atleast_1d(self.edges))
        object.__setattr__(self, "edges", edges)
        kind = self.kind
        if kind in (BandKind.LOWPASS, BandKind.HIGHPASS):
            ok = len(edges) == 1
        elif kind in (BandKind.BANDPASS, BandKind.BANDSTOP):
            ok = len(edges) == 2
        else:
            ok = len(edges) >= 2 and len(edges) % 2 == 0
        if not ok:
            raise ParameterError(f"{len(edges)} edge(s) do not fit band kind {kind.value}")
        if any(not 0 <= e <= 0.5 for e in edges):
            raise ParameterError(f"edges must lie in [0, 0.5], got {edges}")
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise ParameterError(f"edges must be strictly increasing, got {edges}")

    @property
    def passes_dc(self):
        return self.kind in (BandKind.LOWPASS, BandKind.BANDSTOP, BandKind.MULTIBANDSTOP)

    @property
    def passes_nyquist(self):
        # a pass band touches Nyquist iff the number of transitions and DC
        # behaviour disagree in parity
        return self.passes_dc == (len(self.edges) % 2 == 0)


@dataclass(frozen=True)
class FirDesign:
    coefficients: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.coefficients, dtype=float).ravel()
        if b.size < 1 or not np.all(np.isfinite(b)):
            raise ParameterError("FIR coefficients must be finite and non-empty")
        object.__setattr__(self, "coefficients", b)

    @property
    def order(self):
        return self.coefficients.size - 1


def design_fir_windowed(p, band):
    """Hamming-windowed linear-phase FIR design of order ``p``.

    The response is normalised to unit gain at DC when the first band passes
    DC, at Nyquist for a high-pass, and at the centre of the pass band for a
    band-pass.
    """
    if p < 1:
        raise ParameterError(f"filter order must be >= 1, got {p}")
    if any(e <= 0 or e >= 0.5 for e in band.edges):
        raise ParameterError(f"edges must lie strictly inside (0, 0.5), got {band.edges}")
    if band.passes_nyquist and p % 2:
        raise ParameterError(f"{band.kind.value} design passes Nyquist and needs an even order, got {p}")

    # pass bands as [lo, hi] pairs
    bounds = list(band.edges)
    if band.passes_dc:
        bounds = [0.0] + bounds
    if len(bounds) % 2:
        bounds = bounds + [0.5]
    bands = list(zip(bounds[::2], bounds[1::2]))

    m = np.arange(p + 1) - p / 2
    h = np.zeros(p + 1)
    for lo, hi in bands:
        h += 2 * hi * np.sinc(2 * hi * m) - 2 * lo * np.sinc(2 * lo * m)
    h *= 0.54 - 0.46 * np.cos(2 * np.pi * np.arange(p + 1) / p)

    lo, hi = bands[0]
    if lo == 0.0:
        f0 = 0.0
    elif hi == 0.5:
        f0 = 0.5
    else:
        f0 = (lo + hi) / 2
    gain = np.abs(np.exp(-2j * np.pi * f0 * np.arange(p + 1)) @ h)
    return FirDesign(h / gain)


def build_regularisation_filter_matrix(fir, n, alpha):
    """Banded ``n x n`` filter matrix whose ``i``-th row (1-based) holds
    ``alpha**(-i/2) * [b_0, ..., b_p]`` starting at column ``i``."""
    b = fir.coefficients
    p = fir.order
    if p >= n:
        raise ParameterError(f"filter order p={p} must be smaller than n={n}")
    if not 0 <= alpha <= 1:
        raise ParameterError(f"alpha must lie in [0, 1], got {alpha}")
    if alpha == 0:
        raise SingularityError("alpha = 0 makes the decay scaling infinite")
    F = np.zeros((n, n))
    for k, bk in enumerate(b):
        F += bk * np.eye(n, k=k)
    return alpha ** (-np.arange(1, n + 1) / 2)[:, None] * F


@dataclass
class SystemSpec:
    """Discrete transfer function ``B(z)/A(z)`` or a gain-weighted sum of such.

    For summed systems ``components`` holds ``(gain, SystemSpec)`` pairs and
    ``b``/``a`` hold the equivalent combined transfer function.
    """

    name: str
    b: np.ndarray
    a: np.ndarray = field(default_factory=lambda: np.array([1.0]))
    components: tuple = ()

    def __post_init__(self):
        self.b = np.atleast_1d(np.asarray(self.b, dtype=float))
        self.a = np.atleast_1d(np.asarray(self.a, dtype=float))
        self.components = tuple((float(g), s) for g, s in self.components)
        if self.a[0] != 1.0:
            raise ParameterError(f"a[0] must be 1, got {self.a[0]}")

    @classmethod
    def sum(cls, name, components):
        """Combine ``(gain, SystemSpec)`` pairs into one summed system."""
        a = np.array([1.0])
        for _, s in components:
            a = np.polymul(a, s.a)
        b = np.zeros(1)
        for idx, (g, s) in enumerate(components):
            rest = np.array([1.0])
            for jdx, (_, o) in enumerate(components):
                if jdx != idx:
                    rest = np.polymul(rest, o.a)
            b = _polyadd_z(b, g * np.polymul(s.b, rest))
        return cls(name, b, a, tuple(components))

    @property
    def poles(self):
        return np.roots(self.a) if self.a.size > 1 else np.array([])

    def is_stable(self):
        parts = [s for _, s in self.components] or [self]
        return all(np.all(np.abs(s.poles) < 1.0) for s in parts)


def _polyadd_z(p, q):
    # coefficients in ascending powers of z^-1, so pad at the end
    out = np.zeros(max(p.size, q.size))
    out[: p.size] += p
    out[: q.size] += q
    return out


# -- Chebyshev type I via analogue prototype + bilinear transform -----------


def _cheb1_prototype(order, ripple_db):
    eps = np.sqrt(10 ** (0.1 * ripple_db) - 1)
    mu = np.arcsinh(1 / eps) / order
    theta = np.pi * (2 * np.arange(1, order + 1) - 1) / (2 * order)
    poles = -np.sinh(mu) * np.sin(theta) + 1j * np.cosh(mu) * np.cos(theta)
    k = np.real(np.prod(-poles))
    if order % 2 == 0:
        k /= np.sqrt(1 + eps**2)
    return np.array([], dtype=complex), poles, k


def _bilinear_zpk(z, p, k):
    # fs = 1, so 2*fs = 2
    degree = p.size - z.size
    zd = (2 + z) / (2 - z)
    pd = (2 + p) / (2 - p)
    zd = np.concatenate([zd, -np.ones(degree)])
    kd = k * np.real(np.prod(2 - z) / np.prod(2 - p))
    return zd, pd, kd


def design_cheby1(order, ripple_db, band):
    """Chebyshev type I IIR system of total order ``order``.

    Band-pass and band-stop designs double the prototype order, so for
    those kinds ``order`` must be even (an order-4 band-pass comes from an
    order-2 prototype).
    """
    kind = band.kind
    if order < 1:
        raise ParameterError(f"order must be >= 1, got {order}")
    if ripple_db <= 0:
        raise ParameterError(f"ripple must be positive, got {ripple_db}")
    if kind is BandKind.MULTIBANDSTOP:
        raise ParameterError("multiband Chebyshev designs are not supported")
    if any(e <= 0 or e >= 0.5 for e in band.edges):
        raise ParameterError(f"edges must lie strictly inside (0, 0.5), got {band.edges}")
    two_sided = kind in (BandKind.BANDPASS, BandKind.BANDSTOP)
    if two_sided and order % 2:
        raise ParameterError(f"{kind.value} order must be even, got {order}")

    z, p, k = _cheb1_prototype(order // 2 if two_sided else order, ripple_db)
    warped = 2 * np.tan(np.pi * np.asarray(band.edges))
    degree = p.size
    if kind is BandKind.LOWPASS:
        wc = warped[0]
        p = wc * p
        k = k * wc**degree
    elif kind is BandKind.HIGHPASS:
        wc = warped[0]
        k = k * np.real(1 / np.prod(-p))
        p = wc / p
        z = np.zeros(degree, dtype=complex)
    else:
        w0 = np.sqrt(warped[0] * warped[1])
        bw = warped[1] - warped[0]
        if kind is BandKind.BANDPASS:
            half = p * bw / 2
            root = np.sqrt(half**2 - w0**2 + 0j)
            p = np.concatenate([half + root, half - root])
            z = np.zeros(degree, dtype=complex)
            k = k * bw**degree
        else:
            k = k * np.real(1 / np.prod(-p))
            half = (bw / 2) / p
            root = np.sqrt(half**2 - w0**2 + 0j)
            p = np.concatenate([half + root, half - root])
            z = np.concatenate([1j * w0 * np.ones(degree), -1j * w0 * np.ones(degree)])

    zd, pd, kd = _bilinear_zpk(z, p, k)
    b = kd * np.real(np.poly(zd))
    a = np.real(np.poly(pd))
    name = f"cheby1_{kind.value}_{order}"
    sys = SystemSpec(name, b, a)
    if not sys.is_stable():
        raise DesignError(f"design {name} with edges {band.edges} is unstable")
    return sys


# -- simulation ---------------------------------------------------------------


def filter_signal(sys, u):
    """Zero-initial-condition output of ``sys`` driven by ``u``."""
    u = np.asarray(u, dtype=float)
    if sys.components:
        return sum(g * filter_signal(s, u) for g, s in sys.components)
    return signal.lfilter(sys.b, sys.a, u)


def impulse_response(sys, length):
    """First ``length`` impulse-response coefficients of ``sys``."""
    delta = np.zeros(length)
    if length:
        delta[0] = 1.0
    return filter_signal(sys, delta)


def _complex_response(sys, freqs):
    if sys.components:
        return sum(g * _complex_response(s, freqs) for g, s in sys.components)
    zinv = np.exp(-2j * np.pi * freqs)
    # polyval wants descending powers; coefficients here are in powers of z^-1
    return np.polyval(sys.b[::-1], zinv) / np.polyval(sys.a[::-1], zinv)


def frequency_response(sys, freqs):
    """Magnitude response in dB at the given normalised frequencies."""
    freqs = np.asarray(freqs, dtype=float)
    if np.any(freqs < 0) or np.any(freqs > 0.5):
        raise ParameterError("frequencies must lie in [0, 0.5]")
    with np.errstate(divide="ignore"):
        return 20 * np.log10(np.abs(_complex_response(sys, freqs)))
