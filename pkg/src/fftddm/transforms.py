"""FFT-realized eigenbasis transforms for the one-axis stencil matrices.

For each axis BC pair ('DD', 'NN', 'PP') the axis matrix A has a known
orthonormal eigenvector matrix Q (sine, shifted-cosine and real Fourier
bases respectively).  Applying Q and Q^T through complex FFTs costs
O(n log n) and diagonalizes the axis operator:  Q^T A Q = diag(lambda).

Sign and ordering conventions match `oracle.assemble_eigvector_matrix`
column for column; the eigenvalue array from `eigenvalues` is ordered the
same way.

Note on the Neumann eigenvalues: the cosine denominator is n (not n - 1);
the dense eigendecomposition of the Neumann axis matrix pins this down at
n = 2 and 3, and the diagonalization property tests enforce it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BC_PAIRS = ("DD", "NN", "PP")


def eigenvalues(bc: str, n: int, delta_t: float, delta_o: float,
                kappa: float = 0.0) -> np.ndarray:
    """Eigenvalue array of the axis matrix, ordered to match apply_Q."""
    j = np.arange(1, n + 1, dtype=float)
    if bc == "DD":
        lam = -2.0 * (delta_t + delta_o) + 2.0 * delta_t * np.cos(j * np.pi / (n + 1))
    elif bc == "NN":
        lam = -2.0 * (delta_t + delta_o) + 2.0 * delta_t * np.cos((j - 1) * np.pi / n)
    elif bc == "PP":
        lam = -2.0 * (delta_t + delta_o) + 2.0 * delta_t * np.cos(2.0 * np.pi * (j - 1) / n)
    else:
        raise ValueError(f"unknown BC pair {bc!r}")
    return lam + kappa


@dataclass(frozen=True)
class SpectralPlan:
    """Prepared eigenbasis transform for one axis of one rectangle.

    Immutable; apply_Q / apply_Qt allocate their own scratch, so one plan
    may be shared across threads.
    """

    bc: str
    n: int
    delta_t: float
    delta_o: float
    kappa: float
    eigenvalues: np.ndarray


def make_plan(bc: str, n: int, delta_t: float, delta_o: float,
              kappa: float = 0.0) -> SpectralPlan:
    if n < 1:
        raise ValueError("transform length must be >= 1")
    if bc not in BC_PAIRS:
        raise ValueError(f"unknown BC pair {bc!r}")
    if bc == "PP" and n % 2:
        raise ValueError("periodic transforms need an even length")
    lam = eigenvalues(bc, n, delta_t, delta_o, kappa)
    lam.setflags(write=False)
    return SpectralPlan(bc=bc, n=n, delta_t=delta_t, delta_o=delta_o,
                        kappa=kappa, eigenvalues=lam)


# ---------------------------------------------------------------------------
# kernels; all operate along the last axis of a (..., n) array

def _dst1(v: np.ndarray) -> np.ndarray:
    """sum_k v_k sin(j k pi / (n+1)) via one length-2(n+1) complex FFT."""
    n = v.shape[-1]
    w = np.zeros(v.shape[:-1] + (2 * (n + 1),))
    w[..., 1:n + 1] = v
    w[..., n + 2:] = -v[..., ::-1]
    return -0.5 * np.fft.fft(w, axis=-1).imag[..., 1:n + 1]


def _dct2(v: np.ndarray) -> np.ndarray:
    """sum_k v_k cos(pi j (2k+1) / (2n)), j = 0..n-1, via a length-2n FFT."""
    n = v.shape[-1]
    w = np.concatenate([v, v[..., ::-1]], axis=-1)
    spec = np.fft.fft(w, axis=-1)[..., :n]
    phase = np.exp(-0.5j * np.pi * np.arange(n) / n)
    return 0.5 * (phase * spec).real


def _dct3(a: np.ndarray) -> np.ndarray:
    """sum_j a_j cos(pi j (2k+1) / (2n)), k = 0..n-1, via a length-2n FFT."""
    n = a.shape[-1]
    z = np.zeros(a.shape[:-1] + (2 * n,), dtype=complex)
    z[..., :n] = a * np.exp(0.5j * np.pi * np.arange(n) / n)
    return 2 * n * np.fft.ifft(z, axis=-1).real[..., :n]


def _nn_scale(n: int) -> np.ndarray:
    scale = np.full(n, np.sqrt(2.0 / n))
    scale[0] = np.sqrt(1.0 / n)
    return scale


def apply_Q(plan: SpectralPlan, v: np.ndarray) -> np.ndarray:
    """Q @ v along the last axis (spectral coefficients -> nodal values)."""
    v = np.asarray(v, dtype=float)
    n = plan.n
    if v.shape[-1] != n:
        raise ValueError(f"length mismatch: expected {n}, got {v.shape[-1]}")
    if plan.bc == "DD":
        return np.sqrt(2.0 / (n + 1)) * _dst1(v)
    if plan.bc == "NN":
        return _dct3(_nn_scale(n) * v)
    # PP: pack cosine amplitudes into the real part and sine amplitudes into
    # the imaginary part of a half spectrum, then one inverse FFT
    spec = np.zeros(v.shape[:-1] + (n,), dtype=complex)
    root = np.sqrt(1.0 / n)
    spec[..., 0] = v[..., 0] * root
    spec[..., n // 2] = v[..., n // 2] * root
    if n > 2:
        amp = np.sqrt(2.0 / n)
        spec[..., 1:n // 2] = amp * v[..., 1:n // 2]
        spec[..., n // 2 + 1:] = -1j * amp * v[..., n // 2 + 1:]
    return n * np.fft.ifft(spec, axis=-1).real


def apply_Qt(plan: SpectralPlan, v: np.ndarray) -> np.ndarray:
    """Q^T @ v along the last axis (nodal values -> spectral coefficients)."""
    v = np.asarray(v, dtype=float)
    n = plan.n
    if v.shape[-1] != n:
        raise ValueError(f"length mismatch: expected {n}, got {v.shape[-1]}")
    if plan.bc == "DD":
        return np.sqrt(2.0 / (n + 1)) * _dst1(v)     # Q is symmetric
    if plan.bc == "NN":
        return _nn_scale(n) * _dct2(v)
    spec = np.fft.fft(v, axis=-1)
    out = np.empty_like(v)
    root = np.sqrt(1.0 / n)
    out[..., 0] = spec[..., 0].real * root
    out[..., n // 2] = spec[..., n // 2].real * root
    if n > 2:
        amp = np.sqrt(2.0 / n)
        out[..., 1:n // 2] = amp * spec[..., 1:n // 2].real
        out[..., n // 2 + 1:] = -amp * spec[..., n // 2 + 1:].imag
    return out
