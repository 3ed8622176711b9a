"""Unitary quench dynamics in the energy eigenbasis.

An initial state is decomposed into eigenstate overlaps c_m; expectation
values evolve as O(t) = sum_mn c_m* c_n exp(i (E_m - E_n) t) O_mn, compared
against the diagonal ensemble sum |c_m|^2 O_mm and microcanonical windows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import SymBasis
from .entanglement import project_from_product_basis
from .eth import MatrixElementSet
from .spectra import Spectrum

NORM_TOL = 1e-10


@dataclass
class QuenchSetup:
    overlaps: np.ndarray
    spectrum: Spectrum

    def __post_init__(self):
        norm = float(np.sum(np.abs(self.overlaps) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise AssertionError(f"overlap norm {norm} != 1")
        if len(self.overlaps) != self.spectrum.dim:
            raise ValueError("overlap vector does not match spectrum dimension")

    @property
    def e_bar(self) -> float:
        return float(np.sum(np.abs(self.overlaps) ** 2 * self.spectrum.eigenvalues))

    @property
    def delta_e0(self) -> float:
        p = np.abs(self.overlaps) ** 2
        e = self.spectrum.eigenvalues
        return float(np.sqrt(max(np.sum(p * e**2) - np.sum(p * e) ** 2, 0.0)))


def neel_code(L: int) -> int:
    """Alternating +1/-1 product state: trits 2,0,2,0,... from site 0."""
    return sum(2 * 3**j for j in range(0, L, 2))


def zeros_code(L: int) -> int:
    """All-sites-Sz=0 product state (every trit 1)."""
    return (3**L - 1) // 2


def product_state_setup(code: int, spectrum: Spectrum, basis: SymBasis) -> QuenchSetup:
    """Overlaps of a product state lying inside the sector of `basis`."""
    codes = basis.sector_states
    pos = np.searchsorted(codes, code)
    if pos >= len(codes) or codes[pos] != code:
        raise ValueError(f"product state {code} is outside sector {basis.spec}")
    amps = np.zeros(len(codes), dtype=complex)
    amps[pos] = 1.0
    coords = project_from_product_basis(amps, basis)
    norm = np.linalg.norm(coords)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(
            f"product state {code} has weight {norm**2:.6f} in sector {basis.spec}; "
            "use a basis without momentum resolution")
    c = spectrum.eigenvectors.conj().T @ coords
    return QuenchSetup(overlaps=c, spectrum=spectrum)


def eigenstate_setup(source: Spectrum, column: int, target: Spectrum) -> QuenchSetup:
    """Quench from an eigenstate of another Hamiltonian in the same basis."""
    if source.dim != target.dim:
        raise ValueError("source and target spectra live in different bases")
    c = target.eigenvectors.conj().T @ source.eigenvectors[:, column]
    return QuenchSetup(overlaps=c, spectrum=target)


def evolve_expectation(setup: QuenchSetup, mset: MatrixElementSet,
                       times: np.ndarray) -> np.ndarray:
    """O(t) on a time grid; exact in the eigenbasis (no integrator error)."""
    if mset.dim != setup.spectrum.dim:
        raise ValueError("observable does not match the quench spectrum")
    e = setup.spectrum.eigenvalues
    c = setup.overlaps
    a = mset.matrix
    out = np.empty(len(times))
    for i, t in enumerate(np.asarray(times, dtype=float)):
        w = c * np.exp(-1j * e * t)
        val = np.vdot(w, a @ w)
        if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
            raise AssertionError(f"non-real expectation value {val} at t={t}")
        out[i] = val.real
    return out


def diagonal_ensemble(setup: QuenchSetup, mset: MatrixElementSet) -> float:
    return float(np.sum(np.abs(setup.overlaps) ** 2 * mset.diagonal()))


def microcanonical_average(spectrum: Spectrum, diag: np.ndarray, e_bar: float,
                           window: float | None = None,
                           min_states: int = 20) -> dict:
    """Mean of O_mm over |E_m - e_bar| < window/2 (default 0.4 sigma_E)."""
    e = spectrum.eigenvalues
    if window is None:
        window = 0.4 * float(np.std(e))
    widened = False
    w = window
    while True:
        mask = np.abs(e - e_bar) < w / 2.0
        if mask.sum() >= min_states or w > (e[-1] - e[0]) * 2:
            break
        w *= 2.0
        widened = True
    return {"value": float(diag[mask].mean()) if mask.any() else float("nan"),
            "n_states": int(mask.sum()), "window": float(w),
            "widened": widened}


def temporal_fluctuations(setup: QuenchSetup, mset: MatrixElementSet,
                          t_max: float, n_samples: int = 200) -> dict:
    """Empirical long-time variance of O(t) vs the analytic expression.

    analytic = sum_{m != n} |c_m|^2 |c_n|^2 |O_mn|^2 <= max_{m!=n} |O_mn|^2.
    """
    times = np.linspace(0.0, t_max, n_samples, endpoint=False)
    series = evolve_expectation(setup, mset, times)
    de = diagonal_ensemble(setup, mset)
    p = np.abs(setup.overlaps) ** 2
    a = mset.matrix.copy()
    np.fill_diagonal(a, 0.0)
    analytic = float(p @ (np.abs(a) ** 2) @ p)
    bound = float(np.abs(a).max() ** 2)
    degeneracies = int(np.sum(np.abs(np.diff(setup.spectrum.eigenvalues)) < 1e-12))
    return {
        "empirical_variance": float(np.mean((series - np.mean(series)) ** 2)),
        "variance_about_de": float(np.mean((series - de) ** 2)),
        "analytic_variance": analytic,
        "bound": bound,
        "diagonal_ensemble": de,
        "time_average": float(np.mean(series)),
        "degeneracies": degeneracies,
        "t_max": t_max,
        "n_samples": n_samples,
    }
