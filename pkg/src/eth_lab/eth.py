"""Diagonal and off-diagonal eigenstate-thermalization diagnostics.

Covers matrix elements of the nearest/next-nearest Sz correlators and the
spin current in the energy eigenbasis, fluctuation scalings, infinite-
temperature expansions of the microcanonical profile from exact sector
traces, distribution fits, and the variance/autocorrelation spectral
functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.stats import gumbel_r, kurtosis, skew

from .basis import OBC, SectorSpec, enumerate_m_sector, sector_dimension
from .hamiltonian import (ModelParams, OperatorBlock, hamiltonian_terms,
                          observable_terms, operator_in_momentum_basis,
                          plain_m_basis)
from .spectra import (FitResult, Histogram, Spectrum, fit_power_law,
                      make_histogram)


def hilbert_schmidt_prefactor(L: int, bc: str) -> int:
    """System-size prefactor of intensive-operator spectral functions.

    L for periodic chains; L-2 for the open chain, matching the 1/(L-2)
    normalization of the open-chain average operator.
    """
    return L - 2 if bc == OBC else L


@dataclass
class MatrixElementSet:
    """Observable matrix in the energy eigenbasis of one sector."""

    label: str
    spec: SectorSpec
    energies: np.ndarray
    matrix: np.ndarray

    def __post_init__(self):
        d = np.abs(np.diag(self.matrix).imag).max() if self.matrix.size else 0.0
        if d > 1e-10:
            raise AssertionError(f"diagonal not real: max imag {d:.2e}")

    @property
    def dim(self) -> int:
        return len(self.energies)

    def diagonal(self) -> np.ndarray:
        return np.diag(self.matrix).real

    def offdiag_upper(self):
        """(mean energy, frequency, element) for all pairs m < n."""
        iu, ju = np.triu_indices(self.dim, k=1)
        e = self.energies
        return 0.5 * (e[iu] + e[ju]), e[ju] - e[iu], self.matrix[iu, ju]


def matrix_elements(block: OperatorBlock, spectrum: Spectrum) -> MatrixElementSet:
    if block.matrix.shape[0] != spectrum.dim:
        raise ValueError("observable and spectrum dimensions differ")
    if spectrum.eigenvectors is None:
        raise ValueError("spectrum carries no eigenvectors")
    v = spectrum.eigenvectors
    rotated = v.conj().T @ block.matrix @ v
    return MatrixElementSet(label=block.label, spec=block.spec,
                            energies=spectrum.eigenvalues, matrix=rotated)


# ---------------------------------------------------------------------------
# pooled spectral density


def pooled_central_window(spectra_energies: list[np.ndarray], fraction: float):
    """(lo, hi) energy bounds holding the central `fraction` of pooled levels."""
    pooled = np.sort(np.concatenate(spectra_energies))
    n = len(pooled)
    keep = max(int(round(n * fraction)), 2)
    lo = (n - keep) // 2
    return float(pooled[lo]), float(pooled[lo + keep - 1])


def pooled_omega(spectra_energies: list[np.ndarray], fraction: float = 0.5) -> float:
    """Density of states: pooled level count per unit energy, central window."""
    pooled = np.sort(np.concatenate(spectra_energies))
    n = len(pooled)
    keep = max(int(round(n * fraction)), 2)
    lo = (n - keep) // 2
    window = pooled[lo:lo + keep]
    return float(keep / (window[-1] - window[0]))


def mean_level_spacing(spectra_energies: list[np.ndarray], fraction: float = 0.1) -> float:
    """Mean level spacing omega_H in the central `fraction`, sector-averaged."""
    spacings = []
    for e in spectra_energies:
        n = len(e)
        keep = max(int(round(n * fraction)), 2)
        lo = (n - keep) // 2
        spacings.append(np.diff(e[lo:lo + keep]))
    return float(np.concatenate(spacings).mean())


# ---------------------------------------------------------------------------
# diagonal ETH


def running_average(values: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average with edge shrinkage."""
    n = len(values)
    csum = np.concatenate([[0.0], np.cumsum(values)])
    half = window // 2
    lo = np.clip(np.arange(n) - half, 0, n)
    hi = np.clip(np.arange(n) + (window - half), 0, n)
    return (csum[hi] - csum[lo]) / (hi - lo)


def diag_fluctuations(sets: list[MatrixElementSet], window: int = 50,
                      central_fraction: float = 0.5) -> dict:
    """Mean absolute deviation of O_mm from its running average.

    Pools the central fraction of every sector; returns delta_o together
    with the pooled spectral density Omega of the same window.
    """
    devs = []
    energies = []
    lo, hi = pooled_central_window([s.energies for s in sets], central_fraction)
    for s in sets:
        diag = s.diagonal()
        w = min(window, len(diag))
        avg = running_average(diag, w)
        mask = (s.energies >= lo) & (s.energies <= hi)
        devs.append(np.abs(diag - avg)[mask])
        energies.append(s.energies)
    devs = np.concatenate(devs)
    return {
        "delta_o": float(devs.mean()),
        "omega": pooled_omega(energies, central_fraction),
        "n_states": int(len(devs)),
        "window": window,
        "L": sets[0].spec.L,
    }


def diag_scaling_fits(per_l: list[dict]) -> dict:
    """Power-law fits of delta_o against L*Omega and against L."""
    ls = np.array([d["L"] for d in per_l], dtype=float)
    lomega = np.array([d["L"] * d["omega"] for d in per_l])
    delta = np.array([d["delta_o"] for d in per_l])
    return {
        "vs_lomega": fit_power_law(lomega, delta),
        "vs_l": fit_power_law(ls, delta),
    }


def diag_distribution(sets: list[MatrixElementSet],
                      central_fraction: float = 0.05,
                      bins: int | None = None):
    """Distribution of diagonal elements in the central spectrum window."""
    lo, hi = pooled_central_window([s.energies for s in sets], central_fraction)
    vals = np.concatenate([
        s.diagonal()[(s.energies >= lo) & (s.energies <= hi)] for s in sets])
    hist = make_histogram(vals, bins)
    mu, sigma = float(vals.mean()), float(vals.std())
    g = _gaussian_density(hist.centers, mu, sigma)
    fit = FitResult(model="gaussian", parameters={"mu": mu, "sigma": sigma},
                    residual=float(np.sum((g - hist.densities) ** 2)),
                    n_samples=len(vals))
    return hist, fit, float(skew(vals)), float(kurtosis(vals))


# ---------------------------------------------------------------------------
# infinite-temperature expansions from exact sector traces


def _dim(N: int, L: int) -> int:
    if L == 0:
        return 1 if N == 0 else 0
    return sector_dimension(N, L) if 0 <= N <= 2 * L else 0


def four_spin_expectations(L: int, M: int) -> dict:
    """Sector expectations of Sz strings from exact dimension counting.

    Keys: 'zz' (two distinct sites), 'zzzz' (four distinct), 'z_z2_z'
    (three distinct, one squared), 'z2_z2' (two distinct, both squared),
    'flip2' = (1/4) <(S+_i S-_j + H.c.)^2> for distinct i, j.
    """
    if L < 4:
        raise ValueError("need L >= 4 for four distinct sites")
    N = M + L
    d0 = _dim(N, L)

    def d(sub: int, dm: int) -> float:
        return _dim(N - dm - sub, L - sub) / d0

    return {
        "zz": d(2, 2) + d(2, -2) - 2 * d(2, 0),
        "zzzz": (d(4, 4) + d(4, -4) - 4 * (d(4, 2) + d(4, -2)) + 6 * d(4, 0)),
        "z_z2_z": d(3, 3) + d(3, -3) - d(3, 1) - d(3, -1),
        "z2_z2": d(2, 2) + d(2, -2) + 2 * d(2, 0),
        "flip2": 2 * (d(2, 1) + d(2, -1)) + 4 * d(2, 0),
    }


def four_spin_expectations_enumerated(L: int, M: int) -> dict:
    """Same expectations by direct summation over the sector product states."""
    if L > 8:
        raise ValueError("enumeration pathway limited to L <= 8")
    codes = enumerate_m_sector(L, M)
    m = np.stack([(codes // 3**j) % 3 - 1 for j in range(4)]).astype(float)
    m0, m1, m2, m3 = m
    # (1/4)(S+_0 S-_1 + H.c.)^2 is diagonal: S-S+ S+S- + S+S- S-S+ parts
    ladder = 0.25 * ((2 - m0 * (m0 + 1)) * (2 - m1 * (m1 - 1))
                     + (2 - m0 * (m0 - 1)) * (2 - m1 * (m1 + 1)))
    return {
        "zz": float(np.mean(m0 * m1)),
        "zzzz": float(np.mean(m0 * m1 * m2 * m3)),
        "z_z2_z": float(np.mean(m0 * m1**2 * m2)),
        "z2_z2": float(np.mean(m0**2 * m1**2)),
        "flip2": float(np.mean(ladder)),
    }


def sector_hamiltonian_traces(M: int, L: int, delta: float) -> dict:
    """Closed-form sector averages <H>, <H Z_N>, <H Z_NN>, <H^2> at lambda=0."""
    e = four_spin_expectations(L, M)
    h_zn = -(delta / L) * (L * (L - 3) * e["zzzz"] + 2 * L * e["z_z2_z"]
                           + L * e["z2_z2"])
    h_znn = -(delta / L) * (L * (L - 4) * e["zzzz"] + 4 * L * e["z_z2_z"])
    h2 = -delta * L * h_zn + L * e["flip2"]
    return {
        "h": -delta * L * e["zz"],
        "h_zn": h_zn,
        "h_znn": h_znn,
        "h2": h2,
        "zz": e["zz"],
    }


def sector_trace_moments_numeric(label: str, M: int, L: int,
                                 delta: float) -> dict:
    """Exact sector averages <O>, <H O>, <H^2 O> by sparse application."""
    if L > 10:
        raise ValueError("numeric trace pathway limited to L <= 10")
    basis = plain_m_basis(L, M)
    d = basis.dim
    params = ModelParams(delta=delta, lam=0.0)
    h = operator_in_momentum_basis(hamiltonian_terms(params, L), basis)
    o = operator_in_momentum_basis(observable_terms(label, L), basis)
    t0 = complex(o.diagonal().sum())
    ho = h @ o
    t1 = complex(ho.diagonal().sum())
    t2 = complex((h.multiply(ho.T)).sum())
    return {"o": t0.real / d, "h_o": t1.real / d, "h2_o": t2.real / d,
            "dim": d}


def microcanonical_coefficients(label: str, M: int, L: int, delta: float) -> dict:
    """Taylor coefficients of the microcanonical profile O(E) around E_inf.

    O(E) ~ O_inf + c1 * (E - E_inf)/L + c2 * ((E - E_inf)/L)^2 with closed
    forms from exact sector dimensions (lambda = 0 chain).  The spin current
    is parity-odd: all coefficients vanish.
    """
    if label not in ("zn", "znn", "jn"):
        raise ValueError(f"no expansion for observable {label!r}")
    n = M + L
    d0 = _dim(n, L)
    rho1 = _dim(n, L - 1) / d0
    rho2 = _dim(n, L - 2) / d0
    zz = M**2 / (L * (L - 1)) - (1.0 - rho1) / (L - 1)
    e_inf = -delta * L * zz
    if label == "jn":
        return {"o_inf": 0.0, "e_inf": e_inf, "linear": 0.0, "quadratic": 0.0}
    m = M / L
    denom = (delta**2 * (m**2 - 1) ** 2
             + 2.0 * (1.0 + delta**2 * (m**2 - 1)) * rho1
             + (2.0 + delta**2) * rho2)
    if label == "zn":
        linear = -delta * ((m**2 - 1) ** 2 + 2.0 * (m**2 - 1) * rho1 + rho2) / denom
        return {"o_inf": zz, "e_inf": e_inf, "linear": linear, "quadratic": None}
    linear = (delta / L) * ((2 * m**4 - 5 * m**2 + 3)
                            + (4 * m**2 - 6 + rho1) * rho1 - 2 * rho2) / denom
    quadratic = _znn_quadratic_coefficient(M, L, delta)
    return {"o_inf": zz, "e_inf": e_inf, "linear": linear,
            "quadratic": quadratic}


def _znn_quadratic_coefficient(M: int, L: int, delta: float) -> float | None:
    """Quadratic coefficient of Z_NN(E) from exact joint trace cumulants."""
    if L > 10:
        return None
    tr = sector_hamiltonian_traces(M, L, delta)
    num = sector_trace_moments_numeric("znn", M, L, delta)
    h, h2 = tr["h"], tr["h2"]
    o = num["o"]
    h_o = num["h_o"]
    h2_o = num["h2_o"]
    var_h = h2 - h**2
    cum = h2_o - h2 * o - 2.0 * h_o * h + 2.0 * h**2 * o
    return float(L**2 * 0.5 * cum / var_h**2)


# ---------------------------------------------------------------------------
# off-diagonal distributions


def _gaussian_density(x, mu, sigma):
    return np.exp(-((x - mu) ** 2) / (2 * sigma**2)) / np.sqrt(2 * np.pi * sigma**2)


def _fit_with_residual(samples: np.ndarray, hist: Histogram, model: str) -> FitResult:
    x = hist.centers
    if model == "gaussian":
        mu, sigma = float(samples.mean()), float(samples.std())
        dens = _gaussian_density(x, mu, max(sigma, 1e-300))
        params = {"mu": mu, "sigma": sigma}
    elif model == "gumbel":
        loc, scale = gumbel_r.fit(samples)
        dens = gumbel_r.pdf(x, loc=loc, scale=scale)
        params = {"mu": float(loc), "sigma": float(scale)}
    else:
        raise ValueError(model)
    rms = float(np.sqrt(np.mean((dens - hist.densities) ** 2)))
    return FitResult(model=model, parameters=params, residual=rms,
                     n_samples=len(samples))


def offdiag_distribution(sets: list[MatrixElementSet],
                         energy_fraction: float = 0.05,
                         omega_max: float | None = 0.01,
                         bins: int | None = None) -> dict:
    """Raw and log-magnitude distributions of windowed off-diagonal elements.

    Both variables get a moment-matched Gaussian fit and a maximum-likelihood
    Gumbel fit with per-bin RMS residuals.  An empty window is widened
    (doubling omega_max) and flagged.
    """
    lo, hi = pooled_central_window([s.energies for s in sets], energy_fraction)
    widened = False
    wmax = omega_max
    while True:
        vals = []
        for s in sets:
            ebar, omega, el = s.offdiag_upper()
            mask = (ebar >= lo) & (ebar <= hi)
            if wmax is not None:
                mask &= np.abs(omega) < wmax
            vals.append(el[mask])
        vals = np.concatenate(vals)
        if len(vals) >= 10:
            break
        widened = True
        wmax = 0.02 if wmax is None else 2 * wmax
    raw = vals.real if np.abs(vals.imag).max() < 1e-12 else np.abs(vals)
    o2 = np.abs(vals) ** 2
    logabs = np.abs(np.log(o2[o2 > 0]))
    out = {"widened": widened, "omega_max": wmax, "n_elements": len(vals),
           "variance": float(np.mean(np.abs(vals) ** 2)
                             - np.abs(np.mean(vals)) ** 2)}
    for key, samples in (("raw", raw), ("logabs", logabs)):
        hist = make_histogram(samples, bins)
        out[key] = {"hist": hist,
                    "gaussian": _fit_with_residual(samples, hist, "gaussian"),
                    "gumbel": _fit_with_residual(samples, hist, "gumbel")}
    return out


# ---------------------------------------------------------------------------
# spectral functions


@dataclass
class SpectralFunction:
    kind: str
    omega: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        finite = self.values[np.isfinite(self.values)]
        if finite.size and finite.min() < 0:
            raise AssertionError("spectral function values must be nonnegative")


def omega_bin_edges(omega_max: float, n_log: int = 30, n_lin: int = 40,
                    omega_min: float = 1e-3) -> np.ndarray:
    """Logarithmic bins below omega = 1, linear bins above."""
    if omega_max <= 1.0:
        return np.geomspace(omega_min, omega_max, n_log + 1)
    log_part = np.geomspace(omega_min, 1.0, n_log + 1)
    lin_part = np.linspace(1.0, omega_max, n_lin + 1)
    return np.concatenate([log_part, lin_part[1:]])


def spectral_function_var(sets: list[MatrixElementSet], bin_edges: np.ndarray,
                          extensive: bool = True) -> SpectralFunction:
    """Binned-variance spectral function |f|^2 = (L) Omega mean|O_mn|^2.

    Pools all off-diagonal pairs (whole spectrum) of a family of sectors;
    the L prefactor applies to intensive translation-averaged operators
    (extensive=True) and is dropped for strictly local ones.
    """
    counts = np.zeros(len(bin_edges) - 1)
    sums = np.zeros(len(bin_edges) - 1)
    energies = []
    for s in sets:
        _, omega, el = s.offdiag_upper()
        o2 = np.abs(el) ** 2
        idx = np.searchsorted(bin_edges, omega, side="right") - 1
        ok = (idx >= 0) & (idx < len(counts))
        np.add.at(counts, idx[ok], 1)
        np.add.at(sums, idx[ok], o2[ok])
        energies.append(s.energies)
    spec0 = sets[0].spec
    L = hilbert_schmidt_prefactor(spec0.L, spec0.bc)
    omega_dens = pooled_omega(energies, 0.5)
    pref = (L if extensive else 1.0) * omega_dens
    with np.errstate(invalid="ignore", divide="ignore"):
        vals = np.where(counts > 0, pref * sums / np.where(counts > 0, counts, 1),
                        np.nan)
    centers = 0.5 * (bin_edges[:-1] + bin_edges[1:])
    return SpectralFunction(kind="var", omega=centers, values=vals,
                            metadata={"L": spec0.L, "Omega": omega_dens,
                                      "prefactor": pref,
                                      "counts": counts.astype(int).tolist()})


def _broadened_profile(omega_pairs: np.ndarray, weights: np.ndarray,
                       sigma: float, grid: np.ndarray,
                       mirror: bool = True) -> np.ndarray:
    """sum_i w_i gauss(grid - omega_i; sigma) via fine binning + convolution.

    Bin edges depend only on (grid, sigma), never on the pair set, so the
    construction is exactly linear in the weights: decomposing a weight sum
    into parts and summing the profiles reproduces the total bit-for-bit.
    With mirror=True each pair also contributes at -omega_i (pairs supplied
    in one order only).
    """
    grid = np.asarray(grid, dtype=float)
    step = sigma / 6.0
    lo = grid.min() - 8 * sigma
    hi = grid.max() + 8 * sigma
    nbins = int(np.ceil((hi - lo) / step))
    edges = lo + step * np.arange(nbins + 1)
    hist, _ = np.histogram(omega_pairs, bins=edges, weights=weights)
    if mirror:
        hist_m, _ = np.histogram(-np.asarray(omega_pairs), bins=edges, weights=weights)
        hist = hist + hist_m
    half = int(np.ceil(6 * sigma / step))
    xk = step * np.arange(-half, half + 1)
    kernel = np.exp(-(xk**2) / (2 * sigma**2)) / np.sqrt(2 * np.pi * sigma**2)
    smooth = np.convolve(hist, kernel, mode="same")
    centers = 0.5 * (edges[:-1] + edges[1:])
    return np.interp(grid, centers, smooth)


def spectral_function_corr(sets: list[MatrixElementSet], grid: np.ndarray,
                           sigma: float | None = None,
                           extensive: bool = True):
    """Autocorrelation spectral function and its Gaussian-rescaled partner.

    corr(omega) = (L/D) sum_{m != n} |O_mn|^2 gauss(omega - omega_mn; sigma)
    with sigma defaulting to 0.1 x the central mean level spacing, and
    resc(omega) = sqrt(2) exp(omega^2 / (4 sigma_E^2)) corr(omega).
    """
    energies = [s.energies for s in sets]
    if sigma is None:
        sigma = 0.1 * mean_level_spacing(energies, 0.1)
    if sigma <= 0:
        raise ValueError("broadening sigma must be positive")
    pooled = np.concatenate(energies)
    sigma_e2 = float(np.var(pooled))
    d_total = len(pooled)
    spec0 = sets[0].spec
    L = hilbert_schmidt_prefactor(spec0.L, spec0.bc)
    pref = (L if extensive else 1.0) / d_total
    total = np.zeros_like(np.asarray(grid, dtype=float))
    for s in sets:
        _, omega, el = s.offdiag_upper()
        total += _broadened_profile(omega, np.abs(el) ** 2, sigma, np.asarray(grid, float))
    corr_vals = pref * total
    resc_vals = np.sqrt(2.0) * np.exp(np.asarray(grid, float) ** 2 / (4.0 * sigma_e2)) * corr_vals
    meta = {"L": spec0.L, "sigma": float(sigma), "sigma_E2": sigma_e2,
            "D": d_total, "prefactor": pref}
    return (SpectralFunction(kind="corr", omega=np.asarray(grid, float),
                             values=corr_vals, metadata=meta),
            SpectralFunction(kind="resc", omega=np.asarray(grid, float),
                             values=resc_vals, metadata=meta))


def sum_rule_check(mset: MatrixElementSet) -> float:
    """max_m |sum_n |O_mn|^2 - (O^2)_mm| (completeness identity)."""
    a = mset.matrix
    lhs = np.sum(np.abs(a) ** 2, axis=1)
    rhs = np.diag(a @ a).real
    return float(np.abs(lhs - rhs).max())


def rho_omega_check(spectra_energies: list[np.ndarray],
                    max_pairs: int = 4_000_000) -> float:
    """KS-style distance of the level-difference density to the Gaussian
    with twice the spectral variance."""
    from .spectra import ks_distance

    omegas = []
    for e in spectra_energies:
        diff = (e[None, :] - e[:, None])[np.triu_indices(len(e), k=1)]
        omegas.append(np.abs(diff))
    pooled = np.concatenate(omegas)
    if len(pooled) > max_pairs:
        stride = int(np.ceil(len(pooled) / max_pairs))
        pooled = np.sort(pooled)[::stride]
    sigma_e2 = float(np.var(np.concatenate(spectra_energies)))
    s = np.sqrt(2.0 * sigma_e2)
    cdf = lambda x: erf_half_gauss(x, s)
    return ks_distance(pooled, cdf)


def erf_half_gauss(x, s):
    """CDF of |X| for X ~ N(0, s^2)."""
    from scipy.special import erf
    return erf(np.asarray(x, float) / (s * np.sqrt(2.0)))
