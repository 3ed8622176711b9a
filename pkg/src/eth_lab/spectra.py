"""Dense diagonalization plus density-of-states and level-statistics tools.

Level statistics use the central 50% of each sector's spectrum with a global
unfolding (mean retained spacing rescaled to one); ratio statistics
r_m = min(s_m, s_{m-1}) / max(s_m, s_{m-1}) need no unfolding and use whole
sector spectra.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .basis import SectorSpec
from .hamiltonian import OperatorBlock

RESIDUAL_TOL = 1e-9
ORTHO_TOL = 1e-10


@dataclass
class Spectrum:
    spec: SectorSpec
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None
    params_hash: str = ""

    def __post_init__(self):
        if np.any(np.diff(self.eigenvalues) < 0):
            raise AssertionError("eigenvalues must be nondecreasing")

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)


@dataclass
class Histogram:
    bin_edges: np.ndarray
    densities: np.ndarray
    count: int

    def __post_init__(self):
        if np.any(self.densities < 0):
            raise AssertionError("histogram densities must be nonnegative")
        area = float(np.sum(self.densities * np.diff(self.bin_edges)))
        if self.count > 0 and abs(area - 1.0) > 1e-12:
            raise AssertionError(f"histogram area {area} != 1")

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


@dataclass
class FitResult:
    model: str
    parameters: dict
    residual: float
    n_samples: int

    def __post_init__(self):
        for key, val in self.parameters.items():
            if not np.isfinite(val):
                raise AssertionError(f"non-finite fit parameter {key}={val}")
        if self.residual < 0:
            raise AssertionError("negative fit residual")


def freedman_diaconis_bins(samples: np.ndarray, floor: int = 20,
                           cap: int = 4096) -> int:
    """Freedman-Diaconis bin count with a deterministic floor.

    Heavy-tailed samples have a tiny interquartile range relative to their
    full span; the cap keeps the bin count physical in that case.
    """
    samples = np.asarray(samples, dtype=float)
    n = len(samples)
    if n < 2:
        return floor
    q75, q25 = np.percentile(samples, [75, 25])
    iqr = q75 - q25
    span = samples.max() - samples.min()
    if iqr <= 0 or span <= 0:
        return floor
    width = 2.0 * iqr / n ** (1.0 / 3.0)
    return min(cap, max(floor, int(np.ceil(span / width))))


def make_histogram(samples: np.ndarray, bins: int | np.ndarray | None = None) -> Histogram:
    samples = np.asarray(samples, dtype=float)
    if bins is None:
        bins = freedman_diaconis_bins(samples)
    dens, edges = np.histogram(samples, bins=bins, density=True)
    if np.count_nonzero(dens) < 2:
        raise ValueError("degenerate sample set: fewer than two populated bins")
    return Histogram(bin_edges=edges, densities=dens, count=len(samples))


def gauge_fix(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-modulus component of each column real positive."""
    idx = np.argmax(np.abs(vectors), axis=0)
    lead = vectors[idx, np.arange(vectors.shape[1])]
    phases = lead / np.abs(lead)
    return vectors * np.conj(phases)[None, :]


def diagonalize(block: OperatorBlock, vectors: bool = True, check: bool = True,
                params_hash: str = "") -> Spectrum:
    """Full dense Hermitian eigendecomposition of one sector block."""
    mat = block.matrix
    if mat.shape[0] == 0:
        return Spectrum(spec=block.spec, eigenvalues=np.zeros(0),
                        eigenvectors=np.zeros((0, 0)) if vectors else None,
                        params_hash=params_hash)
    try:
        if vectors:
            w, v = scipy.linalg.eigh(mat, driver="evr")
        else:
            w = scipy.linalg.eigh(mat, driver="evr", eigvals_only=True)
            v = None
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover
        raise RuntimeError(f"eigensolver failed on sector {block.spec}") from exc
    if v is not None:
        v = gauge_fix(v)
        if check:
            scale = max(np.abs(w).max(), 1e-30)
            resid = np.abs(mat @ v - v * w[None, :]).max() / scale
            if resid > RESIDUAL_TOL:
                raise AssertionError(
                    f"eigendecomposition residual {resid:.2e} in sector {block.spec}")
            g = v.conj().T @ v
            dev = np.abs(g - np.eye(len(w))).max()
            if dev > ORTHO_TOL * max(1.0, len(w) ** 0.5):
                raise AssertionError(f"eigenvector orthonormality off by {dev:.2e}")
    return Spectrum(spec=block.spec, eigenvalues=w, eigenvectors=v,
                    params_hash=params_hash)


# ---------------------------------------------------------------------------
# density of states


def fit_gaussian_density(hist: Histogram) -> FitResult:
    """Least-squares Gaussian fit to a normalized histogram."""
    from scipy.optimize import curve_fit

    x = hist.centers
    y = hist.densities

    def gauss(x, mu, sigma):
        return np.exp(-((x - mu) ** 2) / (2.0 * sigma**2)) / np.sqrt(2.0 * np.pi * sigma**2)

    mu0 = float(np.sum(x * y) / np.sum(y))
    s0 = float(np.sqrt(np.sum((x - mu0) ** 2 * y) / np.sum(y)))
    popt, _ = curve_fit(gauss, x, y, p0=[mu0, max(s0, 1e-6)], maxfev=20000)
    ssr = float(np.sum((gauss(x, *popt) - y) ** 2))
    return FitResult(model="gaussian", parameters={"mu": popt[0], "sigma": abs(popt[1])},
                     residual=ssr, n_samples=hist.count)


def dos(spectra: list[Spectrum], bins: int | None = None):
    """Pooled density of states in energy density E/L.

    Returns (Histogram, gaussian FitResult, std dev of pooled E_m/L).
    """
    if not spectra:
        raise ValueError("dos needs at least one spectrum")
    sizes = {s.spec.L for s in spectra}
    if len(sizes) != 1:
        raise ValueError("dos pools sectors of a single system size")
    L = sizes.pop()
    e_density = np.concatenate([s.eigenvalues for s in spectra]) / L
    hist = make_histogram(e_density, bins)
    fit = fit_gaussian_density(hist)
    return hist, fit, float(np.std(e_density))


def fit_power_law(x: np.ndarray, y: np.ndarray) -> FitResult:
    """Fit y = A x^(-gamma) by linear regression in log-log coordinates."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    slope, intercept = np.polyfit(lx, ly, 1)
    ssr = float(np.sum((slope * lx + intercept - ly) ** 2))
    return FitResult(model="powerlaw",
                     parameters={"exponent": -slope, "prefactor": float(np.exp(intercept))},
                     residual=ssr, n_samples=len(x))


# ---------------------------------------------------------------------------
# level statistics


def central_slice(n: int, fraction: float) -> slice:
    keep = int(round(n * fraction))
    lo = (n - keep) // 2
    return slice(lo, lo + keep)


def level_spacing_stats(spectra: list[Spectrum], central_fraction: float = 0.5,
                        bins: int | None = None, min_spacings: int = 50):
    """Pooled unfolded-spacing histogram over the central spectrum windows.

    Each sector is unfolded globally (mean retained spacing set to one) before
    pooling.  Returns (Histogram, mean of pooled unfolded spacings).
    """
    pooled = []
    for sp in spectra:
        window = sp.eigenvalues[central_slice(sp.dim, central_fraction)]
        if len(window) < min_spacings + 1:
            raise ValueError(
                f"sector {sp.spec} retains {len(window)} states; need > {min_spacings}")
        s = np.diff(window)
        pooled.append(s / s.mean())
    pooled = np.concatenate(pooled)
    hist = make_histogram(pooled, bins)
    return hist, float(pooled.mean())


def spacing_ratios(energies: np.ndarray) -> np.ndarray:
    s = np.diff(np.asarray(energies, float))
    a, b = s[1:], s[:-1]
    hi = np.maximum(a, b)
    lo = np.minimum(a, b)
    out = np.zeros_like(hi)
    nz = hi > 0
    out[nz] = lo[nz] / hi[nz]
    return out


def ratio_stats(spectra: list[Spectrum], bins: int | None = None):
    """Pooled level-spacing-ratio histogram and mean over whole sector spectra."""
    pooled = np.concatenate([spacing_ratios(sp.eigenvalues) for sp in spectra])
    hist = make_histogram(pooled, bins)
    return hist, float(pooled.mean())


# ---------------------------------------------------------------------------
# distribution distance


def ks_distance(samples: np.ndarray, cdf) -> float:
    """Kolmogorov-Smirnov distance of samples to a reference CDF callable."""
    x = np.sort(np.asarray(samples, float))
    n = len(x)
    f = cdf(x)
    up = np.abs(np.arange(1, n + 1) / n - f).max()
    dn = np.abs(f - np.arange(0, n) / n).max()
    return float(max(up, dn))
