"""Random-matrix and Haar-ensemble references.

Gaussian orthogonal/unitary ensembles, exactly-Haar orthogonal/unitary
sampling via QR with the R-diagonal phase correction, the closed-form
spacing/ratio/amplitude distributions, and Monte-Carlo verification of the
4-point Weingarten identities for U(D) and O(D).

All sampling is counter-based: sample i of an EnsembleSpec is generated from
a Philox stream keyed by (seed, i), so any draw is reproducible in isolation.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.special import erf

GOE = "GOE"
GUE = "GUE"
HAAR_O = "HaarO"
HAAR_U = "HaarU"

_KINDS = (GOE, GUE, HAAR_O, HAAR_U)


@dataclass(frozen=True)
class EnsembleSpec:
    kind: str
    dim: int
    seed: int = 0
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}")
        if self.dim < 2:
            raise ValueError("dim must be >= 2")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")


def _rng(spec: EnsembleSpec, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=spec.seed, counter=[0, 0, 0, index]))


# ---------------------------------------------------------------------------
# sampling


def sample_gaussian_ensemble(spec: EnsembleSpec, index: int = 0) -> np.ndarray:
    """One GOE/GUE draw: H = (M + M^dag)/2 with iid Gaussian M.

    GOE: diagonal variance sigma^2, off-diagonal sigma^2/2.
    GUE: diagonal variance sigma^2, E|H_ij|^2 = sigma^2 off the diagonal.
    """
    rng = _rng(spec, index)
    d, s = spec.dim, spec.sigma
    if spec.kind == GOE:
        m = rng.normal(scale=s, size=(d, d))
        return (m + m.T) / 2.0
    if spec.kind == GUE:
        m = rng.normal(scale=s, size=(d, d)) + 1j * rng.normal(scale=s, size=(d, d))
        return (m + m.conj().T) / 2.0
    raise ValueError("sample_gaussian_ensemble needs kind GOE or GUE")


def _haar_correct(q: np.ndarray, r: np.ndarray) -> np.ndarray:
    diag = np.einsum("...ii->...i", r)
    ph = diag / np.abs(diag)
    return q * ph[..., None, :]


def sample_haar(spec: EnsembleSpec, index: int = 0, batch: int | None = None) -> np.ndarray:
    """Haar-distributed orthogonal/unitary matrices (optionally a batch)."""
    rng = _rng(spec, index)
    d = spec.dim
    shape = (d, d) if batch is None else (batch, d, d)
    if spec.kind == HAAR_O:
        m = rng.normal(size=shape)
    elif spec.kind == HAAR_U:
        m = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    else:
        raise ValueError("sample_haar needs kind HaarO or HaarU")
    q, r = np.linalg.qr(m)
    return _haar_correct(q, r)


# ---------------------------------------------------------------------------
# closed-form densities


def _gumbel_density(x, mu, sigma):
    z = (np.asarray(x, float) - mu) / sigma
    return np.exp(-z - np.exp(-z)) / sigma


def analytic_distributions(name: str, x, mu: float = 0.0, sigma: float = 1.0):
    """Reference probability densities; zero outside the support."""
    x = np.asarray(x, dtype=float)
    if name == "wigner_s_goe":
        out = (np.pi / 2.0) * x * np.exp(-np.pi * x**2 / 4.0)
        return np.where(x >= 0, out, 0.0)
    if name == "wigner_s_gue":
        out = (32.0 / np.pi**2) * x**2 * np.exp(-4.0 * x**2 / np.pi)
        return np.where(x >= 0, out, 0.0)
    if name == "poisson_s":
        return np.where(x >= 0, np.exp(-x), 0.0)
    if name == "ratio_goe":
        z = 8.0 / 27.0
        out = (2.0 / z) * (x + x**2) / (1.0 + x + x**2) ** 2.5
        return np.where((x >= 0) & (x <= 1), out, 0.0)
    if name == "ratio_gue":
        z = 4.0 * np.pi / (81.0 * np.sqrt(3.0))
        out = (2.0 / z) * (x + x**2) ** 2 / (1.0 + x + x**2) ** 4
        return np.where((x >= 0) & (x <= 1), out, 0.0)
    if name == "ratio_poisson":
        return np.where((x >= 0) & (x <= 1), 2.0 / (1.0 + x) ** 2, 0.0)
    if name == "porter_thomas_O":
        with np.errstate(divide="ignore"):
            out = np.where(x > 0, np.exp(-x / 2.0) / np.sqrt(2.0 * np.pi * np.where(x > 0, x, 1.0)), 0.0)
        return out
    if name == "porter_thomas_U":
        return np.where(x >= 0, np.exp(-x), 0.0)
    if name == "gumbel":
        return _gumbel_density(x, mu, sigma)
    if name == "semicircle":
        sup = 2.0 - x**2
        return np.where(sup > 0, np.sqrt(np.where(sup > 0, sup, 0.0)) / np.pi, 0.0)
    raise ValueError(f"unknown distribution {name!r}")


def analytic_cdf(name: str, x, mu: float = 0.0, sigma: float = 1.0):
    """Cumulative distribution functions matching analytic_distributions."""
    x = np.asarray(x, dtype=float)
    if name == "wigner_s_goe":
        return np.where(x >= 0, 1.0 - np.exp(-np.pi * x**2 / 4.0), 0.0)
    if name == "wigner_s_gue":
        xp = np.where(x > 0, x, 0.0)
        return erf(2.0 * xp / np.sqrt(np.pi)) - (4.0 * xp / np.pi) * np.exp(-4.0 * xp**2 / np.pi)
    if name == "poisson_s":
        return np.where(x >= 0, 1.0 - np.exp(-x), 0.0)
    if name == "ratio_poisson":
        xc = np.clip(x, 0.0, 1.0)
        return 2.0 * xc / (1.0 + xc)
    if name == "porter_thomas_O":
        xp = np.where(x > 0, x, 0.0)
        return erf(np.sqrt(xp / 2.0))
    if name == "porter_thomas_U":
        return np.where(x >= 0, 1.0 - np.exp(-x), 0.0)
    if name == "gumbel":
        return np.exp(-np.exp(-(x - mu) / sigma))
    if name == "semicircle":
        xc = np.clip(x, -np.sqrt(2.0), np.sqrt(2.0))
        sup = np.maximum(2.0 - xc**2, 0.0)
        return (0.5 + xc * np.sqrt(sup) / (2.0 * np.pi)
                + np.arcsin(np.clip(xc / np.sqrt(2.0), -1.0, 1.0)) / np.pi)
    raise ValueError(f"no closed-form cdf for {name!r}")


def porter_thomas_finite_d(x, D: int):
    """Exact finite-D density of squared real-eigenvector amplitudes x = c^2."""
    from scipy.special import gammaln
    x = np.asarray(x, dtype=float)
    lognorm = gammaln(D / 2.0) - gammaln((D - 1) / 2.0) - gammaln(0.5)
    with np.errstate(divide="ignore"):
        out = np.exp(lognorm) * x ** (-0.5) * (1.0 - x) ** ((D - 3) / 2.0)
    return np.where((x > 0) & (x < 1), out, 0.0)


# ---------------------------------------------------------------------------
# Porter-Thomas sampling check


def porter_thomas_test(spec: EnsembleSpec, n_samples: int) -> float:
    """KS distance of pooled rescaled amplitudes X = D|c|^2 to the limit law.

    Amplitudes come from eigenvectors of GOE/GUE draws or columns of Haar
    draws, pooled over as many matrices as needed.
    """
    d = spec.dim
    xs = []
    total = 0
    index = 0
    while total < n_samples:
        if spec.kind in (GOE, GUE):
            h = sample_gaussian_ensemble(spec, index)
            _, v = np.linalg.eigh(h)
        else:
            v = sample_haar(spec, index)
        x = d * np.abs(v) ** 2
        xs.append(x.ravel())
        total += x.size
        index += 1
    pooled = np.concatenate(xs)[:n_samples]
    name = "porter_thomas_U" if spec.kind in (GUE, HAAR_U) else "porter_thomas_O"
    from .spectra import ks_distance
    return ks_distance(pooled, lambda t: analytic_cdf(name, t))


# ---------------------------------------------------------------------------
# Weingarten 4-point identities


def weingarten_unitary(coset: str, D: int) -> float:
    if coset == "[1,1]":
        return 1.0 / (D**2 - 1)
    if coset == "[2]":
        return -1.0 / (D * (D**2 - 1))
    raise ValueError(f"unknown coset type {coset!r}")


def weingarten_orthogonal(coset: str, D: int) -> float:
    if coset == "[1,1]":
        return (D + 1.0) / (D * (D - 1) * (D + 2))
    if coset == "[2]":
        return -1.0 / (D * (D - 1) * (D + 2))
    raise ValueError(f"unknown coset type {coset!r}")


def unitary_4point_analytic(idx: tuple, D: int) -> float:
    """Closed form of E[U_{jm} U_{kn} U*_{j'm'} U*_{k'n'}]."""
    j, k, jp, kp, m, n, mp, np_ = idx
    d = lambda a, b: 1.0 if a == b else 0.0
    lead = d(j, jp) * d(k, kp) * d(m, mp) * d(n, np_) + d(j, kp) * d(k, jp) * d(m, np_) * d(n, mp)
    sub = d(j, jp) * d(k, kp) * d(m, np_) * d(n, mp) + d(j, kp) * d(k, jp) * d(m, mp) * d(n, np_)
    return lead / (D**2 - 1) - sub / (D * (D**2 - 1))


def unitary_4point_enumeration(idx: tuple, D: int) -> float:
    """Same moment by explicit sum over row/column permutation pairs."""
    j, k, jp, kp, m, n, mp, np_ = idx
    rows, rows_c = (j, k), (jp, kp)
    cols, cols_c = (m, n), (mp, np_)
    perms = [(0, 1), (1, 0)]
    total = 0.0
    for sg in perms:
        if not all(rows[i] == rows_c[sg[i]] for i in range(2)):
            continue
        for tu in perms:
            if not all(cols[i] == cols_c[tu[i]] for i in range(2)):
                continue
            coset = "[1,1]" if sg == tu else "[2]"
            total += weingarten_unitary(coset, D)
    return total


def _pairings_of_four():
    return [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))]


def orthogonal_4point_enumeration(idx: tuple, D: int) -> float:
    """E[O_{jm} O_{kn} O_{j'm'} O_{k'n'}] as a sum over index pairings."""
    j, k, jp, kp, m, n, mp, np_ = idx
    rows = (j, k, jp, kp)
    cols = (m, n, mp, np_)
    total = 0.0
    for sg in _pairings_of_four():
        if not all(rows[a] == rows[b] for a, b in sg):
            continue
        for tu in _pairings_of_four():
            if not all(cols[a] == cols[b] for a, b in tu):
                continue
            coset = "[1,1]" if sg == tu else "[2]"
            total += weingarten_orthogonal(coset, D)
    return total


def orthogonal_4point_analytic(idx: tuple, D: int) -> float:
    """Closed form of the orthogonal 4-point moment (nine delta patterns)."""
    j, k, jp, kp, m, n, mp, np_ = idx
    d = lambda a, b: 1.0 if a == b else 0.0
    pref = (D + 1.0) / (D * (D - 1) * (D + 2))
    c = 1.0 / (D + 1.0)
    term1 = d(j, jp) * d(k, kp) * (
        d(m, mp) * d(n, np_) - c * (d(m, n) * d(mp, np_) + d(m, np_) * d(n, mp)))
    term2 = d(j, k) * d(jp, kp) * (
        d(m, n) * d(mp, np_) - c * (d(m, mp) * d(n, np_) + d(m, np_) * d(n, mp)))
    term3 = d(j, kp) * d(k, jp) * (
        d(m, np_) * d(n, mp) - c * (d(m, mp) * d(n, np_) + d(m, n) * d(mp, np_)))
    return pref * (term1 + term2 + term3)


def weingarten_4point_check(kind: str, D: int, n_samples: int, idx: tuple,
                            seed: int = 0, batch: int = 4096) -> dict:
    """Monte-Carlo vs analytic vs pairing-enumeration 4-point moment."""
    if kind == "U":
        spec = EnsembleSpec(kind=HAAR_U, dim=D, seed=seed)
        analytic = unitary_4point_analytic(idx, D)
        enumerated = unitary_4point_enumeration(idx, D)
    elif kind == "O":
        spec = EnsembleSpec(kind=HAAR_O, dim=D, seed=seed)
        analytic = orthogonal_4point_analytic(idx, D)
        enumerated = orthogonal_4point_enumeration(idx, D)
    else:
        raise ValueError("kind must be 'U' or 'O'")
    j, k, jp, kp, m, n, mp, np_ = idx
    total = 0.0
    total_sq = 0.0
    done = 0
    index = 0
    while done < n_samples:
        nb = min(batch, n_samples - done)
        u = sample_haar(spec, index, batch=nb)
        if kind == "U":
            vals = (u[:, j, m] * u[:, k, n]
                    * np.conj(u[:, jp, mp]) * np.conj(u[:, kp, np_])).real
        else:
            vals = u[:, j, m] * u[:, k, n] * u[:, jp, mp] * u[:, kp, np_]
        total += vals.sum()
        total_sq += (vals**2).sum()
        done += nb
        index += 1
    mean = total / n_samples
    var = max(total_sq / n_samples - mean**2, 0.0)
    se = np.sqrt(var / n_samples)
    z = (mean - analytic) / se if se > 0 else 0.0
    return {"kind": kind, "D": D, "indices": list(idx), "n_samples": n_samples,
            "empirical": float(mean), "analytic": float(analytic),
            "enumerated": float(enumerated), "stderr": float(se), "z": float(z)}


# ---------------------------------------------------------------------------
# matrix-element moments of Haar-rotated diagonal observables


def rmt_matrix_element_moments(spec: EnsembleSpec, o_diag: np.ndarray,
                               n_samples: int) -> dict:
    """Moments of V diag(o) V^dag elements over Haar draws of V.

    References: mean O_mm = obar; var O_mn ~ (o2bar - obar^2)/D with the
    orthogonal-case diagonal enhancement factor 2.
    """
    o_diag = np.asarray(o_diag, dtype=float)
    d = spec.dim
    if len(o_diag) != d:
        raise ValueError("diagonal length must equal dim")
    diag_vals = np.empty(n_samples)
    off_vals = np.empty(n_samples, dtype=complex)
    batch = max(1, 65536 // (d * d))
    done = 0
    index = 0
    while done < n_samples:
        nb = min(batch, n_samples - done)
        v = sample_haar(spec, index, batch=nb)
        rot = np.einsum("bij,j,bkj->bik", v, o_diag, v.conj())
        diag_vals[done:done + nb] = rot[:, 0, 0].real
        off_vals[done:done + nb] = rot[:, 0, 1]
        done += nb
        index += 1
    obar = o_diag.mean()
    o2bar = (o_diag**2).mean()
    var_ref = (o2bar - obar**2) / d
    factor = 2.0 if spec.kind == HAAR_O else 1.0
    return {
        "mean_diag": float(diag_vals.mean()),
        "var_diag": float(diag_vals.var()),
        "mean_offdiag": complex(off_vals.mean()),
        "var_offdiag": float(np.mean(np.abs(off_vals)**2) - np.abs(np.mean(off_vals))**2),
        "ref_mean": float(obar),
        "ref_var_offdiag": float(var_ref),
        "ref_var_diag": float(factor * var_ref),
        "n_samples": n_samples,
    }
