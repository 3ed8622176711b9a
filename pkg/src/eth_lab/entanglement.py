"""Bipartite entanglement entropies and random-state reference curves.

Eigenstates are expanded from symmetry-adapted coordinates back to the
magnetization product basis, reduced over a contiguous block of the first
L_A sites, and eigendecomposed blockwise in the subsystem magnetization.
Reference curves: the exact fixed-magnetization random-state average (a
digamma sum over subsystem sectors) and its large-L asymptotic form.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import digamma

from .basis import SymBasis, sector_dimension
from .spectra import Spectrum

NORM_TOL = 1e-10


@dataclass(frozen=True)
class BipartitionSpec:
    L: int
    L_A: int

    def __post_init__(self):
        if not (1 <= self.L_A <= self.L - 1):
            raise ValueError(f"need 1 <= L_A <= L-1, got L_A={self.L_A}, L={self.L}")

    @property
    def f(self) -> Fraction:
        return Fraction(self.L_A, self.L)


@dataclass
class PageCurve:
    L: int
    M: int
    l_a: np.ndarray
    s_mean: np.ndarray
    s_std: np.ndarray
    s_exact: np.ndarray
    s_asymptotic: np.ndarray
    n_states: int
    truncated: bool = False

    @property
    def f(self) -> np.ndarray:
        return self.l_a / self.L

    def as_dict(self) -> dict:
        return {"L": self.L, "M": self.M, "n_states": self.n_states,
                "truncated": self.truncated,
                "rows": [{"L_A": int(a), "f": float(a) / self.L,
                          "S_mean": float(m), "S_std": float(s),
                          "S_exact_sum": float(e), "S_asymptotic": float(y)}
                         for a, m, s, e, y in zip(self.l_a, self.s_mean, self.s_std,
                                                  self.s_exact, self.s_asymptotic)]}


# ---------------------------------------------------------------------------
# basis expansion


def expand_to_product_basis(state: np.ndarray, basis: SymBasis) -> np.ndarray:
    """Amplitudes of a sector eigenvector over the magnetization product basis.

    Output is aligned with basis.sector_states (ascending codes).
    """
    state = np.asarray(state)
    if basis.isometry is not None:
        state = basis.isometry @ state
    if basis.spec.eta is None:
        out = state.astype(complex)
    else:
        lk = basis.lookup
        rep_idx = lk._rep_idx
        phases = lk._phases
        out = np.zeros(len(basis.sector_states), dtype=complex)
        ok = rep_idx >= 0
        out[ok] = (state[rep_idx[ok]] * phases[ok]
                   / np.sqrt(basis.periods[rep_idx[ok]]))
    norm = np.linalg.norm(out)
    if abs(norm - 1.0) > NORM_TOL:
        raise AssertionError(f"expansion lost norm: |psi| = {norm}")
    return out


def project_from_product_basis(amps: np.ndarray, basis: SymBasis) -> np.ndarray:
    """Adjoint of expand_to_product_basis (round-trip identity on its image)."""
    if basis.spec.eta is None:
        out = np.asarray(amps, dtype=complex)
    else:
        lk = basis.lookup
        rep_idx = lk._rep_idx
        phases = lk._phases
        out = np.zeros(basis.momentum_dim, dtype=complex)
        ok = rep_idx >= 0
        np.add.at(out, rep_idx[ok],
                  amps[ok] * np.conj(phases[ok]) / np.sqrt(basis.periods[rep_idx[ok]]))
    if basis.isometry is not None:
        out = basis.isometry.conj().T @ out
    return out


# ---------------------------------------------------------------------------
# entropy of a state


def _subsystem_split(codes: np.ndarray, L: int, L_A: int):
    code_a = codes % 3**L_A
    code_b = codes // 3**L_A
    ua, inv_a = np.unique(code_a, return_inverse=True)
    ub, inv_b = np.unique(code_b, return_inverse=True)
    mag_a = np.zeros(len(ua), dtype=np.int64)
    c = ua.copy()
    for _ in range(L_A):
        mag_a += c % 3
        c //= 3
    mag_a -= L_A
    return inv_a, inv_b, mag_a, len(ua), len(ub)


def schmidt_probabilities(amps: np.ndarray, codes: np.ndarray, L: int,
                          L_A: int) -> np.ndarray:
    """Schmidt spectrum of a state over the first-L_A-site bipartition."""
    inv_a, inv_b, mag_a, na, nb = _subsystem_split(codes, L, L_A)
    probs = []
    for ma in np.unique(mag_a):
        rows = np.flatnonzero(mag_a == ma)
        sel = np.isin(inv_a, rows)
        if not sel.any():
            continue
        r_codes, r_inv = np.unique(inv_a[sel], return_inverse=True)
        c_codes, c_inv = np.unique(inv_b[sel], return_inverse=True)
        block = np.zeros((len(r_codes), len(c_codes)), dtype=complex)
        block[r_inv, c_inv] = amps[sel]
        sv = np.linalg.svd(block, compute_uv=False)
        probs.append(sv**2)
    p = np.concatenate(probs)
    if p.min() < -1e-10:
        raise AssertionError(f"negative Schmidt probability {p.min()}")
    return np.clip(p, 0.0, None)


def entanglement_entropy(amps: np.ndarray, codes: np.ndarray, L: int,
                         L_A: int) -> float:
    """Von Neumann entropy S = -sum p ln p (nats) of the L_A-site block."""
    norm = np.linalg.norm(amps)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"state norm {norm} != 1")
    p = schmidt_probabilities(amps, codes, L, L_A)
    nz = p > 0
    return float(-np.sum(p[nz] * np.log(p[nz])))


# ---------------------------------------------------------------------------
# random-state references


def page_exact_sum(N: int, L: int, L_A: int) -> float:
    """Exact fixed-N random-state average entropy of the L_A-site block.

    N = M + L is the total-boson-style filling label in [0, 2L]; the sum runs
    over subsystem fillings N_A with weights rho = d_A d_B / d_N and
    phi = psi(d_N + 1) - psi(max(d_A, d_B) + 1)
        - min[(d_A - 1)/(2 d_B), (d_B - 1)/(2 d_A)].
    """
    if not (1 <= L_A <= L - 1):
        raise ValueError("need 1 <= L_A <= L-1")
    d_n = sector_dimension(N, L)
    l_b = L - L_A
    total = 0.0
    for n_a in range(0, 2 * L_A + 1):
        d_a = sector_dimension(n_a, L_A)
        d_b = sector_dimension(N - n_a, l_b)
        if d_a == 0 or d_b == 0:
            continue
        rho = d_a * d_b / d_n
        phi = (digamma(d_n + 1) - digamma(max(d_a, d_b) + 1)
               - min((d_a - 1) / (2.0 * d_b), (d_b - 1) / (2.0 * d_a)))
        total += rho * phi
    return float(total)


def beta_of_filling(n: float) -> float:
    """Leading volume-law entropy density as a function of filling n = N/L."""
    if not (0.0 < n < 2.0):
        raise ValueError("filling must lie strictly between 0 and 2")
    root = np.sqrt(1.0 - 3.0 * n * (n - 2.0))
    return float((n - 2.0) * np.log(2.0 - n) + (n - 1.0) * np.log(2.0)
                 + np.log(7.0 - 3.0 * n + root) - n * np.log(n - 1.0 + root))


def page_asymptotic(n: float, f: float, L: int, fd_step: float = 1e-5) -> float:
    """Large-L asymptotic of the fixed-N random-state average entropy.

    Valid for f <= 1/2 (use the f -> 1-f symmetry above).  The sqrt(L) term
    appears only at f = 1/2, built from finite-difference derivatives of the
    entropy density beta(n).
    """
    if f > 0.5 + 1e-12:
        raise ValueError("use the f -> 1 - f symmetry for f > 1/2")
    beta = beta_of_filling(n)
    half = abs(f - 0.5) < 1e-12
    out = beta * f * L
    if half:
        b_p = (beta_of_filling(n + fd_step) - beta_of_filling(n - fd_step)) / (2 * fd_step)
        b_pp = (beta_of_filling(n + fd_step) - 2 * beta + beta_of_filling(n - fd_step)) / fd_step**2
        out -= abs(b_p) / np.sqrt(2.0 * np.pi * abs(b_pp)) * np.sqrt(L)
    const = 0.5 * (f + np.log(1.0 - f))
    if half and abs(n - 1.0) < 1e-9:
        const -= 0.5
    return float(out + const)


def sample_sector_haar_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random state on the sector sphere (normalized complex Gaussian)."""
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


# ---------------------------------------------------------------------------
# eigenstate Page curve


def select_mid_spectrum(pairs: list[tuple[Spectrum, SymBasis]], n_states: int):
    """The n_states eigenstates closest to the pooled median energy.

    Returns (list of (pair index, column index), truncated flag).
    """
    energies = np.concatenate([sp.eigenvalues for sp, _ in pairs])
    origin = np.concatenate([np.full(sp.dim, i) for i, (sp, _) in enumerate(pairs)])
    column = np.concatenate([np.arange(sp.dim) for sp, _ in pairs])
    median = np.median(energies)
    order = np.argsort(np.abs(energies - median), kind="stable")
    truncated = n_states > len(energies)
    take = order[:min(n_states, len(energies))]
    return [(int(origin[t]), int(column[t])) for t in take], truncated


def eigenstate_page_curve(pairs: list[tuple[Spectrum, SymBasis]],
                          n_states: int = 100,
                          l_a_values: list[int] | None = None) -> PageCurve:
    """Average eigenstate entanglement entropy versus subsystem size."""
    if not pairs:
        raise ValueError("need at least one (spectrum, basis) pair")
    L = pairs[0][1].spec.L
    M = pairs[0][1].spec.M
    if any(b.spec.L != L or b.spec.M != M for _, b in pairs):
        raise ValueError("all sectors must share (L, M)")
    if l_a_values is None:
        l_a_values = list(range(1, L // 2 + 1))
    selected, truncated = select_mid_spectrum(pairs, n_states)
    codes = pairs[0][1].sector_states
    ent = np.zeros((len(selected), len(l_a_values)))
    for row, (pi, col) in enumerate(selected):
        sp, basis = pairs[pi]
        amps = expand_to_product_basis(sp.eigenvectors[:, col], basis)
        for ci, l_a in enumerate(l_a_values):
            ent[row, ci] = entanglement_entropy(amps, codes, L, l_a)
    n_fill = (M + L) / L
    s_exact = np.array([page_exact_sum(M + L, L, a) for a in l_a_values])
    s_asym = np.array([page_asymptotic(n_fill, min(a, L - a) / L, L)
                       for a in l_a_values])
    return PageCurve(L=L, M=M, l_a=np.asarray(l_a_values),
                     s_mean=ent.mean(axis=0), s_std=ent.std(axis=0, ddof=1),
                     s_exact=s_exact, s_asymptotic=s_asym,
                     n_states=len(selected), truncated=truncated)
