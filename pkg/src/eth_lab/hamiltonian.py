"""Spin-1 XXZ Hamiltonian and observables as blocks in symmetry-adapted bases.

The chain Hamiltonian (periodic boundaries) is

    H = -sum_j (Sx_j Sx_{j+1} + Sy_j Sy_{j+1} + Delta Sz_j Sz_{j+1})
        + lambda * sum_j [ (S_j . S_{j+1})^2
                           - mu (2 (Sz_j)^2 - (Sz_j Sz_{j+1})^2)
                           - nu ((Sx_j Sx_{j+1} + Sy_j Sy_{j+1}) Sz_j Sz_{j+1}
                                 + H.c.) ]

with mu = Delta - 1 and nu = 2 - sqrt(2 (1 + Delta)); lambda = 1 is the
integrable Zamolodchikov-Fateev point, lambda = 0 the chaotic point.  The
open-boundary variant drops the lambda terms, sums bonds 1..L-1 and adds an
edge field hz1 * Sz_1 to break reflection symmetry.

Matrices are assembled by acting term-by-term on each basis representative
and accumulating through the orbit lookup; the full 3^L operator is never
materialized except in the small-L oracle helper.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import OBC, PBC, SectorSpec, SymBasis, build_sym_basis

HERMITICITY_TOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    delta: float = 0.55
    lam: float = 0.0
    bc: str = PBC
    hz1: float = 0.1

    def __post_init__(self):
        if 1.0 + self.delta < 0:
            raise ValueError("need 1 + delta >= 0 for a real nu")
        if self.bc not in (PBC, OBC):
            raise ValueError(f"bc must be {PBC!r} or {OBC!r}")
        if self.bc == OBC and self.lam != 0.0:
            raise ValueError("the open-chain model has no biquadratic term; "
                             "lam must be 0 with OBC")

    @property
    def mu(self) -> float:
        return self.delta - 1.0

    @property
    def nu(self) -> float:
        return 2.0 - np.sqrt(2.0 * (1.0 + self.delta))

    def as_dict(self) -> dict:
        return {"delta": self.delta, "lam": self.lam, "bc": self.bc,
                "hz1": self.hz1 if self.bc == OBC else None}


@dataclass
class OperatorBlock:
    """Dense Hermitian operator restricted to one symmetry sector.

    `hs_prefactor_applied` records whether the intensive 1/L (or 1/(L-2))
    prefactor is already contained in the matrix.  `k_diagonal_only` flags a
    translation-breaking operator truncated to its momentum-diagonal part.
    """

    spec: SectorSpec
    matrix: np.ndarray
    label: str
    hs_prefactor_applied: bool = True
    k_diagonal_only: bool = False

    def __post_init__(self):
        if self.matrix.size == 0:
            return
        dev = np.abs(self.matrix - self.matrix.conj().T).max()
        if dev > HERMITICITY_TOL * max(1.0, np.abs(self.matrix).max()):
            raise ValueError(
                f"block {self.label!r} not Hermitian: max deviation {dev:.3e}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


# ---------------------------------------------------------------------------
# single-site spin-1 matrices (basis t = 0, 1, 2 <-> m = -1, 0, +1)


def spin_matrices() -> dict[str, np.ndarray]:
    sz = np.diag([-1.0, 0.0, 1.0]).astype(complex)
    sp_ = np.zeros((3, 3), dtype=complex)
    sp_[1, 0] = sp_[2, 1] = np.sqrt(2.0)
    sm = sp_.conj().T
    sx = (sp_ + sm) / 2.0
    sy = (sp_ - sm) / 2.0j
    return {"sx": sx, "sy": sy, "sz": sz, "sp": sp_, "sm": sm,
            "id": np.eye(3, dtype=complex)}


def _two_site(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Operator a on the first listed site, b on the second.

    Local two-site index convention: c = t_first + 3 * t_second.
    """
    return np.kron(b, a)


def bond_matrix(params: ModelParams) -> np.ndarray:
    """Two-site bond term of the periodic Hamiltonian (sites j, j+1)."""
    s = spin_matrices()
    xy = _two_site(s["sx"], s["sx"]) + _two_site(s["sy"], s["sy"])
    zz = _two_site(s["sz"], s["sz"])
    h = -(xy + params.delta * zz)
    if params.lam != 0.0:
        heis = xy + zz
        biq = heis @ heis
        sz2 = s["sz"] @ s["sz"]
        mu_term = 2.0 * _two_site(sz2, s["id"]) - zz @ zz
        w = xy @ zz
        nu_term = w + w.conj().T
        h = h + params.lam * (biq - params.mu * mu_term - params.nu * nu_term)
    return h


def hamiltonian_terms(params: ModelParams, L: int) -> list[tuple[tuple[int, ...], np.ndarray]]:
    """Site-resolved term list of the Hamiltonian."""
    s = spin_matrices()
    if params.bc == PBC:
        h2 = bond_matrix(params)
        return [((j, (j + 1) % L), h2) for j in range(L)]
    if params.lam != 0.0:
        raise ValueError("open-boundary model is defined without lambda terms")
    xy = _two_site(s["sx"], s["sx"]) + _two_site(s["sy"], s["sy"])
    zz = _two_site(s["sz"], s["sz"])
    h2 = -(xy + params.delta * zz)
    terms = [((j, j + 1), h2) for j in range(L - 1)]
    terms.append(((0,), params.hz1 * s["sz"]))
    return terms


def observable_terms(which: str, L: int, bc: str = PBC,
                     site: int | None = None) -> list[tuple[tuple[int, ...], np.ndarray]]:
    """Term list of a named observable.

    which: 'zn' | 'znn' | 'jn' (translationally invariant sums with 1/L),
    'znn_local' (Sz_j Sz_{j+2} at 0-based site `site`), or 'znn_avg_obc'
    (open-chain average with 1/(L-2)).
    """
    s = spin_matrices()
    zz = _two_site(s["sz"], s["sz"])
    if bc == OBC and which in ("zn", "znn", "jn"):
        raise ValueError(f"{which!r} is a periodic-chain observable")
    if which == "zn":
        return [((j, (j + 1) % L), zz / L) for j in range(L)]
    if which == "znn":
        if bc == PBC:
            return [((j, (j + 2) % L), zz / L) for j in range(L)]
        raise ValueError("znn with open boundaries: use znn_avg_obc")
    if which == "jn":
        cur = 1j * (_two_site(s["sp"], s["sm"]) - _two_site(s["sm"], s["sp"])) / L
        return [((j, (j + 1) % L), cur) for j in range(L)]
    if which == "znn_local":
        if site is None:
            raise ValueError("znn_local needs a site")
        j2 = (site + 2) % L if bc == PBC else site + 2
        if bc == OBC and not (0 <= site <= L - 3):
            raise ValueError(f"site {site} out of open-chain range [0, {L - 3}]")
        return [((site, j2), zz)]
    if which == "znn_avg_obc":
        if bc != OBC:
            raise ValueError("znn_avg_obc is an open-boundary operator")
        return [((j, j + 2), zz / (L - 2)) for j in range(L - 2)]
    raise ValueError(f"unknown observable {which!r}")


# ---------------------------------------------------------------------------
# assembly kernels


def _local_index(codes: np.ndarray, sites: tuple[int, ...]) -> np.ndarray:
    c = np.zeros_like(codes)
    for i, st in enumerate(sites):
        c += ((codes // 3**st) % 3) * 3**i
    return c


def operator_in_momentum_basis(terms, basis: SymBasis) -> sp.csr_matrix:
    """Sparse matrix of a (translation-covariant) term sum in the momentum
    basis of `basis`; also valid for plain magnetization bases.

    B[b, a] = sqrt(p_a / p_b) * sum_s h_s * conj(phi_s), where the term sum
    acting on |rep_a> yields product states s with amplitudes h_s and phi_s
    is the orbit phase stored in the lookup.
    """
    reps = basis.reps
    periods = basis.periods.astype(float)
    n = len(reps)
    L = basis.spec.L
    rows, cols, vals = [], [], []
    a_idx = np.arange(n, dtype=np.int64)
    for sites, mat in terms:
        loc = _local_index(reps, sites)
        nz_r, nz_c = np.nonzero(np.abs(mat) > 1e-15)
        for r, c in zip(nz_r, nz_c):
            mask = loc == c
            if not mask.any():
                continue
            delta_code = 0
            rr, cc = int(r), int(c)
            for i, st in enumerate(sites):
                delta_code += ((rr // 3**i) % 3 - (cc // 3**i) % 3) * 3**st
            new_codes = reps[mask] + delta_code
            b, phi = basis.lookup.find(new_codes)
            ok = b >= 0
            if not ok.any():
                continue
            aa = a_idx[mask][ok]
            bb = b[ok]
            amp = mat[rr, cc] * np.conj(phi[ok]) * np.sqrt(periods[aa] / periods[bb])
            rows.append(bb)
            cols.append(aa)
            vals.append(amp)
    if not rows:
        return sp.csr_matrix((n, n), dtype=complex)
    coo = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n), dtype=complex)
    return coo.tocsr()


def project_block(mat: sp.spmatrix, basis: SymBasis) -> np.ndarray:
    """Dense matrix in the final (possibly parity/spin-flip reduced) basis."""
    if basis.isometry is None:
        out = mat
    else:
        Q = basis.isometry
        out = Q.conj().T @ (mat @ Q)
    return np.asarray(out.todense()) if sp.issparse(out) else np.asarray(out)


def rotate_cross_block(mat: sp.spmatrix, bra_basis: SymBasis,
                       ket_basis: SymBasis) -> np.ndarray:
    """<bra-subspace| mat |ket-subspace> for two reductions of one momentum
    basis (e.g. the two spin-inversion subsectors)."""
    qb = bra_basis.isometry
    qk = ket_basis.isometry
    out = mat @ qk if qk is not None else mat
    if qb is not None:
        out = qb.conj().T @ out
    return np.asarray(out.todense()) if sp.issparse(out) else np.asarray(out)


def build_hamiltonian(params: ModelParams, basis: SymBasis) -> OperatorBlock:
    if (basis.spec.bc == OBC) != (params.bc == OBC):
        raise ValueError("basis and parameters disagree on boundary conditions")
    terms = hamiltonian_terms(params, basis.spec.L)
    mat = operator_in_momentum_basis(terms, basis)
    dense = project_block(mat, basis)
    if basis.spec.bc == OBC and np.abs(dense.imag).max() <= 1e-13:
        dense = np.ascontiguousarray(dense.real)
    return OperatorBlock(spec=basis.spec, matrix=dense, label="H")


def build_observable(which: str, basis: SymBasis,
                     site: int | None = None) -> OperatorBlock:
    """Observable block in `basis`.

    A local operator requested in a momentum-projected basis is truncated to
    its momentum-diagonal part, which equals the block of its translational
    average; the returned block flags this truncation.
    """
    L = basis.spec.L
    bc = basis.spec.bc
    k_diag_only = False
    if which == "znn_local" and basis.spec.eta is not None:
        # momentum-diagonal part of a local operator = translational average
        terms = [(sites, m / L) for sites, m in
                 ((s2, m2) for j in range(L)
                  for s2, m2 in observable_terms("znn_local", L, bc, site=j))]
        k_diag_only = True
    else:
        terms = observable_terms(which, L, bc, site=site)
    mat = operator_in_momentum_basis(terms, basis)
    dense = project_block(mat, basis)
    if bc == OBC and np.abs(dense.imag).max() <= 1e-13:
        dense = np.ascontiguousarray(dense.real)
    prefactored = which in ("zn", "znn", "jn", "znn_avg_obc")
    return OperatorBlock(spec=basis.spec, matrix=dense, label=which,
                         hs_prefactor_applied=prefactored,
                         k_diagonal_only=k_diag_only)


def cross_sector_block(terms, bra_basis: SymBasis,
                       ket_basis: SymBasis) -> np.ndarray:
    """Rectangular block <b(k_m)| O |a(k_n)> of a local operator between two
    momentum sectors sharing (L, M).

    R[b, a] = (1 / sqrt(p_a p_b)) sum_q exp(i k_n q) sum_s h_s conj(phi^m_s)
    with the outer sum over the ket orbit and phi^m the bra-sector phase.
    """
    bs, ks = bra_basis.spec, ket_basis.spec
    if bs.L != ks.L or bs.M != ks.M or bs.bc != PBC or ks.bc != PBC:
        raise ValueError("cross-sector blocks need matching (L, M) momentum bases")
    L = bs.L
    k_n = ks.k
    reps = ket_basis.reps
    pa = ket_basis.periods.astype(float)
    nb = bra_basis.momentum_dim
    na = len(reps)
    out = np.zeros((nb, na), dtype=complex)
    pb = bra_basis.periods.astype(float)
    a_idx = np.arange(na)
    codes_q = reps.copy()
    for q in range(L):
        active = q < ket_basis.periods
        if not active.any():
            break
        phase_q = np.exp(1j * k_n * q)
        for sites, mat in terms:
            loc = _local_index(codes_q, sites)
            nz_r, nz_c = np.nonzero(np.abs(mat) > 1e-15)
            for r, c in zip(nz_r, nz_c):
                mask = active & (loc == c)
                if not mask.any():
                    continue
                delta_code = 0
                rr, cc = int(r), int(c)
                for i, st in enumerate(sites):
                    delta_code += ((rr // 3**i) % 3 - (cc // 3**i) % 3) * 3**st
                new_codes = codes_q[mask] + delta_code
                b, phi = bra_basis.lookup.find(new_codes)
                ok = b >= 0
                if not ok.any():
                    continue
                aa = a_idx[mask][ok]
                bb = b[ok]
                amp = (mat[rr, cc] * phase_q * np.conj(phi[ok])
                       / np.sqrt(pa[aa] * pb[bb]))
                np.add.at(out, (bb, aa), amp)
        from .basis import _translate_array
        codes_q = _translate_array(codes_q, L)
    return out


# ---------------------------------------------------------------------------
# dense full-space oracle (small L only)


def embed_operator(mat: np.ndarray, sites: tuple[int, ...], L: int) -> np.ndarray:
    """Dense 3^L embedding of a few-site operator (oracle pathway)."""
    if L > 8:
        raise ValueError("dense full-space construction limited to L <= 8")
    dim = 3**L
    n_loc = 3 ** len(sites)
    out = np.zeros((dim, dim), dtype=complex)
    codes = np.arange(dim)
    loc = _local_index(codes, sites)
    strip = codes - sum(((codes // 3**st) % 3) * 3**st for st in sites)
    for r in range(n_loc):
        for c in range(n_loc):
            if abs(mat[r, c]) < 1e-15:
                continue
            mask = loc == c
            row_codes = strip[mask] + sum(((r // 3**i) % 3) * 3**sites[i]
                                          for i in range(len(sites)))
            out[row_codes, codes[mask]] += mat[r, c]
    return out


def full_space_operator(terms, L: int) -> np.ndarray:
    dim = 3**L
    out = np.zeros((dim, dim), dtype=complex)
    for sites, mat in terms:
        out += embed_operator(mat, sites, L)
    return out


def plain_m_basis(L: int, M: int, bc: str = PBC) -> SymBasis:
    """Magnetization-sector basis without momentum resolution."""
    return build_sym_basis(SectorSpec(L=L, M=M, bc=bc))
