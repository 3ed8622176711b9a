"""Spin-1 product-state bookkeeping and symmetry-adapted bases.

Product states of an L-site spin-1 chain are encoded as integers in base 3:
digit j (the 3**j place) holds the trit t_j in {0,1,2} of site j, with local
S^z eigenvalue m_j = t_j - 1.  On top of the plain magnetization sectors this
module builds quasimomentum bases (translation orbits with representative =
minimal code) and resolves parity / spin-inversion as a second projection
layer inside a momentum sector.
"""

from __future__ import annotations

import math

import scipy.sparse as sparse
from dataclasses import dataclass, field

import numpy as np

MAX_SITES = 16

PBC = "PBC"
OBC = "OBC"


# ---------------------------------------------------------------------------
# product-state code manipulation


def magnetization(code: int, L: int) -> int:
    """Total S^z of the product state `code` (sum of trits minus L)."""
    s = 0
    for _ in range(L):
        code, t = divmod(code, 3)
        s += t
    return s - L


def translate(code: int, L: int) -> int:
    """One-site translation T: site j -> j+1 (digit j -> digit j+1, cyclic)."""
    top = code // 3 ** (L - 1)
    return (code * 3) % 3**L + top


def spin_flip(code: int, L: int) -> int:
    """Global spin inversion S^z -> -S^z: trit t -> 2 - t at every site."""
    return 3**L - 1 - code


def reflect(code: int, L: int) -> int:
    """Spatial reflection: site j -> L-1-j (digit reversal)."""
    out = 0
    for _ in range(L):
        code, t = divmod(code, 3)
        out = 3 * out + t
    return out


def trits(code: int, L: int) -> tuple[int, ...]:
    out = []
    for _ in range(L):
        code, t = divmod(code, 3)
        out.append(t)
    return tuple(out)


def code_from_trits(ts) -> int:
    out = 0
    for j, t in enumerate(ts):
        out += t * 3**j
    return out


def _translate_array(codes: np.ndarray, L: int) -> np.ndarray:
    top = codes // 3 ** (L - 1)
    return (codes * 3) % 3**L + top


def _magnetization_array(codes: np.ndarray, L: int) -> np.ndarray:
    s = np.zeros_like(codes)
    c = codes.copy()
    for _ in range(L):
        s += c % 3
        c //= 3
    return s - L


# ---------------------------------------------------------------------------
# sector dimensions (exact integer arithmetic)


def sector_dimension(N: int, L: int) -> int:
    """Dimension of the fixed-magnetization sector with N = M + L.

    D(N, L) = sum_k (-1)^k C(L, k) C(N - 3k + L - 1, L - 1), evaluated with
    exact (arbitrary width) integers; binomials with a negative upper index
    vanish.
    """
    if L < 1:
        raise ValueError(f"need at least one site, got L={L}")
    if N < 0 or N > 2 * L:
        return 0
    total = 0
    for k in range(L + 1):
        top = N - 3 * k + L - 1
        if top < L - 1:
            break
        total += (-1) ** k * math.comb(L, k) * math.comb(top, L - 1)
    return total


def check_dimension_identities(L: int, M: int) -> dict:
    """Verify the exact sector-dimension recursions at (L, M).

    D^L_M = D^{L-1}_{M+1} + D^{L-1}_M + D^{L-1}_{M-1}
    M * D^L_M = L * (D^{L-1}_{M-1} - D^{L-1}_{M+1})
    """
    if L < 2 or abs(M) > L:
        raise ValueError(f"invalid (L={L}, M={M})")

    def d(ll, mm):
        return sector_dimension(mm + ll, ll) if abs(mm) <= ll else 0

    lhs_sum = d(L, M)
    rhs_sum = d(L - 1, M + 1) + d(L - 1, M) + d(L - 1, M - 1)
    lhs_diff = M * d(L, M)
    rhs_diff = L * (d(L - 1, M - 1) - d(L - 1, M + 1))
    report = {
        "L": L,
        "M": M,
        "sum_identity": (lhs_sum, rhs_sum),
        "difference_identity": (lhs_diff, rhs_diff),
        "ok": lhs_sum == rhs_sum and lhs_diff == rhs_diff,
    }
    if not report["ok"]:
        raise AssertionError(f"dimension identity violated: {report}")
    return report


def enumerate_m_sector(L: int, M: int) -> np.ndarray:
    """Ascending codes of all product states with magnetization M."""
    if abs(M) > L:
        raise ValueError(f"|M| must be <= L, got (L={L}, M={M})")
    codes = np.arange(3**L, dtype=np.int64)
    return codes[_magnetization_array(codes, L) == M]


# ---------------------------------------------------------------------------
# sector specification


@dataclass(frozen=True)
class SectorSpec:
    """Symmetry quantum numbers of one block.

    eta indexes the quasimomentum k = 2*pi*eta/L (None when translations are
    not resolved, e.g. OBC or a plain magnetization basis).  parity (+-1) is
    resolvable only at k = 0 or pi; spin_flip (+-1) only at M = 0.
    """

    L: int
    M: int
    eta: int | None = None
    parity: int | None = None
    spin_flip: int | None = None
    bc: str = PBC

    def __post_init__(self):
        if not (1 <= self.L <= MAX_SITES):
            raise ValueError(f"L must be in [1, {MAX_SITES}], got {self.L}")
        if abs(self.M) > self.L:
            raise ValueError(f"|M| <= L required, got M={self.M}, L={self.L}")
        if self.bc not in (PBC, OBC):
            raise ValueError(f"bc must be {PBC!r} or {OBC!r}")
        if self.bc == OBC and self.eta is not None:
            raise ValueError("momentum sectors require periodic boundaries")
        if self.eta is not None:
            eta_min = -(self.L // 2) + (1 if self.L % 2 == 0 else 0)
            eta_max = self.L // 2
            if not (eta_min <= self.eta <= eta_max):
                raise ValueError(
                    f"eta={self.eta} outside [{eta_min}, {eta_max}] for L={self.L}"
                )
        if self.parity is not None:
            if self.parity not in (1, -1):
                raise ValueError("parity must be +-1")
            if self.eta is None or self.eta not in (0, self.L // 2) or (
                self.eta == self.L // 2 and self.L % 2 != 0
            ):
                raise ValueError("parity resolvable only at k = 0 or pi")
        if self.spin_flip is not None:
            if self.spin_flip not in (1, -1):
                raise ValueError("spin_flip must be +-1")
            if self.M != 0:
                raise ValueError("spin inversion resolvable only at M = 0")

    @property
    def k(self) -> float:
        if self.eta is None:
            raise ValueError("sector has no quasimomentum")
        return 2.0 * np.pi * self.eta / self.L

    def as_dict(self) -> dict:
        return {
            "L": self.L,
            "M": self.M,
            "eta": self.eta,
            "parity": self.parity,
            "spin_flip": self.spin_flip,
            "bc": self.bc,
        }


def momentum_sector_indices(L: int) -> list[int]:
    """All eta values of the quasimomentum grid k = 2*pi*eta/L."""
    if L % 2 == 0:
        return list(range(-L // 2 + 1, L // 2 + 1))
    return list(range(-(L // 2), L // 2 + 1))


# ---------------------------------------------------------------------------
# symmetry-adapted basis


class _Lookup:
    """Map product-state code -> (rep index, orbit phase).

    Direct-address table for L <= 12 (3**L entries), sorted-array binary
    search above.  The stored phase is the amplitude (times sqrt(period)) of
    the code within its representative's momentum state.
    """

    def __init__(self, codes: np.ndarray, rep_idx: np.ndarray,
                 phases: np.ndarray, L: int):
        self._L = L
        if L <= 12:
            size = 3**L
            self._table = np.full(size, -1, dtype=np.int32)
            self._table[codes] = np.arange(len(codes), dtype=np.int32)
            self._direct = True
        else:
            self._codes = codes
            self._direct = False
        self._rep_idx = rep_idx
        self._phases = phases

    def find(self, codes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized lookup; rep index is -1 for codes outside the basis."""
        codes = np.asarray(codes)
        if self._direct:
            pos = self._table[codes]
        else:
            pos = np.searchsorted(self._codes, codes)
            pos = np.where(
                (pos < len(self._codes)) & (self._codes[np.minimum(pos, len(self._codes) - 1)] == codes),
                pos, -1).astype(np.int64)
        valid = pos >= 0
        idx = np.where(valid, self._rep_idx[pos], -1)
        ph = np.where(valid, self._phases[pos], 0.0)
        return idx, ph


@dataclass
class SymBasis:
    """Symmetry-adapted basis of one sector.

    For momentum sectors, `reps` are minimal-code orbit representatives with
    `periods` dividing L; the momentum state of rep a places amplitude
    exp(+i*k*q)/sqrt(p_a) on T^q|rep_a>, so the translation eigenvalue is
    exp(-i*k).  `isometry`, when present, maps the parity/spin-inversion
    eigenbasis into momentum-basis coordinates (columns are orthonormal).
    """

    spec: SectorSpec
    reps: np.ndarray
    periods: np.ndarray
    lookup: _Lookup | None
    isometry: "sparse.spmatrix | np.ndarray | None" = None
    sector_states: np.ndarray = field(default=None, repr=False)

    @property
    def momentum_dim(self) -> int:
        return len(self.reps)

    @property
    def dim(self) -> int:
        if self.isometry is not None:
            return self.isometry.shape[1]
        return len(self.reps)

    def as_dict(self) -> dict:
        d = self.spec.as_dict()
        d["dim"] = self.dim
        return d


def _orbit_data(codes: np.ndarray, L: int):
    """Representative code and period of every state's translation orbit."""
    rep = codes.copy()
    shift = np.zeros(len(codes), dtype=np.int64)  # steps from rep to state
    cur = codes.copy()
    period = np.full(len(codes), L, dtype=np.int64)
    first_return = np.full(len(codes), L, dtype=np.int64)
    for q in range(1, L):
        cur = _translate_array(cur, L)
        smaller = cur < rep
        rep = np.where(smaller, cur, rep)
        # state = T^{L-q} rep_candidate when the candidate appears at step q
        shift = np.where(smaller, L - q, shift)
        back = (cur == codes) & (first_return == L)
        first_return = np.where(back, q, first_return)
    period = first_return
    shift = shift % period
    return rep, period, shift


def build_sym_basis(spec: SectorSpec) -> SymBasis:
    """Construct the symmetry-adapted basis for `spec`.

    Momentum sectors keep an orbit representative (minimal code) iff its
    period p satisfies eta * p = 0 (mod L).  parity / spin_flip, when
    requested, are applied as projections within the momentum basis.
    """
    L, M = spec.L, spec.M
    codes = enumerate_m_sector(L, M)

    if spec.eta is None:
        # plain magnetization basis (OBC, or PBC without momentum resolution)
        basis = SymBasis(
            spec=spec,
            reps=codes,
            periods=np.ones(len(codes), dtype=np.int64),
            lookup=_Lookup(codes, np.arange(len(codes), dtype=np.int64),
                           np.ones(len(codes), dtype=complex), L),
            sector_states=codes,
        )
        if spec.spin_flip is not None or spec.parity is not None:
            basis.isometry = _project_discrete(basis)
        return basis

    rep, period, shift = _orbit_data(codes, L)
    k = spec.k
    is_rep = rep == codes
    compatible = (spec.eta * period) % L == 0
    keep = is_rep & compatible
    reps = codes[keep]
    rep_periods = period[keep]

    # index of each state's representative within `reps`
    rep_pos = np.searchsorted(reps, rep)
    state_ok = compatible.copy()
    rep_pos = np.where(state_ok, rep_pos, -1)
    phases = np.where(state_ok, np.exp(1j * k * shift), 0.0)

    lookup = _Lookup(codes, rep_pos.astype(np.int64), phases, L)
    basis = SymBasis(spec=spec, reps=reps, periods=rep_periods,
                     lookup=lookup, sector_states=codes)
    if spec.spin_flip is not None or spec.parity is not None:
        basis.isometry = _project_discrete(basis)
    return basis


def _phased_permutation(basis: SymBasis, mapper) -> tuple[np.ndarray, np.ndarray]:
    """Action of a code-level involution on the momentum basis.

    Returns (partner index, phase) such that X|a> = phase[a] |partner[a]>.
    """
    L = basis.spec.L
    mapped = np.array([mapper(int(c), L) for c in basis.reps], dtype=np.int64)
    idx, ph = basis.lookup.find(mapped)
    if np.any(idx < 0):
        raise ValueError("symmetry operation leaves the sector")
    # X |a(k)> = conj(phase) |b(k)>, with phase the orbit amplitude of the
    # mapped code (same orbit period, so no sqrt factor)
    return idx, np.conj(ph)


def _pairwise_eigenbasis(partner, phase, sign, dim):
    """Orthonormal eigenvectors of a phased permutation involution.

    Columns have one or two nonzero entries, so the isometry is assembled
    directly in sparse column form.
    """
    rows, cols, data = [], [], []
    n_cols = 0
    done = np.zeros(dim, dtype=bool)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for a in range(dim):
        if done[a]:
            continue
        b = partner[a]
        if b == a:
            done[a] = True
            if abs(phase[a] - sign) < 1e-9:
                rows.append(a)
                cols.append(n_cols)
                data.append(1.0)
                n_cols += 1
        else:
            done[a] = True
            done[b] = True
            rows.extend((a, b))
            cols.extend((n_cols, n_cols))
            data.extend((inv_sqrt2, sign * phase[a] * inv_sqrt2))
            n_cols += 1
    return sparse.csc_matrix(
        (np.asarray(data, dtype=complex), (rows, cols)), shape=(dim, n_cols))


def _project_discrete(basis: SymBasis) -> np.ndarray:
    """Isometry onto the requested parity / spin-inversion eigenspace."""
    spec = basis.spec
    dim = basis.momentum_dim
    Q = None
    for mapper, sign in ((spin_flip, spec.spin_flip), (reflect, spec.parity)):
        if sign is None:
            continue
        partner, phase = _phased_permutation(basis, mapper)
        if Q is None:
            Q = _pairwise_eigenbasis(partner, phase, sign, dim)
        else:
            # second involution is generally not a permutation in the reduced
            # basis: project it and split eigenspaces densely
            X = sparse.csc_matrix(
                (phase, (partner, np.arange(dim))), shape=(dim, dim))
            R = (Q.conj().T @ (X @ Q)).toarray()
            w, v = np.linalg.eigh(R)
            sel = np.abs(w - sign) < 1e-8
            Q = sparse.csc_matrix(Q @ v[:, sel])
    return Q if Q is not None else sparse.identity(dim, dtype=complex, format="csc")


def sector_inventory(L: int, M: int) -> list[dict]:
    """Dimensions of all momentum sectors of (L, M), exportable as JSON."""
    out = []
    for eta in momentum_sector_indices(L):
        b = build_sym_basis(SectorSpec(L=L, M=M, eta=eta))
        out.append(b.as_dict())
    return out
