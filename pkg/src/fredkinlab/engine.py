"""State evolution: unitaries, post-selection, measurement with feed-forward.

``apply_unitary`` performs the bosonic substitution a+_i -> sum_j U[j,i] a+_j
on every stored occupation monomial.  ``transition_amplitude_oracle`` computes
the same amplitudes independently from a matrix permanent (Ryser's formula
over the row/column-repeated submatrix); the two routes cross-check each other
and must never be merged.

Measurement enumerates detector outcome branches exactly.  Feed-forward
corrections are applied per branch; after correction all accepted branches of
the gates in scope carry the same conditional state, which the pooling step
verifies before combining them with their outcome probabilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .elements import ModeUnitary, hwp_unitary
from .fock import (
    ModeRegistry,
    Occupation,
    PhotonicState,
    Polarization,
)

_FACTORIALS = [math.factorial(n) for n in range(21)]


class EngineError(ValueError):
    pass


class PhotonNumberMismatch(EngineError):
    pass


class FeedForwardError(EngineError):
    pass


def apply_unitary(state: PhotonicState, u: ModeUnitary) -> PhotonicState:
    """Evolve a state through a mode unitary; preserves the norm."""
    if u.registry != state.registry:
        raise EngineError("unitary acts on a different registry")
    m = state.registry.size
    mat = u.matrix
    # sparse column view: mode i -> [(j, U[j,i]) for nonzero U[j,i]]
    cols: list[list[tuple[int, complex]]] = [
        [(j, mat[j, i]) for j in range(m) if mat[j, i] != 0.0] for i in range(m)
    ]
    out: dict[Occupation, complex] = {}
    for occ, amp in state.amps.items():
        # monomial coefficient of prod_i (a+_i)^n_i
        poly: dict[Occupation, complex] = {(0,) * m: amp / _occ_norm(occ)}
        for i, n in enumerate(occ):
            col = cols[i]
            for _ in range(n):
                nxt: dict[Occupation, complex] = {}
                for key, c in poly.items():
                    for j, uji in col:
                        k2 = list(key)
                        k2[j] += 1
                        k2t = tuple(k2)
                        nxt[k2t] = nxt.get(k2t, 0.0) + c * uji
                poly = nxt
        for key, c in poly.items():
            out[key] = out.get(key, 0.0) + c * _occ_norm(key)
    return PhotonicState(state.registry, out, prune_eps=state.prune_eps, validate=False)


def _occ_norm(occ: Occupation) -> float:
    """sqrt(prod n_i!) linking monomial coefficients to state amplitudes."""
    p = 1
    for n in occ:
        if n > 1:
            p *= _FACTORIALS[n]
    return math.sqrt(p)


def ryser_permanent(a: np.ndarray) -> complex:
    """Permanent of a square matrix by Ryser's formula with Gray-code updates."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n):
        raise EngineError("permanent needs a square matrix")
    if n == 0:
        return 1.0 + 0.0j
    total = 0.0 + 0.0j
    row_sums = np.zeros(n, dtype=complex)
    gray = 0
    sign = 1 if n % 2 == 0 else -1  # (-1)^n prefactor folded into subset signs
    for k in range(1, 1 << n):
        new_gray = k ^ (k >> 1)
        changed = gray ^ new_gray
        j = changed.bit_length() - 1
        if new_gray & changed:
            row_sums += a[:, j]
        else:
            row_sums -= a[:, j]
        gray = new_gray
        subset_sign = -1 if (new_gray.bit_count() % 2) else 1
        total += subset_sign * np.prod(row_sums)
    return complex(sign * total)


def transition_amplitude_oracle(u: ModeUnitary | np.ndarray,
                                in_occ: Occupation, out_occ: Occupation,
                                strict: bool = False) -> complex:
    """<out|U|in> from the permanent of the occupation-repeated submatrix.

    Equals per(U_sub) / sqrt(prod m_i! prod n_j!) with column i repeated
    m_i times and row j repeated n_j times.  A photon-number mismatch is
    amplitude 0 by definition; `strict=True` raises instead.
    """
    mat = u.matrix if isinstance(u, ModeUnitary) else np.asarray(u, dtype=complex)
    n_in, n_out = sum(in_occ), sum(out_occ)
    if n_in != n_out:
        if strict:
            raise PhotonNumberMismatch(f"{n_in} photons in, {n_out} out")
        return 0.0 + 0.0j
    rows = [j for j, n in enumerate(out_occ) for _ in range(n)]
    cols = [i for i, n in enumerate(in_occ) for _ in range(n)]
    sub = mat[np.ix_(rows, cols)] if rows else np.zeros((0, 0), dtype=complex)
    denom = 1
    for n in in_occ:
        denom *= _FACTORIALS[n]
    for n in out_occ:
        denom *= _FACTORIALS[n]
    return ryser_permanent(sub) / math.sqrt(denom)


# -- post-selection ---------------------------------------------------------


@dataclass(frozen=True)
class PostSelectionRule:
    """Conjunction of photon-count constraints over disjoint mode sets."""

    constraints: tuple[tuple[tuple[int, ...], int], ...]
    renormalize: bool = False

    def __post_init__(self):
        seen: set[int] = set()
        for modes, count in self.constraints:
            if count < 0:
                raise EngineError("negative photon count in rule")
            for m in modes:
                if m in seen:
                    raise EngineError("post-selection mode sets must be disjoint")
                seen.add(m)

    def matches(self, occ: Occupation) -> bool:
        return all(sum(occ[m] for m in modes) == count for modes, count in self.constraints)

    @classmethod
    def beam_counts(cls, registry: ModeRegistry, counts: Mapping[str, int],
                    renormalize: bool = False) -> "PostSelectionRule":
        cons = tuple((registry.beam_modes(b), c) for b, c in counts.items())
        return cls(cons, renormalize=renormalize)

    @classmethod
    def mode_counts(cls, registry: ModeRegistry, counts: Sequence[tuple[Sequence[int], int]],
                    renormalize: bool = False) -> "PostSelectionRule":
        cons = tuple((tuple(ms), c) for ms, c in counts)
        return cls(cons, renormalize=renormalize)


def post_select(state: PhotonicState, rule: PostSelectionRule) -> tuple[PhotonicState, float]:
    """Keep matching occupation states.

    Returns the surviving state and its probability (squared surviving norm
    relative to the input norm).  A zero survivor is an empty state with
    probability 0, not an error.
    """
    kept = {occ: a for occ, a in state.amps.items() if rule.matches(occ)}
    survived = PhotonicState(state.registry, kept, prune_eps=state.prune_eps, validate=False)
    n_in = state.norm_sq()
    if n_in <= 0.0:
        return survived, 0.0
    prob = survived.norm_sq() / n_in
    if rule.renormalize and prob > 0.0:
        survived = survived.normalized()
    return survived, prob


def post_select_any(state: PhotonicState,
                    rules: Sequence[PostSelectionRule]) -> tuple[PhotonicState, float]:
    """Union of disjoint conjunctive rules (e.g. equal-time-bin coincidence)."""
    kept: dict[Occupation, complex] = {}
    for occ, a in state.amps.items():
        n_hit = sum(1 for r in rules if r.matches(occ))
        if n_hit > 1:
            raise EngineError("post-selection rule union is not disjoint")
        if n_hit:
            kept[occ] = a
    survived = PhotonicState(state.registry, kept, prune_eps=state.prune_eps, validate=False)
    n_in = state.norm_sq()
    prob = survived.norm_sq() / n_in if n_in > 0 else 0.0
    if rules and all(r.renormalize for r in rules) and prob > 0.0:
        survived = survived.normalized()
    return survived, prob


# -- measurement with feed-forward -------------------------------------------


class DetectorBasis:
    HV = "HV"
    PLUS_MINUS = "PM"


@dataclass(frozen=True)
class DetectorSpec:
    """Photon-number-resolving detection of one beam.

    The +/- basis is realized as a 22.5-degree half-wave plate on the beam
    followed by H/V-resolved counting, so outcome patterns are always count
    tuples over the beam's modes in canonical order (a "+" count appears in
    the H slot, "-" in the V slot).
    """
    beam: str
    basis: str = DetectorBasis.HV


REJECT = "reject"

#: correction kinds applicable to a beam: "flip" swaps H and V occupations,
#: "sign" multiplies by (-1)^(V photons), "flip_sign" applies sign then flip.
Correction = tuple[str, str]


@dataclass(frozen=True)
class FeedForwardTable:
    """Map detector outcome pattern -> accepted corrections or rejection.

    Unlisted patterns are rejected when `default_reject` is set; otherwise a
    nonzero-probability unlisted outcome is an error.
    """
    entries: tuple[tuple[tuple[int, ...], tuple[Correction, ...] | str], ...]
    default_reject: bool = True

    def lookup(self, pattern: tuple[int, ...]):
        for pat, action in self.entries:
            if pat == pattern:
                return action
        if self.default_reject:
            return REJECT
        raise FeedForwardError(f"outcome {pattern} missing from feed-forward table")

    @classmethod
    def build(cls, accept: Mapping[tuple[int, ...], Sequence[Correction]],
              default_reject: bool = True) -> "FeedForwardTable":
        entries = tuple((tuple(p), tuple(c)) for p, c in accept.items())
        return cls(entries, default_reject=default_reject)


@dataclass
class BranchRecord:
    pattern: tuple[int, ...]
    probability: float
    action: str  # "accept" or "reject"


def _apply_correction(state: PhotonicState, beam: str, kind: str) -> PhotonicState:
    reg = state.registry
    h_modes = reg.modes_where(beams=[beam], pol=Polarization.H)
    v_modes = reg.modes_where(beams=[beam], pol=Polarization.V)
    out: dict[Occupation, complex] = {}
    for occ, a in state.amps.items():
        if kind in ("sign", "flip_sign"):
            nv = sum(occ[m] for m in v_modes)
            if nv % 2:
                a = -a
        if kind in ("flip", "flip_sign"):
            lst = list(occ)
            for hm, vm in zip(h_modes, v_modes):
                lst[hm], lst[vm] = lst[vm], lst[hm]
            occ = tuple(lst)
        out[occ] = out.get(occ, 0.0) + a
    return PhotonicState(reg, out, prune_eps=state.prune_eps, validate=False)


FEEDFORWARD_CONSISTENCY_TOL = 1e-9


def measure_and_feedforward(state: PhotonicState, detector: DetectorSpec,
                            table: FeedForwardTable,
                            consistency_tol: float = FEEDFORWARD_CONSISTENCY_TOL,
                            ) -> tuple[PhotonicState, float, list[BranchRecord]]:
    """Measure one beam, apply outcome-conditioned corrections, pool branches.

    Detected photons are consumed (the beam's modes are zeroed downstream).
    Corrected accepted branches must agree as states; they are combined with
    their outcome probabilities into a single sub-normalized conditional state
    whose squared norm is the total acceptance probability times the incoming
    weight.
    """
    reg = state.registry
    working = state
    if detector.basis == DetectorBasis.PLUS_MINUS:
        working = apply_unitary(working, hwp_unitary(reg, detector.beam, 22.5))
    elif detector.basis != DetectorBasis.HV:
        raise EngineError(f"unknown detector basis {detector.basis!r}")

    det_modes = reg.beam_modes(detector.beam)
    n_in = working.norm_sq()
    if n_in <= 0.0:
        return PhotonicState(reg, {}, validate=False), 0.0, []

    branches: dict[tuple[int, ...], dict[Occupation, complex]] = {}
    for occ, a in working.amps.items():
        pattern = tuple(occ[m] for m in det_modes)
        cleared = list(occ)
        for m in det_modes:
            cleared[m] = 0
        branches.setdefault(pattern, {})[tuple(cleared)] = a

    records: list[BranchRecord] = []
    accepted: list[tuple[float, PhotonicState]] = []
    for pattern in sorted(branches):
        amps = branches[pattern]
        sub = PhotonicState(reg, amps, prune_eps=state.prune_eps, validate=False)
        p_branch = sub.norm_sq() / n_in
        action = table.lookup(pattern)
        if action == REJECT:
            records.append(BranchRecord(pattern, p_branch, "reject"))
            continue
        for beam, kind in action:
            sub = _apply_correction(sub, beam, kind)
        records.append(BranchRecord(pattern, p_branch, "accept"))
        accepted.append((p_branch, sub))

    if not accepted:
        return PhotonicState(reg, {}, validate=False), 0.0, records

    p_total = sum(p for p, _ in accepted)
    pooled: dict[Occupation, complex] = {}
    for p_branch, sub in accepted:
        w = p_branch / math.sqrt(sub.norm_sq())
        for occ, a in sub.amps.items():
            pooled[occ] = pooled.get(occ, 0.0) + w * a
    pooled_state = PhotonicState(reg, pooled, prune_eps=state.prune_eps, validate=False)
    # equal corrected branches <=> pooled norm equals sum of branch weights
    pooled_norm = math.sqrt(pooled_state.norm_sq())
    if abs(pooled_norm - p_total) > consistency_tol * max(p_total, 1.0):
        raise FeedForwardError(
            "corrected branches disagree; feed-forward table does not make the "
            f"gate deterministic (pooled norm {pooled_norm:.6g} vs {p_total:.6g})")
    scale = math.sqrt(p_total * n_in) / pooled_norm
    return pooled_state.scaled(scale), p_total, records
