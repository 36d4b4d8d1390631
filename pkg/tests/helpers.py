"""Shared test constructions: ideal gate actions and expected-state builders.

Everything here is built from the gates' stated logic rules, independent of
the simulation path it is used to check.
"""

import numpy as np

from fredkinlab import PhotonicState, Polarization
from fredkinlab.fock import ModeRegistry, Occupation


def fredkin_vec(values) -> np.ndarray:
    """Controlled swap on (c, t1, t2) bit triples: V control swaps the targets."""
    out = np.zeros(8, dtype=complex)
    for i, a in enumerate(values):
        c, x, y = (i >> 2) & 1, (i >> 1) & 1, i & 1
        j = (c << 2) | ((y << 1) | x if c else (x << 1) | y)
        out[j] += a
    return out


def cnot_vec(values) -> np.ndarray:
    out = np.zeros(4, dtype=complex)
    for i, a in enumerate(values):
        c, t = (i >> 1) & 1, i & 1
        out[(c << 1) | (t ^ c)] += a
    return out


def pol(bit: int) -> Polarization:
    return Polarization.V if bit else Polarization.H


def state_from_terms(registry: ModeRegistry, terms) -> PhotonicState:
    """Build a sparse state from [(amplitude, {beam: (pol[, bin])}), ...]."""
    amps = {}
    for amplitude, content in terms:
        occ = [0] * registry.size
        for beam, spec in content.items():
            if registry.time_resolved:
                p, b = spec
                occ[registry.index(beam, p, b)] += 1
            else:
                occ[registry.index(beam, spec)] += 1
        key = tuple(occ)
        amps[key] = amps.get(key, 0.0) + amplitude
    return PhotonicState(registry, amps, validate=False)


def qubit_ket(registry: ModeRegistry, beams, bits, tbin=None) -> Occupation:
    occ = [0] * registry.size
    for beam, bit in zip(beams, bits):
        if registry.time_resolved:
            occ[registry.index(beam, pol(bit), tbin)] += 1
        else:
            occ[registry.index(beam, pol(bit))] += 1
    return tuple(occ)


def bits_of(index: int, n: int):
    return tuple((index >> (n - 1 - q)) & 1 for q in range(n))


def assert_states_close(got: PhotonicState, expected: PhotonicState, tol=1e-10):
    keys = set(got.amps) | set(expected.amps)
    for k in keys:
        a = got.amps.get(k, 0.0)
        b = expected.amps.get(k, 0.0)
        assert abs(a - b) < tol, f"amplitude mismatch at {k}: {a} vs {b}"
