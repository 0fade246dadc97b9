"""
The three-dimensional example pair and its checked-in reference values.

p is the atom onto (1, 1, 1)/√3 and e = diag(1/4, 1/2, 3/4). The pair is
totally noncompatible ([p, e] = 1) without being in generic position
(rank b° = 2).
"""
from os import path

import numpy as np

from synaptic import serialize
from synaptic.calculus import spectral_resolution
from synaptic.cbs import atom_structure, cbs_decompose
from synaptic.commutator import inequality_chain
from synaptic.elements import Effect, Projection
from synaptic.infimum import atom_mean, inf_with_atom_complement
from synaptic.linalg import DEFAULT_TOLERANCE, commutator_norm
from synaptic.utils import once

GOLDEN_DIR = path.join(path.dirname(__file__), "golden")
R3_GOLDEN = path.join(GOLDEN_DIR, "r3_example.json")

# Comparison tolerance for golden values
GOLDEN_ATOL = 1e-9


def r3_pair():
    p = Projection.from_basis(np.ones((3, 1)) / np.sqrt(3))
    e = Effect(np.diag([0.25, 0.5, 0.75]))
    return p, e


def example_summary(p, e, tol=DEFAULT_TOLERANCE):
    """Everything the example report prints, as a JSON-ready dictionary."""
    d = cbs_decompose(p, e, tol)
    report = inequality_chain(p, e, tol, d)
    resolution = spectral_resolution(e, tol)
    record = inf_with_atom_complement(p, e, tol)
    return {
        "p": p,
        "e": e,
        "alpha": atom_mean(p, e, tol),
        "beta": atom_structure(p, e, tol, d).beta,
        "commutator": report.r,
        "b_carrier": report.b_carrier,
        "b_carrier_rank": report.b_carrier.rank,
        "c_carrier_rank": d.c_carrier.rank,
        "s_carrier_rank": d.s_carrier.rank,
        "thresholds": list(resolution.thresholds),
        "cuts": list(resolution.cuts),
        "infimum": record.infimum,
        "infimum_trace": record.infimum.trace,
        "totally_noncompatible": report.totally_noncompatible,
        "generic_position": report.generic_position,
        "e_b_commutator_norm": commutator_norm(e, report.b_carrier),
        "reconstruction_residual": d.residuals()["reconstruction"],
    }


def example_assertions(summary):
    """Failed statements about the example; empty if all hold."""
    n = len(np.asarray(summary["e"]))
    failures = []
    if not np.allclose(summary["commutator"], np.eye(n), atol=GOLDEN_ATOL):
        failures.append("[p,e] is not the identity")
    if summary["b_carrier_rank"] != 2:
        failures.append(f"rank(b°) = {summary['b_carrier_rank']}, expected 2")
    if summary["e_b_commutator_norm"] <= 1e-3:
        failures.append("e commutes with b°")
    if abs(summary["alpha"] - 0.5) > 1e-12:
        failures.append(f"α = {summary['alpha']!r}, expected 0.5")
    if summary["reconstruction_residual"] > 1e-10:
        failures.append("CBS reconstruction residual exceeds 1e-10")
    return failures


@once
def _default_golden():
    return serialize.load(R3_GOLDEN)


def load_golden(filename=None):
    if filename is None:
        return _default_golden()
    return serialize.load(filename)


def _mismatch(key, value, expected, atol):
    value = serialize.prepare(value)
    if isinstance(expected, bool) or isinstance(expected, str):
        return None if value == expected else f"{key}: {value!r} != {expected!r}"
    try:
        value = np.asarray(value, dtype=float)
        expected = np.asarray(expected, dtype=float)
    except (TypeError, ValueError):
        return f"{key}: cannot compare {value!r} with {expected!r}"
    if value.shape != expected.shape:
        return f"{key}: shape {value.shape} != {expected.shape}"
    if not np.allclose(value, expected, rtol=0, atol=atol):
        return f"{key}: differs by {np.max(np.abs(value - expected)):.3e}"
    return None


def compare_with_golden(summary, golden, atol=GOLDEN_ATOL):
    """Mismatch messages for every golden key the summary disagrees with."""
    mismatches = []
    for key, expected in golden.items():
        if key not in summary:
            mismatches.append(f"{key}: missing")
            continue
        message = _mismatch(key, summary[key], expected, atol)
        if message:
            mismatches.append(message)
    return mismatches
