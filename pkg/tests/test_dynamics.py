"""Exact dynamics: sweeps, velocity fits, verification, derivative identity."""

from __future__ import annotations

import numpy as np
import pytest

from lrlab.dynamics import (
    SimulationSweep,
    SweepPoint,
    commutator_norm_sweep,
    derivative_identity_check,
    extract_velocity,
    verify_bound,
)
from lrlab.lattice import observable_from_sites
from lrlab.models import (
    PAULI_X,
    PAULI_Z,
    build_commuting_ising,
    build_tfim,
    full_hamiltonian,
)
from lrlab.operators import (
    commutator,
    decompose,
    embed_dense,
    heisenberg_evolve,
    spectral_norm,
)


@pytest.fixture(scope="module")
def tfim5_sweep():
    model = build_tfim(5)
    op = observable_from_sites(model, (0,), PAULI_Z, "Z@0")
    oqs = [
        observable_from_sites(model, (s,), PAULI_Z, f"Z@{s}") for s in (2, 3, 4)
    ]
    times = [0.1 * k for k in range(11)]
    return model, op, oqs, commutator_norm_sweep(model, op, oqs, times)


def test_sweep_matches_direct_computation(tfim5_sweep):
    model, op, oqs, sweep = tfim5_sweep
    dims = list(model.site_dims)
    dec = decompose(full_hamiltonian(model))
    p_full = embed_dense(op.payload, op.support.sites, dims)
    for d, t in ((2, 0.5), (4, 1.0)):
        oq = next(o for o in oqs if o.support.sites == (d,))
        q_full = embed_dense(oq.payload, oq.support.sites, dims)
        a_t = heisenberg_evolve(p_full, dec, t)
        expected = spectral_norm(commutator(a_t, q_full))
        got = next(p.value for p in sweep.points if p.d == d and p.t == t)
        assert got == pytest.approx(expected, abs=1e-11)


def test_sweep_nondiagonal_oq_agrees_with_direct():
    model = build_tfim(4)
    op = observable_from_sites(model, (0,), PAULI_Z, "Z@0")
    oq = observable_from_sites(model, (3,), PAULI_X, "X@3")
    sweep = commutator_norm_sweep(model, op, [oq], [0.8])
    dims = list(model.site_dims)
    dec = decompose(full_hamiltonian(model))
    a_t = heisenberg_evolve(embed_dense(op.payload, (0,), dims), dec, 0.8)
    q_full = embed_dense(oq.payload, (3,), dims)
    expected = spectral_norm(commutator(a_t, q_full))
    assert sweep.points[0].value == pytest.approx(expected, abs=1e-11)


def test_sweep_at_zero_time_is_static_commutator(tfim5_sweep):
    model, op, oqs, sweep = tfim5_sweep
    for p in sweep.points:
        if p.t == 0.0:
            assert p.value <= 1e-12  # disjoint supports commute


def test_sweep_decays_with_distance_before_the_front(tfim5_sweep):
    model, op, oqs, sweep = tfim5_sweep
    t = 0.5
    vals = [next(p.value for p in sweep.points if p.d == d and p.t == t) for d in (2, 3, 4)]
    assert vals[0] > vals[1] > vals[2]


def test_sweep_curve_accessor(tfim5_sweep):
    model, op, oqs, sweep = tfim5_sweep
    ts, vals = sweep.curve(3)
    assert ts == sweep.times
    assert len(vals) == len(ts)
    assert all(v >= 0.0 for v in vals)


def test_dicke_cross_layer_commutator_vanishes():
    # The spin-boson chain rewrites as mutually commuting terms, so Heisenberg
    # supports freeze after one layer of terms: spins two layers apart commute
    # at all times even though the generic bounds there are finite.
    from lrlab.models import build_dicke_chain

    model = build_dicke_chain(3, truncation=3)
    op = observable_from_sites(model, (1,), PAULI_X, "X@spin0")
    near = observable_from_sites(model, (3,), PAULI_X, "X@spin1")
    far = observable_from_sites(model, (5,), PAULI_X, "X@spin2")
    sweep = commutator_norm_sweep(model, op, [near, far], (0.7, 1.9))
    near_vals = sweep.curve(2)[1]
    far_vals = sweep.curve(4)[1]
    assert min(near_vals) > 0.5
    assert max(far_vals) <= 1e-12


def test_projector_restricts_commutator():
    model = build_tfim(3)
    op = observable_from_sites(model, (0,), PAULI_Z, "Z@0")
    oq = observable_from_sites(model, (2,), PAULI_Z, "Z@2")
    keep = np.zeros(8)
    sweep = commutator_norm_sweep(model, op, [oq], [0.9], projector_diag=keep)
    assert sweep.points[0].value == 0.0


def _synthetic_sweep(v_true, ds, times):
    points = []
    for d in ds:
        for t in times:
            val = max(0.0, 0.1 * (t - d / v_true))
            points.append(SweepPoint(d=d, t=t, value=val))
    return SimulationSweep(
        model_name="synthetic",
        op_label="A",
        oq_labels=tuple(f"B{d}" for d in ds),
        separations=tuple(ds),
        times=tuple(times),
        points=tuple(points),
        hilbert_dim=0,
    )


def test_extract_velocity_recovers_linear_front():
    times = [0.05 * k for k in range(200)]
    sweep = _synthetic_sweep(2.0, (3, 4, 5, 6), times)
    est = extract_velocity(sweep, threshold=1e-3)
    assert est.v_emp == pytest.approx(2.0, rel=1e-2)
    assert len(est.crossings) == 4
    assert est.residual < 0.05


def test_extract_velocity_needs_three_crossings():
    sweep = _synthetic_sweep(2.0, (3, 4, 5), [0.1, 0.2])  # nothing crosses yet
    with pytest.raises(ValueError, match="cone not resolved"):
        extract_velocity(sweep, threshold=1e-3)


def test_verify_bound_margins_and_exclusion():
    times = [0.5, 1.0]
    sweep = _synthetic_sweep(2.0, (1, 2, 3), times)
    report = verify_bound(
        sweep, {"flat": lambda t, d: 1.0}, min_separation=1, slack=1e-9
    )
    assert report.excluded_separations == (1,)
    assert {r.d for r in report.rows} == {2, 3}
    assert report.passed
    assert report.worst_margin() <= 1.0


def test_verify_bound_scale_forces_failure():
    sweep = _synthetic_sweep(1.0, (2, 3, 4), [5.0])
    honest = verify_bound(sweep, {"flat": lambda t, d: 1.0}, min_separation=0)
    scaled = verify_bound(
        sweep, {"flat": lambda t, d: 1.0}, min_separation=0, bound_scale=1e-6
    )
    assert honest.passed
    assert not scaled.passed


def test_derivative_identity_tfim():
    model = build_tfim(5)
    err = derivative_identity_check(model, 0, 1, 1, 3, t=0.9)
    assert err <= 1e-6


def test_derivative_identity_commuting_model_vanishes():
    # Both sides are exactly zero in exact arithmetic; the central difference
    # amplifies eigenbasis roundoff by 1/(2 step), so allow that much.
    model = build_commuting_ising(4)
    err = derivative_identity_check(model, 0, 0, 0, 2, t=1.2)
    assert err <= 1e-10


def test_derivative_identity_unknown_term():
    with pytest.raises(ValueError, match="no term"):
        derivative_identity_check(build_tfim(4), 0, 99, 1, 0, t=0.1)
