"""Per-mode linearized analysis: coupling index, propagation matrix,
stability margin, frequencies, CFL bound, and the non-resonance checker."""

import dataclasses
import json
import math

import numpy as np
import pytest

from torusnls import (
    DegenerateSignError,
    DomainError,
    Grid,
    NegativeDiscriminantError,
    UnstableModeError,
    build_frequency_table,
    cfl_max_h,
    check_assumption1,
    check_assumption2,
    growth_factor,
    mode_matrix,
    mu,
    n_of_j,
    omega,
    varpi,
)

RHO = math.sqrt(0.4)


def test_n_of_j_zero_carrier(grid16):
    assert n_of_j((3,), (0,), grid16) == 9
    assert n_of_j((-16,), (0,), grid16) == 256


def test_n_of_j_hand_value_with_wrap(grid2):
    # ell=1, j=1: ell+j = 2 wraps to -2, so n = (4 + 0)/2 - 1 = 1
    assert n_of_j((1,), (1,), grid2) == 1
    # ell=1, j=-2: both ell+j and ell-j wrap to modulus 1, n = 1 - 1 = 0
    assert n_of_j((-2,), (1,), grid2) == 0


def test_n_of_j_symmetry(grid16, rng):
    ell = (3,)
    for _ in range(20):
        j = (int(rng.integers(-16, 16)),)
        if j == (0,):
            continue
        assert n_of_j(j, ell, grid16) == n_of_j(tuple(-c for c in j), ell, grid16)


def test_n_of_j_reduces_inputs(grid16):
    assert n_of_j((17,), (0,), grid16) == n_of_j((-15,), (0,), grid16)


def test_n_of_j_origin_rejected(grid16):
    with pytest.raises(DomainError):
        n_of_j((0,), (0,), grid16)
    with pytest.raises(DomainError):
        n_of_j((32,), (0,), grid16)


def test_mode_matrix_reference_values(grid16):
    a, b = mode_matrix((1,), (0,), 0.04, RHO, -1, grid16)
    assert a == pytest.approx(0.9998399360079641 - 0.024002132480058513j, rel=1e-13)
    assert b == pytest.approx(0.0006398293469861466 + 0.015987201706575648j, rel=1e-13)


def test_mode_matrix_norm_invariant(grid16, rng):
    for _ in range(30):
        j = (int(rng.integers(-16, 16)),)
        if j == (0,):
            continue
        h = float(rng.uniform(0.001, 0.2))
        rho = float(rng.uniform(0.0, 1.5))
        lam = int(rng.choice([-1, 1]))
        a, b = mode_matrix(j, (0,), h, rho, lam, grid16)
        assert abs(a) ** 2 - abs(b) ** 2 == pytest.approx(1.0, abs=1e-13)


def test_mode_matrix_zero_amplitude(grid16):
    a, b = mode_matrix((2,), (0,), 0.1, 0.0, -1, grid16)
    assert a == pytest.approx(complex(math.cos(0.4), -math.sin(0.4)), rel=1e-14)
    assert b == 0.0


def test_assumption1_reference_margins(grid16):
    r = check_assumption1(0.04, RHO, -1, (0,), grid16)
    assert r.holds
    assert r.c1_certified == pytest.approx(0.20006397724398051, rel=1e-12)
    assert r.worst_j == (-1,)

    r = check_assumption1(0.044, RHO, -1, (0,), grid16)
    assert r.holds
    assert r.c1_certified == pytest.approx(0.20007740668266422, rel=1e-12)

    r = check_assumption1(0.042, RHO, -1, (0,), grid16)
    assert not r.holds
    assert r.c1_certified == pytest.approx(-0.11976433456211927, rel=1e-12)
    assert r.worst_j == (-15,)


def test_assumption1_report_serialization(grid16):
    r = check_assumption1(0.04, RHO, -1, (0,), grid16)
    doc = json.loads(r.to_json())
    assert doc["holds"] is True
    assert doc["worst_j"] == [-1]
    assert doc["c1_certified"] == r.c1_certified


def test_omega_is_eigenvalue_phase(grid16, rng):
    # e^{-i omega h} must be an eigenvalue of the propagation block
    checked = 0
    for _ in range(60):
        j = (int(rng.integers(-16, 16)),)
        if j == (0,):
            continue
        h = float(rng.uniform(0.005, 0.05))
        rho = float(rng.uniform(0.1, 0.8))
        lam = int(rng.choice([-1, 1]))
        try:
            w = omega(j, (0,), h, rho, lam, grid16)
        except UnstableModeError:
            continue
        a, b = mode_matrix(j, (0,), h, rho, lam, grid16)
        eig = np.linalg.eigvals(np.array([[a, b], [np.conj(b), np.conj(a)]]))
        assert min(abs(eig - np.exp(-1j * w * h))) < 1e-12
        checked += 1
    assert checked >= 20


def test_omega_even_at_zero_carrier(grid16):
    w1 = omega((4,), (0,), 0.04, RHO, -1, grid16)
    w2 = omega((-4,), (0,), 0.04, RHO, -1, grid16)
    assert w1 == w2


def test_omega_unstable_mode_rejected(grid16):
    with pytest.raises(UnstableModeError):
        omega((-15,), (0,), 0.042, RHO, -1, grid16)


def test_omega_degenerate_sign_rejected(grid2):
    # aliasing makes n vanish at j=-2 for ell=1; with rho=0 the branch
    # selector sin(nh) + h*lam*rho^2*cos(nh) is exactly zero
    with pytest.raises(DegenerateSignError):
        omega((-2,), (1,), 0.1, 0.0, -1, grid2)


def test_growth_factor(grid16):
    assert growth_factor((1,), (0,), 0.04, RHO, -1, grid16) == 1.0
    g = growth_factor((-15,), (0,), 0.042, RHO, -1, grid16)
    assert g == pytest.approx(1.0146405598691435, rel=1e-12)
    assert g > 1.0


def test_cfl_reference_value():
    assert cfl_max_h(1, 16, RHO, 2) == pytest.approx(0.0040778720840989, rel=1e-12)


def test_cfl_monotonic():
    assert cfl_max_h(1, 16, RHO, 3) < cfl_max_h(1, 16, RHO, 2)
    assert cfl_max_h(1, 32, RHO, 2) < cfl_max_h(1, 16, RHO, 2)
    assert cfl_max_h(2, 16, RHO, 2) < cfl_max_h(1, 16, RHO, 2)


def test_cfl_validation():
    with pytest.raises(DomainError):
        cfl_max_h(0, 16, RHO, 2)
    with pytest.raises(DomainError):
        cfl_max_h(1, 0, RHO, 2)
    with pytest.raises(DomainError):
        cfl_max_h(1, 16, RHO, 1)


def test_mu_value_and_lower_bound():
    assert mu(9, 0.04) == pytest.approx(9.410071291050674, rel=1e-13)
    # tan x >= x on (0, pi/2) makes mu_n >= n
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = int(rng.integers(1, 40))
        h = float(rng.uniform(1e-4, (math.pi / 2) / n * 0.999))
        assert mu(n, h) >= n


def test_mu_domain():
    with pytest.raises(DomainError):
        mu(0, 0.1)
    with pytest.raises(DomainError):
        mu(-3, 0.1)
    with pytest.raises(DomainError):
        mu(16, 0.1)  # n*h = 1.6 > pi/2
    with pytest.raises(DomainError):
        mu(1, 0.0)


def test_varpi_values(grid2, grid16):
    assert varpi((1,), 0.1, 0.0, -1, grid2) == pytest.approx(1.0, rel=1e-13)
    assert varpi((1,), 0.1, 0.4, -1, grid2) == pytest.approx(
        0.44834705325123153, rel=1e-12
    )
    assert varpi((1,), 0.04, 0.4, -1, grid16) == pytest.approx(
        0.4473956662746935, rel=1e-12
    )


def test_varpi_domain(grid2, grid16):
    with pytest.raises(DomainError):
        varpi((0,), 0.1, 0.4, -1, grid2)
    with pytest.raises(DomainError):
        varpi((7,), 0.04, 0.4, -1, grid16)  # n*h = 1.96 outside the tan branch
    with pytest.raises(NegativeDiscriminantError):
        varpi((1,), 0.1, 1.0, -1, grid2)  # mu < 2*sigma makes the radicand negative


def test_frequency_table_entries_match_scalars(grid16):
    t = build_frequency_table(0.04, RHO, -1, (0,), grid16)
    for j in ((1,), (-7,), (12,), (-16,)):
        e = t.entry(j)
        a, b = mode_matrix(j, (0,), 0.04, RHO, -1, grid16)
        assert e.n == n_of_j(j, (0,), grid16)
        assert e.alpha == pytest.approx(a, rel=1e-14)
        assert e.beta == pytest.approx(b, rel=1e-14)
        assert e.omega == pytest.approx(omega(j, (0,), 0.04, RHO, -1, grid16), rel=1e-14)
        assert e.growth == growth_factor(j, (0,), 0.04, RHO, -1, grid16)
        assert e.status == "ok"


def test_frequency_table_statuses_and_growth(grid16):
    t = build_frequency_table(0.042, RHO, -1, (0,), grid16)
    statuses = dict(zip(*np.unique(t.omega_status, return_counts=True)))
    assert int(statuses["unstable"]) == 2
    assert int(statuses["excluded"]) == 1
    assert t.entry((-15,)).status == "unstable"
    assert math.isnan(t.entry((-15,)).omega)
    assert t.max_growth() == pytest.approx(1.0146405598691435, rel=1e-12)


def test_frequency_table_omega_even(grid16):
    t = build_frequency_table(0.04, RHO, -1, (0,), grid16)
    for j in ((1,), (5,), (11,)):
        assert t.entry(j).omega == t.entry(tuple(-c for c in j)).omega


def test_frequency_table_eps_hat(grid2, grid16):
    # varpi leaves the tan branch for |j|^2 >= 40 at h=0.04, so no certificate
    assert build_frequency_table(0.04, RHO, -1, (0,), grid16).eps_hat is None
    # zero amplitude: omega and varpi both collapse to |j|^2
    t0 = build_frequency_table(0.1, 0.0, -1, (0,), grid2)
    assert t0.eps_hat is not None and t0.eps_hat <= 1e-12
    t = build_frequency_table(0.1, RHO, -1, (0,), grid2)
    assert t.eps_hat == pytest.approx(0.000537807860752082, rel=1e-10)


def test_frequency_table_immutable(grid2):
    t = build_frequency_table(0.1, RHO, -1, (0,), grid2)
    with pytest.raises(ValueError):
        t.omega[0] = 0.0


def test_assumption2_small_reference(grid16):
    t = build_frequency_table(0.04, RHO, -1, (0,), grid16)
    r = check_assumption2(t, N=3, c2=8.0, delta2=0.1, s2=15.0)
    assert r.holds
    assert r.n_vectors == 50048
    assert r.n_small_divisors == 136
    assert r.tightest is not None
    assert r.tightest.delta == pytest.approx(0.01493905579617283, rel=1e-12)
    assert r.tightest.lhs == pytest.approx(3.361111111111111, rel=1e-12)
    assert r.tightest.rhs == pytest.approx(3.4510767419995374, rel=1e-12)
    assert r.freq_source == "omega"
    assert r.part_a_ok and r.part_b_ok and r.part_c_verdict


def test_assumption2_no_small_divisors(grid16):
    t = build_frequency_table(0.04, RHO, -1, (0,), grid16)
    r = check_assumption2(t, N=2, c2=8.0, delta2=0.1, s2=10.0)
    assert r.holds
    assert r.n_vectors == 6016
    assert r.n_small_divisors == 0
    assert r.tightest is None


def test_assumption2_varpi_routing(grid2, grid16):
    tv = build_frequency_table(0.1, RHO, -1, (0,), grid2)
    r = check_assumption2(tv, N=2, c2=8.0, delta2=0.1, s2=10.0, eps_hat=1.0)
    assert r.freq_source == "varpi"
    assert r.part_a_ok and r.holds
    # a bound tighter than the certified deviation fails part (a)
    r2 = check_assumption2(tv, N=2, c2=8.0, delta2=0.1, s2=10.0, eps_hat=1e-6)
    assert not r2.part_a_ok and not r2.holds
    # incomplete modified frequencies cannot back a varpi-based check
    t16 = build_frequency_table(0.04, RHO, -1, (0,), grid16)
    with pytest.raises(DomainError):
        check_assumption2(t16, N=2, c2=8.0, delta2=0.1, s2=10.0, eps_hat=1.0)


def test_assumption2_rejects_flagged_tables(grid16):
    t = build_frequency_table(0.042, RHO, -1, (0,), grid16)
    with pytest.raises(DomainError):
        check_assumption2(t, N=2, c2=8.0, delta2=0.1, s2=10.0)


def test_assumption2_parameter_validation(grid2):
    t = build_frequency_table(0.1, RHO, -1, (0,), grid2)
    with pytest.raises(DomainError):
        check_assumption2(t, N=0, c2=8.0, delta2=0.1, s2=5.0)
    with pytest.raises(DomainError):
        check_assumption2(t, N=2, c2=0.0, delta2=0.1, s2=5.0)
    with pytest.raises(DomainError):
        check_assumption2(t, N=2, c2=8.0, delta2=0.1, s2=5.0, eps_hat=-1.0)


def test_assumption2_complete_resonance():
    # force h * omega onto a multiple of 2*pi: every combination is resonant
    g = Grid(K=1, d=1)
    base = build_frequency_table(1.0, 0.5, 1, (0,), g)
    t = dataclasses.replace(base, omega=np.array([2.0 * math.pi, np.nan]))
    r = check_assumption2(t, N=1, c2=8.0, delta2=0.1, s2=5.0)
    assert not r.holds
    assert not r.part_c_verdict
    assert len(r.witnesses) == 1
    assert r.witnesses[0].kind == "complete-resonance"
    assert r.witnesses[0].k == (((-1,), 1),)
    assert math.isnan(r.witnesses[0].rhs)

    rx = check_assumption2(t, N=1, c2=8.0, delta2=0.1, s2=5.0, exhaustive=True)
    assert rx.n_vectors == 4
    assert rx.n_violations == 8
    assert {w.kind for w in rx.witnesses} == {"complete-resonance", "small-divisor"}


def test_assumption2_report_serialization(grid16):
    t = build_frequency_table(0.04, RHO, -1, (0,), grid16)
    r = check_assumption2(t, N=3, c2=8.0, delta2=0.1, s2=15.0)
    doc = json.loads(r.to_json())
    assert doc["holds"] is True
    assert doc["n_vectors"] == r.n_vectors
    assert doc["tightest"]["delta"] == r.tightest.delta
    assert isinstance(doc["header"], str) and doc["header"]
