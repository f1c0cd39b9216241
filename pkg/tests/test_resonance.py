"""Class-based non-resonance checker against the brute-force mode-level oracle."""

import math

import numpy as np
import pytest

from torusnls import Grid, build_frequency_table, cfl_max_h, check_assumption2

from resonance_oracle import canonical_witness, oracle_violations


def _table_if_clean(h, rho, lam, K):
    grid = Grid(K=K, d=1)
    table = build_frequency_table(h, rho, lam, (0,), grid)
    origin = grid.index_of((0,))
    ok = np.ones(grid.shape, dtype=bool)
    ok[origin] = False
    if not bool(np.all(table.omega_status[ok] == "ok")):
        return None
    return table


def _compare(table, N, c2, delta2, s2):
    oracle_holds, oracle_set = oracle_violations(table, N, c2, delta2, s2)
    full = check_assumption2(table, N=N, c2=c2, delta2=delta2, s2=s2, exhaustive=True)
    assert full.holds == oracle_holds
    assert {canonical_witness(w) for w in full.witnesses} == oracle_set
    short = check_assumption2(table, N=N, c2=c2, delta2=delta2, s2=s2)
    assert short.holds == oracle_holds
    if not short.holds:
        assert canonical_witness(short.witnesses[0]) in oracle_set
    return oracle_holds


def test_checker_matches_oracle_under_cfl():
    # CFL step sizes with 1 + 2*lam*rho^2 > 0 keep every mode stable, so the
    # checker runs on clean tables
    rng = np.random.default_rng(8)
    for K in (2, 3):
        for N in (2, 3):
            for _ in range(3):
                lam = int(rng.choice([-1, 1]))
                rho_top = math.sqrt(0.5) * 0.99 if lam == -1 else 1.0
                rho = float(rng.uniform(0.1, rho_top))
                h = float(rng.uniform(0.2, 1.0)) * cfl_max_h(1, K, rho, N)
                table = _table_if_clean(h, rho, lam, K)
                assert table is not None
                _compare(table, N, 8.0, 0.1, 5.0 * N)


def test_checker_matches_oracle_with_violations():
    # larger steps leave the certified regime, so violating combinations
    # actually occur and both enumerations must flag the same ones
    rng = np.random.default_rng(9)
    seen_violation = False
    for _ in range(40):
        K = int(rng.choice([2, 3]))
        N = int(rng.choice([2, 3]))
        rho = float(rng.uniform(0.1, 1.2))
        h = float(rng.uniform(0.5, 4.0)) * cfl_max_h(1, K, rho, N)
        lam = int(rng.choice([-1, 1]))
        table = _table_if_clean(h, rho, lam, K)
        if table is None:
            continue
        # a permissive bound with a heavy tail makes lhs > rhs reachable
        holds = _compare(table, N, 0.05, 0.5, 10.0 * N)
        seen_violation = seen_violation or not holds
    assert seen_violation


def test_oracle_counts_class_aggregation(grid2):
    # +k on mode j and +k on mode -j are one class-level combination: the
    # canonical witness set must not distinguish them
    table = build_frequency_table(0.1, math.sqrt(0.4), -1, (0,), grid2)
    _, found = oracle_violations(table, 2, 1e-12, 1e-12, 10.0)
    assert found == set()  # nothing violates with an unreachable threshold
    full = check_assumption2(table, N=2, c2=8.0, delta2=0.1, s2=10.0, exhaustive=True)
    assert full.holds
