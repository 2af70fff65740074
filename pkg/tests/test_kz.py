import random

import pytest

from kz_padic.kz import (
    KZInstance,
    apply_omega,
    kz_residue,
    omega,
    verify_master_identities,
    verify_solution,
)
from kz_padic.solutions import extract_solution, master_component
from kz_padic.sparsepoly import ModulusContext, Polynomial, PolyVector, z_variables


def inst513():
    return KZInstance(3, ModulusContext(5, 1))


def test_omega_entries():
    om = omega(1, 2, 3)
    assert om.rows == ((-1, 1, 0), (1, -1, 0), (0, 0, 0))
    assert omega(1, 3, 3).rows == ((-1, 0, 1), (0, 0, 0), (1, 0, -1))
    assert om.rows == omega(2, 1, 3).rows


def test_omega_row_sums_vanish():
    for n in (3, 5):
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                if i == j:
                    continue
                assert all(sum(row) == 0 for row in omega(i, j, n).rows)


def test_omega_equal_indices_rejected():
    with pytest.raises(ValueError):
        omega(2, 2, 3)


def test_apply_omega_matches_matrix():
    rng = random.Random(0)
    zv = z_variables(3)
    vec = PolyVector([
        Polynomial(zv, {(rng.randrange(3),) * 3: rng.randrange(1, 9)})
        for _ in range(3)
    ])
    for i, j in ((1, 2), (1, 3), (2, 3)):
        fast = apply_omega(vec, i, j)
        rows = omega(i, j, 3).rows
        slow = []
        for r in range(3):
            acc = Polynomial.zero(zv)
            for c in range(3):
                if rows[r][c]:
                    acc = acc + vec[c].scale(rows[r][c])
            slow.append(acc)
        assert fast == PolyVector(slow)


def test_residue_of_zero_vector():
    inst = inst513()
    zero = PolyVector.zero(3, inst.zvars)
    for i in (1, 2, 3):
        assert kz_residue(zero, i, inst).is_zero()


def test_constructed_solution_has_zero_residues():
    # independent oracle: full expansion of the master components, then slice
    inst = inst513()
    entries = []
    for j in (1, 2, 3):
        full = master_component(inst, None, j)
        entries.append(full.slice_power("x", 4))
    vec = PolyVector(entries)
    zv = inst.zvars
    z1, z2, z3 = (Polynomial.variable(v, zv) for v in zv)
    assert vec[0] == -1 * (z1 + 2 * z2 + 2 * z3)
    assert vec[1] == -1 * (2 * z1 + z2 + 2 * z3)
    assert vec[2] == -1 * (2 * z1 + 2 * z2 + z3)
    for i in (1, 2, 3):
        assert kz_residue(vec, i, inst).is_zero()
    assert vec.sum_entries().reduce_mod(5).is_zero()


def test_constant_vector_fails_only_the_sum_condition():
    # the interaction matrices kill constant vectors, so the differential
    # residuals vanish; the algebraic constraint is what rejects (1,1,1)
    inst = inst513()
    ones = PolyVector([Polynomial.one(inst.zvars)] * 3)
    check = verify_solution(ones, inst)
    assert all(check.equations)
    assert not check.sum_ok
    assert not check.passed
    assert check.first_failure.equation == "sum"


def test_non_solution_has_nonzero_residual():
    inst = inst513()
    zv = inst.zvars
    z1 = Polynomial.variable("z1", zv)
    vec = PolyVector([z1, -1 * z1, Polynomial.zero(zv)])
    check = verify_solution(vec, inst)
    assert check.sum_ok
    assert not all(check.equations)
    assert check.first_failure is not None
    assert not check.passed


def test_tampered_solution_detected():
    inst = inst513()
    rec = extract_solution(inst)
    terms = dict(rec.vector[0].terms)
    mono = next(iter(terms))
    terms[mono] += 1
    tampered = PolyVector([Polynomial(inst.zvars, terms), rec.vector[1], rec.vector[2]])
    check = verify_solution(tampered, inst)
    assert not check.passed
    assert check.first_failure is not None


def test_scaled_lower_level_solution_verifies():
    # p^(s-t) I at level t stays a solution mod p^s
    inst = KZInstance(3, ModulusContext(5, 2))
    low = extract_solution(inst.level(1), None, 1, 1)
    scaled = low.vector.scale(5)
    assert verify_solution(scaled, inst).passed


def test_quasi_constant_multiple_verifies():
    inst = KZInstance(3, ModulusContext(5, 2))
    rec = extract_solution(inst)
    f = Polynomial.variable("z1", inst.zvars) ** 25
    assert verify_solution(rec.vector.scale(f), inst).passed


def test_linear_combination_verifies():
    inst = inst513()
    rec = extract_solution(inst)
    combo = rec.vector.scale(3) + rec.vector.scale(Polynomial.variable("z2", inst.zvars) ** 5)
    assert verify_solution(combo, inst).passed


def test_workers_do_not_change_the_answer():
    inst = KZInstance(3, ModulusContext(5, 2))
    rec = extract_solution(inst)
    seq = verify_solution(rec.vector, inst, workers=1)
    par = verify_solution(rec.vector, inst, workers=3)
    assert seq.to_json() == par.to_json()


@pytest.mark.parametrize("p,s,n,mvec", [
    (5, 1, 3, (2, 2, 2)),
    (7, 1, 3, (3, 3, 3)),
    (5, 2, 3, (12, 12, 37)),
    (5, 1, 5, (2, 2, 2, 2, 7)),
])
def test_master_identities(p, s, n, mvec):
    inst = KZInstance(n, ModulusContext(p, s))
    check = verify_master_identities(inst, mvec)
    assert check.derivative_sum_exact
    assert check.derivative_sum_mod
    assert all(check.vector_identities)
    assert check.passed


def test_worker_resolution(monkeypatch):
    from kz_padic.kz import resolve_workers

    monkeypatch.setenv("KZ_PADIC_WORKERS", "3")
    assert resolve_workers(None) == 3
    assert resolve_workers(2) == 2
    monkeypatch.delenv("KZ_PADIC_WORKERS")
    assert resolve_workers(None) >= 1


def test_instance_validation():
    with pytest.raises(ValueError):
        KZInstance(4, ModulusContext(5, 1))
    with pytest.raises(ValueError):
        KZInstance(7, ModulusContext(5, 1))  # p < n
    KZInstance(5, ModulusContext(5, 1))      # p = n is allowed
