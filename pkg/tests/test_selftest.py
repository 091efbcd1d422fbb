import numpy as np

from gradchain.selftest import check_force_equivalence, run_all
from gradchain.synthesis import assemble_stiffness


def test_run_all_pristine_passes():
    report = run_all(seed=0)
    assert report.ok
    names = [r.name for r in report.results]
    assert len(names) == 10
    assert "force_equivalence" in names and "quadratic_reduction" in names
    for r in report.results:
        assert np.isfinite(r.worst)


def test_suites_are_seed_deterministic():
    a = check_force_equivalence(np.random.default_rng(7), trials=80)
    b = check_force_equivalence(np.random.default_rng(7), trials=80)
    assert a.worst == b.worst and a.ok == b.ok


def _flipped_assemble(A, eps, N, bc):
    net = assemble_stiffness(A, eps, N, bc)
    net.band[1] = -net.band[1]
    return net


def test_sign_flip_in_assembly_trips_force_equivalence():
    res = check_force_equivalence(np.random.default_rng(0), trials=80,
                                  assemble_fn=_flipped_assemble)
    assert not res.ok
    report = run_all(seed=0, assemble_fn=_flipped_assemble)
    assert not report.ok
    failed = [r.name for r in report.results if not r.ok]
    assert failed == ["force_equivalence"]
