import itertools

import numpy as np
import pytest

from protoqubo import (
    CapacityError,
    InputError,
    QbpInstance,
    QuboInstance,
    SaSchedule,
    Selection,
    export_qubo,
    qbp_energy,
    qbp_to_qubo,
    qubo_energy,
    solve_constrained_exhaustive,
    solve_exhaustive,
    solve_sa,
    sufficient_penalty,
)


def brute_force_qubo(Q):
    """Independent oracle: direct scan of all assignments in integer order."""
    n = Q.shape[0]
    best_z, best_e = None, np.inf
    for bits in itertools.product((0, 1), repeat=n):
        z = np.array(bits[::-1], dtype=float)  # bit 0 least significant
        e = float(z @ Q @ z)
        if e < best_e:
            best_e, best_z = e, z.astype(int)
    return best_z, best_e


def random_symmetric(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) * scale
    return (a + a.T) / 2.0


class TestEnergies:
    def test_qubo_energy_hand_values(self):
        q = QuboInstance(np.array([[-1.0, 1.0], [1.0, -1.0]]))
        assert qubo_energy(q, Selection(np.array([0, 0]))) == 0.0
        assert qubo_energy(q, Selection(np.array([1, 0]))) == -1.0
        assert qubo_energy(q, Selection(np.array([1, 1]))) == 0.0

    def test_qbp_energy_hand_values(self):
        p = QbpInstance(np.array([[0.0, -1.0], [-1.0, 0.0]]), np.array([1.0, 1.0]), 1)
        assert qbp_energy(p, Selection(np.array([0, 0]))) == 0.0
        assert qbp_energy(p, Selection(np.array([1, 1]))) == 0.0
        p2 = QbpInstance(np.eye(2), np.zeros(2), 1)
        assert qbp_energy(p2, Selection(np.array([0, 1]))) == 1.0

    def test_dimension_mismatch(self):
        q = QuboInstance(np.eye(2))
        with pytest.raises(InputError):
            qubo_energy(q, Selection(np.array([1, 0, 0])))

    def test_selection_validation(self):
        with pytest.raises(InputError):
            Selection(np.array([0, 2]))
        sel = Selection.from_indices(4, [3, 1])
        np.testing.assert_array_equal(sel.indicator, [0, 1, 0, 1])
        np.testing.assert_array_equal(sel.indices, [1, 3])
        with pytest.raises(InputError):
            Selection.from_indices(2, [2])

    def test_instance_validation(self):
        with pytest.raises(InputError):
            QuboInstance(np.array([[0.0, 1.0], [0.0, 0.0]]))
        with pytest.raises(InputError):
            QbpInstance(np.zeros((2, 2)), np.zeros(2), 0)
        with pytest.raises(InputError):
            QbpInstance(np.zeros((2, 2)), np.zeros(3), 1)


class TestPenaltyFold:
    def test_hand_values(self):
        p = QbpInstance(np.zeros((2, 2)), np.zeros(2), 1)
        np.testing.assert_array_equal(
            qbp_to_qubo(p, 1.0).matrix, np.array([[-1.0, 1.0], [1.0, -1.0]])
        )
        d = np.array([[0.0, 1.0], [1.0, 0.0]])
        p2 = QbpInstance(-d, d.sum(axis=1), 1)  # gamma = 1
        np.testing.assert_array_equal(
            qbp_to_qubo(p2, 2.0).matrix, np.array([[-1.0, 1.0], [1.0, -1.0]])
        )

    def test_lambda_must_be_positive(self):
        p = QbpInstance(np.zeros((2, 2)), np.zeros(2), 1)
        with pytest.raises(InputError):
            qbp_to_qubo(p, 0.0)

    def test_penalty_identity_on_all_assignments(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            n = int(rng.integers(1, 7))
            p = QbpInstance(random_symmetric(rng, n), rng.normal(size=n),
                            int(rng.integers(1, n + 1)))
            lam = float(rng.uniform(0.1, 10.0))
            q = qbp_to_qubo(p, lam)
            for bits in itertools.product((0, 1), repeat=n):
                sel = Selection(np.array(bits))
                card = sum(bits)
                expected = qbp_energy(p, sel) + lam * ((card - p.k) ** 2 - p.k**2)
                assert qubo_energy(q, sel) == pytest.approx(expected, abs=1e-9)

    def test_penalty_vanishes_on_feasible_set_up_to_constant(self):
        rng = np.random.default_rng(22)
        p = QbpInstance(random_symmetric(rng, 5), rng.normal(size=5), 2)
        lam = 3.0
        q = qbp_to_qubo(p, lam)
        for idx in itertools.combinations(range(5), 2):
            sel = Selection.from_indices(5, idx)
            assert qubo_energy(q, sel) - qbp_energy(p, sel) == pytest.approx(
                -lam * p.k**2, abs=1e-9
            )


class TestSufficientPenalty:
    def test_hand_values(self):
        assert sufficient_penalty(QbpInstance(np.zeros((2, 2)), np.zeros(2), 1)) == 1.0
        p = QbpInstance(np.array([[0.0, 1.0], [1.0, 0.0]]), np.array([1.0, 1.0]), 1)
        assert sufficient_penalty(p) == 5.0
        d = np.array([[0.0, 1.0], [1.0, 0.0]])
        med = QbpInstance(-d, d.sum(axis=1), 1)
        assert sufficient_penalty(med) == 5.0

    def test_penalized_optimum_is_feasible_and_matches_constrained(self):
        rng = np.random.default_rng(23)
        for _ in range(30):
            n = int(rng.integers(2, 13))
            k = int(rng.integers(1, n + 1))
            p = QbpInstance(random_symmetric(rng, n), rng.normal(size=n), k)
            rep_q = solve_exhaustive(qbp_to_qubo(p, sufficient_penalty(p)))
            assert rep_q.best.size == k
            rep_c = solve_constrained_exhaustive(p)
            assert qbp_energy(p, rep_q.best) == pytest.approx(rep_c.objective, abs=1e-9)
            np.testing.assert_array_equal(rep_q.best.indicator, rep_c.best.indicator)


class TestExhaustive:
    def test_hand_values_and_tie_break(self):
        rep = solve_exhaustive(QuboInstance(np.array([[-1.0, 1.0], [1.0, -1.0]])))
        np.testing.assert_array_equal(rep.best.indicator, [1, 0])  # 01 beats 10
        assert rep.objective == -1.0
        rep_i = solve_exhaustive(QuboInstance(np.eye(4)))
        assert rep_i.objective == 0.0 and rep_i.best.size == 0
        rep_neg = solve_exhaustive(QuboInstance(-np.eye(3)))
        np.testing.assert_array_equal(rep_neg.best.indicator, [1, 1, 1])
        assert rep_neg.objective == -3.0

    def test_capacity_cap(self):
        with pytest.raises(CapacityError):
            solve_exhaustive(QuboInstance(np.eye(25)))

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(24)
        for _ in range(15):
            n = int(rng.integers(1, 9))
            Q = random_symmetric(rng, n)
            rep = solve_exhaustive(QuboInstance(Q))
            z, e = brute_force_qubo(Q)
            assert rep.objective == pytest.approx(e, abs=1e-9)
            np.testing.assert_array_equal(rep.best.indicator, z)

    def test_report_objective_reevaluates(self):
        rng = np.random.default_rng(25)
        Q = random_symmetric(rng, 10)
        q = QuboInstance(Q)
        rep = solve_exhaustive(q)
        assert rep.objective == qubo_energy(q, rep.best)
        assert rep.stats.evaluations == 1 << 10


class TestConstrainedExhaustive:
    def test_hand_values(self):
        rep = solve_constrained_exhaustive(
            QbpInstance(np.zeros((2, 2)), np.array([3.0, 1.0]), 1)
        )
        np.testing.assert_array_equal(rep.best.indicator, [0, 1])
        assert rep.objective == 1.0 and rep.feasible

        rep_all = solve_constrained_exhaustive(QbpInstance(np.eye(3), np.ones(3), 3))
        np.testing.assert_array_equal(rep_all.best.indicator, [1, 1, 1])

        d = np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]])
        med = QbpInstance(-d, 2.0 * d.sum(axis=1), 1)
        rep_med = solve_constrained_exhaustive(med)
        np.testing.assert_array_equal(rep_med.best.indices, [1])
        assert rep_med.objective == 4.0

    def test_tie_break_is_little_endian_integer_order(self):
        # {0,3} and {1,2} tie at -2; {1,2} (int 6) must beat {0,3} (int 9).
        a = np.zeros((4, 4))
        a[0, 3] = a[3, 0] = a[1, 2] = a[2, 1] = -1.0
        rep = solve_constrained_exhaustive(QbpInstance(a, np.zeros(4), 2))
        assert rep.objective == -2.0
        np.testing.assert_array_equal(rep.best.indices, [1, 2])

    def test_capacity_cap(self):
        with pytest.raises(CapacityError):
            solve_constrained_exhaustive(QbpInstance(np.eye(40), np.zeros(40), 20))

    def test_matches_feasible_brute_force(self):
        rng = np.random.default_rng(26)
        for _ in range(10):
            n = int(rng.integers(2, 10))
            k = int(rng.integers(1, n + 1))
            p = QbpInstance(random_symmetric(rng, n), rng.normal(size=n), k)
            rep = solve_constrained_exhaustive(p)
            best_e = min(
                qbp_energy(p, Selection.from_indices(n, idx))
                for idx in itertools.combinations(range(n), k)
            )
            assert rep.objective == pytest.approx(best_e, abs=1e-9)
            assert rep.best.size == k


class TestSimulatedAnnealing:
    def test_flat_landscape(self):
        rep = solve_sa(QuboInstance(np.zeros((4, 4))), SaSchedule(sweeps=10, restarts=1), seed=0)
        assert rep.objective == 0.0

    def test_finds_small_optimum(self):
        rep = solve_sa(QuboInstance(np.array([[-1.0, 1.0], [1.0, -1.0]])), seed=0)
        assert rep.objective == -1.0

    def test_deterministic_given_seed_and_schedule(self):
        rng = np.random.default_rng(27)
        q = QuboInstance(random_symmetric(rng, 8))
        sched = SaSchedule(sweeps=60, restarts=3)
        r1 = solve_sa(q, sched, seed=5)
        r2 = solve_sa(q, sched, seed=5)
        np.testing.assert_array_equal(r1.best.indicator, r2.best.indicator)
        assert r1.objective == r2.objective
        assert r1.stats.evaluations == r2.stats.evaluations == 3 * 60 * 8

    def test_objective_reevaluates_against_instance(self):
        rng = np.random.default_rng(28)
        for seed in range(5):
            q = QuboInstance(random_symmetric(rng, 10))
            rep = solve_sa(q, SaSchedule(sweeps=100, restarts=2), seed=seed)
            assert rep.objective == qubo_energy(q, rep.best)

    def test_matches_exhaustive_on_most_small_instances(self):
        rng = np.random.default_rng(29)
        hits = 0
        for i in range(20):
            q = QuboInstance(random_symmetric(rng, 10))
            opt = solve_exhaustive(q).objective
            got = solve_sa(q, seed=i).objective
            assert got >= opt - 1e-9
            hits += got == pytest.approx(opt, abs=1e-9)
        assert hits >= 18

    def test_invalid_schedule(self):
        with pytest.raises(InputError):
            SaSchedule(t_start=1.0, t_end=1.0)
        with pytest.raises(InputError):
            SaSchedule(sweeps=0)
        with pytest.raises(InputError):
            SaSchedule(restarts=0)


class TestExport:
    def parse(self, text):
        lines = text.strip().splitlines()
        n, nnz = map(int, lines[0].split())
        assert len(lines) == nnz + 1
        upper = np.zeros((n, n))
        for line in lines[1:]:
            i, j, v = line.split()
            i, j = int(i), int(j)
            assert i <= j
            upper[i, j] = float(v)
        return n, upper

    def test_round_trip_energies(self):
        rng = np.random.default_rng(30)
        Q = random_symmetric(rng, 5)
        q = QuboInstance(Q)
        n, upper = self.parse(export_qubo(q))
        assert n == 5
        # triangular reading: E(z) = sum_{i<=j} upper[i,j] z_i z_j
        for bits in itertools.product((0, 1), repeat=5):
            z = np.array(bits, dtype=float)
            tri = float(z @ np.triu(upper) @ z)
            assert tri == pytest.approx(qubo_energy(q, Selection(np.array(bits))), abs=1e-9)

    def test_zero_entries_are_skipped(self):
        q = QuboInstance(np.diag([1.0, 0.0, -2.0]))
        text = export_qubo(q)
        assert text.splitlines()[0] == "3 2"
        assert "1 1" not in text
