import json
import math

import numpy as np
import pytest

from corrsched.model import (
    Assignment,
    JointActivationMatrix,
    NetworkConfig,
    ParseError,
    ScheduleMatrix,
    ShapeError,
    ValidationError,
    assignment_from_csv,
    assignment_to_csv,
    assignment_to_schedule,
    is_hard,
    load_assignment,
    load_matrix,
    load_schedule,
    matrix_from_csv,
    matrix_from_json,
    matrix_to_csv,
    matrix_to_json,
    save_assignment,
    save_matrix,
    save_schedule,
    schedule_to_assignment,
    validate_matrix,
    validate_schedule,
)


class TestNetworkConfig:
    def test_accepts_positive_sizes(self):
        cfg = NetworkConfig(n_devices=10, n_channels=3)
        assert cfg.n_devices == 10 and cfg.n_channels == 3

    def test_accepts_l_ge_n(self):
        NetworkConfig(n_devices=2, n_channels=5)  # optimum trivially 0, but legal

    @pytest.mark.parametrize("n,l", [(0, 1), (1, 0), (-3, 2)])
    def test_rejects_non_positive(self, n, l):
        with pytest.raises(ValidationError):
            NetworkConfig(n_devices=n, n_channels=l)


class TestValidateMatrix:
    def test_valid_2x2(self):
        assert validate_matrix([[0.3, 0.1], [0.1, 0.3]]) == []

    def test_joint_exceeding_marginal_is_one_violation(self):
        out = validate_matrix([[0.3, 0.5], [0.5, 0.3]])
        assert len(out) == 1
        assert out[0].rule == "consistency" and out[0].indices == (0, 1)

    def test_asymmetry_is_one_violation(self):
        out = validate_matrix([[0.3, 0.2], [0.1, 0.3]])
        assert len(out) == 1
        assert out[0].rule == "symmetry" and out[0].indices == (0, 1)

    def test_out_of_range_entry(self):
        out = validate_matrix([[0.3, 1.5], [1.5, 0.3]])
        assert {v.rule for v in out} >= {"range"}

    def test_nan_entry_flagged(self):
        out = validate_matrix(np.array([[0.3, math.nan], [math.nan, 0.3]]))
        assert any(v.rule == "range" for v in out)

    def test_non_square_raises(self):
        with pytest.raises(ShapeError):
            validate_matrix(np.zeros((2, 3)))

    def test_accepts_every_simulated_matrix(self):
        from corrsched.sim import ActivationModel, SimulationSpec, estimate_joint_activation, generate_layout

        for seed in (0, 1, 2):
            layout = generate_layout(6, 0.2, seed)
            a = estimate_joint_activation(
                layout, ActivationModel(3.0), SimulationSpec(2000, seed)
            )
            assert validate_matrix(a) == []


class TestScheduleBridge:
    def test_assignment_to_schedule_examples(self):
        e = assignment_to_schedule(Assignment([0, 1]), 2)
        assert e.entries.tolist() == [[1, 0], [0, 1]]
        e = assignment_to_schedule(Assignment([0, 0, 0]), 2)
        assert e.entries.tolist() == [[1, 0], [1, 0], [1, 0]]

    def test_out_of_range_channel(self):
        with pytest.raises(ValidationError, match="device 1"):
            assignment_to_schedule(Assignment([0, 3]), 2)

    def test_round_trip_100_random(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            n = int(rng.integers(1, 12))
            l = int(rng.integers(1, 5))
            x = Assignment(rng.integers(0, l, size=n))
            back = schedule_to_assignment(assignment_to_schedule(x, l))
            assert np.array_equal(back.channel_of, x.channel_of)

    def test_column_supports_partition_devices(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n, l = int(rng.integers(1, 10)), int(rng.integers(1, 5))
            e = assignment_to_schedule(Assignment(rng.integers(0, l, size=n)), l)
            supports = [set(np.flatnonzero(e.entries[:, j])) for j in range(l)]
            union = set().union(*supports)
            assert union == set(range(n))
            assert sum(len(s) for s in supports) == n  # disjoint

    def test_soft_schedule_is_not_hard(self):
        assert not is_hard(ScheduleMatrix([[0.5, 0.5]]))
        with pytest.raises(ValidationError):
            schedule_to_assignment(ScheduleMatrix([[0.5, 0.5]]))


class TestValidateSchedule:
    def test_row_sum_violation_names_row(self):
        out = validate_schedule(ScheduleMatrix([[0.5, 0.4], [0.5, 0.5]]))
        assert len(out) == 1 and out[0].rule == "row_sum" and out[0].indices == (0,)

    def test_tolerates_1e10_row_error(self):
        assert validate_schedule(ScheduleMatrix([[0.5, 0.5 + 1e-10]])) == []


class TestMatrixIO:
    def test_json_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        x = rng.random((5, 5))
        x = (x + x.T) / 2
        m = JointActivationMatrix(x)
        p = tmp_path / "m.json"
        save_matrix(m, p)
        assert np.array_equal(load_matrix(p).entries, m.entries)

    def test_csv_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(1)
        x = rng.random((4, 4))
        x = (x + x.T) / 2
        p = tmp_path / "m.csv"
        save_matrix(JointActivationMatrix(x), p)
        assert np.array_equal(load_matrix(p).entries, x)

    def test_save_load_fixed_point_on_shipped_fixture(self, data_dir):
        text = (data_dir / "fixture_n8.json").read_text()
        assert matrix_to_json(matrix_from_json(text)) == text

    def test_seventeen_significant_digits(self):
        m = JointActivationMatrix([[0.1]])
        assert "0.10000000000000001" in matrix_to_json(m)

    def test_missing_dim_field(self):
        with pytest.raises(ParseError, match="dim"):
            matrix_from_json('{"entries": [[0.1]]}')

    def test_nan_probability_rejected(self):
        with pytest.raises(ValidationError, match="not finite"):
            matrix_from_json('{"dim": 1, "entries": [[NaN]]}')

    def test_out_of_range_rejected(self):
        with pytest.raises(ValidationError, match="outside"):
            matrix_from_json('{"dim": 1, "entries": [[1.5]]}')

    def test_shape_mismatch(self):
        with pytest.raises(ParseError, match="shape"):
            matrix_from_json('{"dim": 2, "entries": [[0.1]]}')

    def test_csv_error_names_line(self):
        with pytest.raises(ParseError, match="line 2"):
            matrix_from_csv("0.1,0.2\n0.2,oops\n")

    def test_invalid_json(self):
        with pytest.raises(ParseError, match="invalid JSON"):
            matrix_from_json("{nope")


class TestAssignmentIO:
    def test_round_trip(self, tmp_path):
        a = Assignment([2, 0, 1, 1])
        p = tmp_path / "a.csv"
        save_assignment(a, p)
        assert np.array_equal(load_assignment(p).channel_of, a.channel_of)

    def test_header_required(self):
        with pytest.raises(ParseError, match="header"):
            assignment_from_csv("dev,chan\n0,1\n")

    def test_duplicate_device(self):
        with pytest.raises(ParseError, match="duplicate"):
            assignment_from_csv("device,channel\n0,1\n0,2\n")

    def test_device_set_must_be_dense(self):
        with pytest.raises(ParseError, match="exactly"):
            assignment_from_csv("device,channel\n0,0\n2,1\n")

    def test_text_format(self):
        assert assignment_to_csv(Assignment([1, 0])) == "device,channel\n0,1\n1,0\n"


class TestScheduleIO:
    def test_round_trip(self, tmp_path):
        e = ScheduleMatrix([[0.25, 0.75], [1.0, 0.0]])
        p = tmp_path / "e.json"
        save_schedule(e, p)
        assert np.array_equal(load_schedule(p).entries, e.entries)

    def test_missing_field(self, tmp_path):
        p = tmp_path / "e.json"
        p.write_text('{"rows": 1, "entries": [[1.0]]}')
        with pytest.raises(ParseError, match="cols"):
            load_schedule(p)


class TestImmutability:
    def test_arrays_are_frozen(self):
        m = JointActivationMatrix([[0.1, 0.0], [0.0, 0.1]])
        with pytest.raises(ValueError):
            m.entries[0, 0] = 0.5
        e = ScheduleMatrix([[1.0, 0.0]])
        with pytest.raises(ValueError):
            e.entries[0, 0] = 0.0
        a = Assignment([0, 1])
        with pytest.raises(ValueError):
            a.channel_of[0] = 1

    def test_off_diagonal_copy_is_writable(self):
        m = JointActivationMatrix([[0.5, 0.2], [0.2, 0.5]])
        off = m.off_diagonal()
        assert off[0, 0] == 0.0 and off[0, 1] == 0.2
        off[0, 1] = 0.9  # must not touch the original
        assert m.entries[0, 1] == 0.2
