"""Tests for signaling accounting."""

import pytest

from mimo_power.application.services.signaling_service import (
    count_signaling,
    exchanged_per_iteration,
    signaling_table,
)
from mimo_power.domain.entities.signaling import ExecutionPlace, Strategy
from mimo_power.domain.errors import ConfigurationError


class TestSignalingCounts:
    """Test suite for variable and exchange counts."""

    def test_four_cells_ten_users(self):
        """Test L=4, K=10: 400 exchanges centrally, 840 for the basic scheme."""
        central = count_signaling(Strategy.CENTRALIZED, 4, 10)
        basic = count_signaling(Strategy.BASIC_DISTRIBUTED, 4, 10)
        assert (central.optimization_variables, central.exchanged_parameters) == (40, 400)
        assert (basic.optimization_variables, basic.exchanged_parameters) == (160, 840)
        assert central.execution_place is ExecutionPlace.CORE_NETWORK
        assert basic.execution_place is ExecutionPlace.BASE_STATIONS

    def test_dual_decomposition(self):
        """Test the dual counts grow linearly in N."""
        one = count_signaling(Strategy.DUAL_DECOMPOSITION, 4, 10, 1)
        five = count_signaling(Strategy.DUAL_DECOMPOSITION, 4, 10, 5)
        assert one.optimization_variables == 2 * 10 * 16 - 40 + 4
        assert five.exchanged_parameters - one.exchanged_parameters == 4 * exchanged_per_iteration(4, 10)
        assert exchanged_per_iteration(4, 10) == 360

    @pytest.mark.parametrize("L, K, N, expected", [
        (2, 1, 1, {"centralized": (2, 12), "basic": (4, 6), "dual": (8, 8)}),
        (8, 5, 3, {"centralized": (40, 720), "basic": (320, 4200), "dual": (608, 3500)}),
    ])
    def test_all_formulas(self, L, K, N, expected):
        """Test variables and exchanges of every strategy at hand-computed sizes."""
        for strategy, counts in expected.items():
            ledger = count_signaling(strategy, L, K, N)
            assert (ledger.optimization_variables, ledger.exchanged_parameters) == counts

    def test_strings_accepted(self):
        """Test strategies given by value."""
        assert count_signaling("basic", 2, 1).strategy is Strategy.BASIC_DISTRIBUTED

    def test_invalid_sizes(self):
        """Test nonpositive sizes and iteration counts."""
        with pytest.raises(ConfigurationError):
            count_signaling(Strategy.CENTRALIZED, 0, 10)
        with pytest.raises(ConfigurationError):
            count_signaling(Strategy.DUAL_DECOMPOSITION, 4, 10, 0)

    def test_table(self):
        """Test the table lists every strategy once."""
        rows = [ledger.as_row() for ledger in signaling_table(4, 10, 7)]
        assert [row["strategy"] for row in rows] == ["centralized", "basic", "dual"]
        assert rows[2]["iterations"] == 7
        assert rows[0]["iterations"] == 1
