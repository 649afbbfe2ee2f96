"""Backhaul signaling and optimization-variable accounting."""

from typing import List

from mimo_power.domain.entities.signaling import ExecutionPlace, SignalingLedger, Strategy
from mimo_power.domain.errors import ConfigurationError


def exchanged_per_iteration(L: int, K: int) -> int:
    """Parameters exchanged in one dual-decomposition iteration: 4K(L-1)^2."""
    return 4 * K * (L - 1) ** 2


def count_signaling(strategy: Strategy, L: int, K: int, N: int = 1) -> SignalingLedger:
    """Count optimization variables and exchanged parameters of a strategy.

    Args:
        strategy: Implementation strategy
        L: Number of cells
        K: Users per cell
        N: Iterations run by the dual decomposition (ignored otherwise)

    Returns:
        SignalingLedger with the strategy's counts

    Raises:
        ConfigurationError: If L, K or N is not positive
    """
    strategy = Strategy(strategy)
    if L < 1 or K < 1:
        raise ConfigurationError(f"L and K must be positive, got L={L}, K={K}")
    if strategy is Strategy.CENTRALIZED:
        return SignalingLedger(
            strategy=strategy, L=L, K=K, iterations=1,
            optimization_variables=K * L,
            exchanged_parameters=2 * K * L ** 2 + 2 * K * L,
            execution_place=ExecutionPlace.CORE_NETWORK,
        )
    if strategy is Strategy.BASIC_DISTRIBUTED:
        return SignalingLedger(
            strategy=strategy, L=L, K=K, iterations=1,
            optimization_variables=K * L ** 2,
            exchanged_parameters=2 * K * (L - 1) ** 2 * L + K * (L - 1) * L,
            execution_place=ExecutionPlace.BASE_STATIONS,
        )
    if N < 1:
        raise ConfigurationError(f"Dual decomposition needs N >= 1, got {N}")
    return SignalingLedger(
        strategy=strategy, L=L, K=K, iterations=N,
        optimization_variables=2 * K * L ** 2 - K * L + L,
        exchanged_parameters=exchanged_per_iteration(L, K) * N + 2 * K * (L - 1) * L,
        execution_place=ExecutionPlace.BASE_STATIONS,
    )


def signaling_table(L: int, K: int, N: int) -> List[SignalingLedger]:
    """Ledgers of all three strategies, dual decomposition with N iterations."""
    return [count_signaling(strategy, L, K, N) for strategy in Strategy]
