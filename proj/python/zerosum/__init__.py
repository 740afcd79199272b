"""Two-player zero-sum simultaneous-move games: matrix-game solvers, exact
backward induction, simultaneous-move search, and self-play training."""

from ._core import (
    BudgetExceeded,
    FormatError,
    Game,
    InvalidArgument,
    Network,
    SolverFailure,
    compute_returns,
    error_trial,
    evaluate_network,
    exploitability,
    hl_gauss_target,
    make_dubin,
    make_sda,
    make_toy,
    regret_matching,
    search,
    solve_exact,
    solve_lp,
    train,
    uniform_exploitability,
)

__all__ = [
    "BudgetExceeded",
    "FormatError",
    "Game",
    "InvalidArgument",
    "Network",
    "SolverFailure",
    "compute_returns",
    "error_trial",
    "evaluate_network",
    "exploitability",
    "hl_gauss_target",
    "make_dubin",
    "make_sda",
    "make_toy",
    "regret_matching",
    "search",
    "solve_exact",
    "solve_lp",
    "train",
    "uniform_exploitability",
]
