#pragma once

#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace zerosum {

// Dense n x m matrix of player-1 utilities; player 2 receives the negation.
// Row-major storage.
class PayoffMatrix {
 public:
  PayoffMatrix(int rows, int cols, std::vector<double> entries);
  PayoffMatrix(int rows, int cols, double fill);
  PayoffMatrix(std::initializer_list<std::initializer_list<double>> rows);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double operator()(int i, int j) const { return entries_[i * cols_ + j]; }
  double& operator()(int i, int j) { return entries_[i * cols_ + j]; }

  std::span<const double> entries() const { return entries_; }

  double min_entry() const;
  double max_entry() const;
  double max_abs() const;

  PayoffMatrix transposed() const;
  // The same game seen from player 2 as row maximizer: -A^T.
  PayoffMatrix swapped_roles() const;

  friend bool operator==(const PayoffMatrix&, const PayoffMatrix&) = default;

 private:
  int rows_;
  int cols_;
  std::vector<double> entries_;
};

// Probability vector over one player's actions.
class MixedStrategy {
 public:
  static constexpr double kSumTolerance = 1e-9;

  // Validates non-negativity and that entries sum to 1 within kSumTolerance.
  explicit MixedStrategy(std::vector<double> probs);
  MixedStrategy(std::initializer_list<double> probs)
      : MixedStrategy(std::vector<double>(probs)) {}

  static MixedStrategy uniform(int k);
  static MixedStrategy pure(int k, int action);
  // Clamps negatives produced by round-off and renormalizes. Throws if the
  // vector has no positive mass.
  static MixedStrategy normalized(std::vector<double> weights);

  int size() const { return static_cast<int>(probs_.size()); }
  double operator[](int i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }
  const std::vector<double>& vector() const { return probs_; }

  friend bool operator==(const MixedStrategy&, const MixedStrategy&) = default;

 private:
  std::vector<double> probs_;
};

struct GameSolution {
  MixedStrategy row_strategy;
  MixedStrategy col_strategy;
  double value;  // to player 1
};

// Accumulators for simultaneous regret matching on one matrix game.
struct RegretState {
  std::vector<double> cumulative_regret_row;
  std::vector<double> cumulative_regret_col;
  std::vector<double> strategy_sum_row;
  std::vector<double> strategy_sum_col;
  long iterations = 0;

  RegretState() = default;
  RegretState(int rows, int cols);

  MixedStrategy average_row() const;
  MixedStrategy average_col() const;
};

// Regret-matching strategy from signed cumulative regrets: proportional to
// the positive part, uniform when no regret is positive.
std::vector<double> regret_matching_strategy(std::span<const double> cumulative_regret);

// One simultaneous regret-matching round. Both players act from the same
// iterate. `row_override`/`col_override` replace the regret-derived strategy
// for this round (used to seed the first iterate).
void regret_matching_step(const PayoffMatrix& a, RegretState& state,
                          const std::vector<double>* row_override = nullptr,
                          const std::vector<double>* col_override = nullptr);

struct RegretMatchingOptions {
  // First-round strategies; uniform when unset.
  std::optional<MixedStrategy> initial_row;
  std::optional<MixedStrategy> initial_col;
};

// Average strategies after `iterations` rounds and their value x^T A y.
// iterations == 0 yields uniform strategies.
GameSolution regret_matching_solve(const PayoffMatrix& a, long iterations,
                                   const RegretMatchingOptions& options = {});

// Exact equilibrium by a dense tableau simplex with Bland's rule.
// Throws SolverFailure if the pivoting does not terminate.
GameSolution solve_lp(const PayoffMatrix& a);

// max_i (Ay)_i - min_j (x^T A)_j. Zero exactly at a Nash pair.
double exploitability_matrix(const PayoffMatrix& a, const MixedStrategy& x,
                             const MixedStrategy& y);

// Exhaustive grid search over the smaller player's simplex (n, m <= 4).
// The value is within (n+m) * resolution * max|A| of the game value.
GameSolution brute_force_solve(const PayoffMatrix& a, double resolution);

// x^T A y
double expected_payoff(const PayoffMatrix& a, std::span<const double> x,
                       std::span<const double> y);

}  // namespace zerosum
