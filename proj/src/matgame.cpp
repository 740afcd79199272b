#include "zerosum/matgame.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "zerosum/error.hpp"

namespace zerosum {

// ---------------------------------------------------------------------------
// PayoffMatrix

PayoffMatrix::PayoffMatrix(int rows, int cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (rows < 1 || cols < 1) {
    throw InvalidArgument("PayoffMatrix: dimensions must be at least 1x1");
  }
  if (entries_.size() != static_cast<std::size_t>(rows) * cols) {
    throw InvalidArgument("PayoffMatrix: entry count does not match dimensions");
  }
  for (double e : entries_) {
    if (!std::isfinite(e)) throw InvalidArgument("PayoffMatrix: non-finite entry");
  }
}

PayoffMatrix::PayoffMatrix(int rows, int cols, double fill)
    : PayoffMatrix(rows, cols,
                   std::vector<double>(static_cast<std::size_t>(std::max(rows, 0)) *
                                           std::max(cols, 0),
                                       fill)) {}

namespace {

std::vector<double> flatten(std::initializer_list<std::initializer_list<double>> rows,
                            int& n, int& m) {
  n = static_cast<int>(rows.size());
  m = n > 0 ? static_cast<int>(rows.begin()->size()) : 0;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n) * m);
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != m) {
      throw InvalidArgument("PayoffMatrix: ragged initializer");
    }
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

}  // namespace

PayoffMatrix::PayoffMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(0), cols_(0) {
  int n = 0;
  int m = 0;
  std::vector<double> flat = flatten(rows, n, m);
  *this = PayoffMatrix(n, m, std::move(flat));
}

double PayoffMatrix::min_entry() const {
  return *std::min_element(entries_.begin(), entries_.end());
}

double PayoffMatrix::max_entry() const {
  return *std::max_element(entries_.begin(), entries_.end());
}

double PayoffMatrix::max_abs() const {
  double m = 0.0;
  for (double e : entries_) m = std::max(m, std::abs(e));
  return m;
}

PayoffMatrix PayoffMatrix::transposed() const {
  std::vector<double> t(entries_.size());
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) t[j * rows_ + i] = (*this)(i, j);
  }
  return PayoffMatrix(cols_, rows_, std::move(t));
}

PayoffMatrix PayoffMatrix::swapped_roles() const {
  PayoffMatrix t = transposed();
  for (double& e : t.entries_) e = -e;
  return t;
}

// ---------------------------------------------------------------------------
// MixedStrategy

MixedStrategy::MixedStrategy(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw InvalidArgument("MixedStrategy: empty");
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw InvalidArgument("MixedStrategy: negative or non-finite probability");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw InvalidArgument("MixedStrategy: probabilities sum to " + std::to_string(sum));
  }
}

MixedStrategy MixedStrategy::uniform(int k) {
  if (k < 1) throw InvalidArgument("MixedStrategy::uniform: k must be >= 1");
  return MixedStrategy(std::vector<double>(k, 1.0 / k));
}

MixedStrategy MixedStrategy::pure(int k, int action) {
  if (action < 0 || action >= k) throw InvalidArgument("MixedStrategy::pure: bad action");
  std::vector<double> p(k, 0.0);
  p[action] = 1.0;
  return MixedStrategy(std::move(p));
}

MixedStrategy MixedStrategy::normalized(std::vector<double> weights) {
  double sum = 0.0;
  for (double& w : weights) {
    if (!(w > 0.0)) w = 0.0;
    sum += w;
  }
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    throw InvalidArgument("MixedStrategy::normalized: no positive mass");
  }
  for (double& w : weights) w /= sum;
  return MixedStrategy(std::move(weights));
}

// ---------------------------------------------------------------------------
// Regret matching

RegretState::RegretState(int rows, int cols)
    : cumulative_regret_row(rows, 0.0),
      cumulative_regret_col(cols, 0.0),
      strategy_sum_row(rows, 0.0),
      strategy_sum_col(cols, 0.0) {}

namespace {

MixedStrategy average_of(const std::vector<double>& sum, long iterations) {
  const int k = static_cast<int>(sum.size());
  if (iterations <= 0) return MixedStrategy::uniform(k);
  std::vector<double> avg(sum);
  for (double& v : avg) v /= static_cast<double>(iterations);
  return MixedStrategy::normalized(std::move(avg));
}

}  // namespace

MixedStrategy RegretState::average_row() const {
  return average_of(strategy_sum_row, iterations);
}

MixedStrategy RegretState::average_col() const {
  return average_of(strategy_sum_col, iterations);
}

std::vector<double> regret_matching_strategy(std::span<const double> cumulative_regret) {
  const std::size_t k = cumulative_regret.size();
  std::vector<double> s(k, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    s[i] = std::max(cumulative_regret[i], 0.0);
    total += s[i];
  }
  if (total > 0.0) {
    for (double& v : s) v /= total;
  } else {
    std::fill(s.begin(), s.end(), 1.0 / static_cast<double>(k));
  }
  return s;
}

void regret_matching_step(const PayoffMatrix& a, RegretState& state,
                          const std::vector<double>* row_override,
                          const std::vector<double>* col_override) {
  const int n = a.rows();
  const int m = a.cols();
  const std::vector<double> x =
      row_override ? *row_override : regret_matching_strategy(state.cumulative_regret_row);
  const std::vector<double> y =
      col_override ? *col_override : regret_matching_strategy(state.cumulative_regret_col);

  // Row utilities (Ay)_i and column utilities -(x^T A)_j.
  std::vector<double> row_util(n, 0.0);
  std::vector<double> col_util(m, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      const double e = a(i, j);
      row_util[i] += e * y[j];
      col_util[j] -= e * x[i];
    }
  }
  double row_realized = 0.0;
  for (int i = 0; i < n; ++i) row_realized += x[i] * row_util[i];
  double col_realized = 0.0;
  for (int j = 0; j < m; ++j) col_realized += y[j] * col_util[j];

  for (int i = 0; i < n; ++i) {
    state.cumulative_regret_row[i] += row_util[i] - row_realized;
    state.strategy_sum_row[i] += x[i];
  }
  for (int j = 0; j < m; ++j) {
    state.cumulative_regret_col[j] += col_util[j] - col_realized;
    state.strategy_sum_col[j] += y[j];
  }
  ++state.iterations;
}

GameSolution regret_matching_solve(const PayoffMatrix& a, long iterations,
                                   const RegretMatchingOptions& options) {
  if (iterations < 0) throw InvalidArgument("regret_matching_solve: negative iterations");
  if (options.initial_row && options.initial_row->size() != a.rows()) {
    throw InvalidArgument("regret_matching_solve: initial_row size mismatch");
  }
  if (options.initial_col && options.initial_col->size() != a.cols()) {
    throw InvalidArgument("regret_matching_solve: initial_col size mismatch");
  }
  RegretState state(a.rows(), a.cols());
  for (long t = 0; t < iterations; ++t) {
    const bool first = t == 0;
    regret_matching_step(
        a, state,
        first && options.initial_row ? &options.initial_row->vector() : nullptr,
        first && options.initial_col ? &options.initial_col->vector() : nullptr);
  }
  MixedStrategy x = state.average_row();
  MixedStrategy y = state.average_col();
  const double value = expected_payoff(a, x.probs(), y.probs());
  return GameSolution{std::move(x), std::move(y), value};
}

// ---------------------------------------------------------------------------
// Exact LP

GameSolution solve_lp(const PayoffMatrix& a) {
  // Shift so every entry is >= 1; the shifted game has value >= 1 > 0.
  // Column player's LP:  max 1^T w  s.t.  B w <= 1, w >= 0,  with value 1/z.
  // The row strategy is read from the duals of the slack columns.
  const int n = a.rows();
  const int m = a.cols();
  const double shift = 1.0 - a.min_entry();
  const int width = m + n + 1;  // structural, slack, rhs
  std::vector<double> tab(static_cast<std::size_t>(n) * width, 0.0);
  auto at = [&](int r, int c) -> double& { return tab[static_cast<std::size_t>(r) * width + c]; };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) at(i, j) = a(i, j) + shift;
    at(i, m + i) = 1.0;
    at(i, width - 1) = 1.0;
  }
  std::vector<double> reduced(m + n, 0.0);
  std::fill(reduced.begin(), reduced.begin() + m, 1.0);
  double objective = 0.0;
  std::vector<int> basis(n);
  std::iota(basis.begin(), basis.end(), m);

  constexpr double kTol = 1e-12;
  const int max_pivots = 1000 + 50 * (n + m) * (n + m);
  int pivots = 0;
  while (true) {
    // Bland: lowest-index improving column enters.
    int enter = -1;
    for (int c = 0; c < m + n; ++c) {
      if (reduced[c] > kTol) {
        enter = c;
        break;
      }
    }
    if (enter < 0) break;
    // Minimum ratio; ties go to the lowest basic variable index.
    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int r = 0; r < n; ++r) {
      const double coef = at(r, enter);
      if (coef <= kTol) continue;
      const double ratio = at(r, width - 1) / coef;
      if (ratio < best_ratio - kTol ||
          (std::abs(ratio - best_ratio) <= kTol && leave >= 0 && basis[r] < basis[leave])) {
        best_ratio = ratio;
        leave = r;
      }
    }
    if (leave < 0) throw SolverFailure("solve_lp: unbounded pivot column");
    if (++pivots > max_pivots) throw SolverFailure("solve_lp: pivot limit exceeded");

    const double pivot = at(leave, enter);
    for (int c = 0; c < width; ++c) at(leave, c) /= pivot;
    for (int r = 0; r < n; ++r) {
      if (r == leave) continue;
      const double f = at(r, enter);
      if (f == 0.0) continue;
      for (int c = 0; c < width; ++c) at(r, c) -= f * at(leave, c);
    }
    const double f = reduced[enter];
    for (int c = 0; c < m + n; ++c) reduced[c] -= f * at(leave, c);
    objective += f * at(leave, width - 1);
    basis[leave] = enter;
  }

  if (!(objective > 0.0) || !std::isfinite(objective)) {
    throw SolverFailure("solve_lp: degenerate optimum");
  }
  std::vector<double> w(m, 0.0);
  for (int r = 0; r < n; ++r) {
    if (basis[r] < m) w[basis[r]] = at(r, width - 1);
  }
  std::vector<double> u(n, 0.0);
  for (int i = 0; i < n; ++i) u[i] = -reduced[m + i];

  MixedStrategy y = MixedStrategy::normalized(std::move(w));
  MixedStrategy x = MixedStrategy::normalized(std::move(u));
  const double value = 1.0 / objective - shift;
  return GameSolution{std::move(x), std::move(y), value};
}

// ---------------------------------------------------------------------------
// Metrics and oracles

double expected_payoff(const PayoffMatrix& a, std::span<const double> x,
                       std::span<const double> y) {
  double v = 0.0;
  for (int i = 0; i < a.rows(); ++i) {
    double row = 0.0;
    for (int j = 0; j < a.cols(); ++j) row += a(i, j) * y[j];
    v += x[i] * row;
  }
  return v;
}

double exploitability_matrix(const PayoffMatrix& a, const MixedStrategy& x,
                             const MixedStrategy& y) {
  if (x.size() != a.rows() || y.size() != a.cols()) {
    throw InvalidArgument("exploitability_matrix: dimension mismatch");
  }
  double best_row = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < a.rows(); ++i) {
    double v = 0.0;
    for (int j = 0; j < a.cols(); ++j) v += a(i, j) * y[j];
    best_row = std::max(best_row, v);
  }
  double worst_col = std::numeric_limits<double>::infinity();
  for (int j = 0; j < a.cols(); ++j) {
    double v = 0.0;
    for (int i = 0; i < a.rows(); ++i) v += x[i] * a(i, j);
    worst_col = std::min(worst_col, v);
  }
  return std::max(best_row - worst_col, 0.0);
}

namespace {

struct GridSearch {
  const PayoffMatrix& a;
  int steps;
  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<int> best_counts;
  std::vector<int> counts;

  // Coordinates before `index` are fixed in `counts`; `partial` holds their
  // contribution to each column payoff.
  void recurse(int index, int remaining, std::vector<double>& partial) {
    const int n = a.rows();
    const int m = a.cols();
    const double inv = 1.0 / steps;
    if (index == n - 1) {
      // Single row left: it takes all remaining mass.
      std::vector<double> p(partial);
      for (int j = 0; j < m; ++j) p[j] += remaining * inv * a(index, j);
      consider(*std::min_element(p.begin(), p.end()), index, remaining, remaining);
      return;
    }
    if (index == n - 2) {
      // Last free coordinate: walk c = 0..remaining, payoffs change linearly.
      std::vector<double> p(partial);
      std::vector<double> delta(m);
      for (int j = 0; j < m; ++j) {
        p[j] += remaining * inv * a(n - 1, j);
        delta[j] = (a(n - 2, j) - a(n - 1, j)) * inv;
      }
      for (int c = 0; c <= remaining; ++c) {
        double worst = p[0];
        for (int j = 1; j < m; ++j) worst = std::min(worst, p[j]);
        consider(worst, index, c, remaining);
        for (int j = 0; j < m; ++j) p[j] += delta[j];
      }
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[index] = c;
      std::vector<double> next(partial);
      for (int j = 0; j < a.cols(); ++j) next[j] += c * inv * a(index, j);
      recurse(index + 1, remaining - c, next);
    }
  }

  void consider(double value, int index, int c, int remaining) {
    if (value > best_value) {
      best_value = value;
      best_counts = counts;
      best_counts[index] = c;
      if (index + 1 < a.rows()) best_counts[index + 1] = remaining - c;
    }
  }
};

GameSolution grid_rows(const PayoffMatrix& a, int steps) {
  GridSearch search{a, steps, -std::numeric_limits<double>::infinity(), {},
                    std::vector<int>(a.rows(), 0)};
  std::vector<double> partial(a.cols(), 0.0);
  search.recurse(0, steps, partial);

  std::vector<double> x(a.rows());
  for (int i = 0; i < a.rows(); ++i) x[i] = static_cast<double>(search.best_counts[i]) / steps;
  MixedStrategy row = MixedStrategy::normalized(std::move(x));
  // Column player's pure best response to the grid optimum.
  int best_col = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (int j = 0; j < a.cols(); ++j) {
    double v = 0.0;
    for (int i = 0; i < a.rows(); ++i) v += row[i] * a(i, j);
    if (v < worst) {
      worst = v;
      best_col = j;
    }
  }
  return GameSolution{std::move(row), MixedStrategy::pure(a.cols(), best_col), worst};
}

}  // namespace

GameSolution brute_force_solve(const PayoffMatrix& a, double resolution) {
  if (a.rows() > 4 || a.cols() > 4) {
    throw InvalidArgument("brute_force_solve: dimension cap (4x4) exceeded");
  }
  if (!(resolution > 0.0) || resolution > 0.1) {
    throw InvalidArgument("brute_force_solve: resolution must lie in (0, 0.1]");
  }
  const int steps = static_cast<int>(std::ceil(1.0 / resolution - 1e-9));
  if (a.rows() <= a.cols()) return grid_rows(a, steps);
  // Grid the column player's simplex instead: solve -A^T with rows gridded.
  GameSolution swapped = grid_rows(a.swapped_roles(), steps);
  return GameSolution{std::move(swapped.col_strategy), std::move(swapped.row_strategy),
                      -swapped.value};
}

}  // namespace zerosum
