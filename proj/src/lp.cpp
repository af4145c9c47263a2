#include "ncndn/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ncndn::lp {
namespace {

constexpr double kEps = 1e-9;

class Tableau {
 public:
  Tableau(int rows, int cols) : m_(rows), n_(cols), a_((rows + 1) * (cols + 1), 0.0) {}

  double& at(int r, int c) { return a_[r * (n_ + 1) + c]; }
  double& rhs(int r) { return at(r, n_); }
  // Row m_ holds reduced costs; entering candidates have negative entries.
  double& cost(int c) { return at(m_, c); }

  int rows() const { return m_; }
  int cols() const { return n_; }

  void pivot(int r, int c) {
    const double p = at(r, c);
    for (int j = 0; j <= n_; ++j) at(r, j) /= p;
    for (int i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      for (int j = 0; j <= n_; ++j) at(i, j) -= f * at(r, j);
      at(i, c) = 0.0;
    }
  }

 private:
  int m_, n_;
  std::vector<double> a_;
};

// Runs simplex iterations on the cost row. Columns with allowed[c] == false
// never enter. Returns false if unbounded.
bool run(Tableau& t, std::vector<int>& basis, const std::vector<bool>& allowed) {
  int degenerate_streak = 0;
  const long limit = 50000L + 200L * (t.rows() + t.cols());
  for (long iter = 0; iter < limit; ++iter) {
    // Dantzig pricing, falling back to Bland's rule on long degenerate runs.
    const bool bland = degenerate_streak > 30;
    int enter = -1;
    double best = -kEps;
    for (int c = 0; c < t.cols(); ++c) {
      if (!allowed[c]) continue;
      const double rc = t.cost(c);
      if (rc < best) {
        enter = c;
        if (bland) break;
        best = rc;
      }
    }
    if (enter < 0) return true;

    int leave = -1;
    double ratio = std::numeric_limits<double>::infinity();
    for (int r = 0; r < t.rows(); ++r) {
      const double a = t.at(r, enter);
      if (a <= kEps) continue;
      const double q = t.rhs(r) / a;
      if (q < ratio - kEps || (q < ratio + kEps && leave >= 0 && basis[r] < basis[leave])) {
        ratio = q;
        leave = r;
      }
    }
    if (leave < 0) return false;
    degenerate_streak = ratio < kEps ? degenerate_streak + 1 : 0;
    t.pivot(leave, enter);
    basis[leave] = enter;
  }
  throw std::runtime_error("simplex iteration limit reached");
}

}  // namespace

Solution maximize(const Problem& problem) {
  const int n = problem.num_vars;
  const int m = static_cast<int>(problem.constraints.size());

  // Column layout: originals, then one slack/surplus per inequality, then
  // artificials for >= and = rows.
  int slack_count = 0, art_count = 0;
  std::vector<int> sign(m);
  for (int i = 0; i < m; ++i) {
    const auto& c = problem.constraints[i];
    sign[i] = c.rhs < 0 ? -1 : 1;
    Sense s = c.sense;
    if (sign[i] < 0 && s != Sense::kEqual) {
      s = s == Sense::kLessEqual ? Sense::kGreaterEqual : Sense::kLessEqual;
    }
    if (s != Sense::kEqual) ++slack_count;
    if (s != Sense::kLessEqual) ++art_count;
  }
  const int cols = n + slack_count + art_count;
  Tableau t(m, cols);
  std::vector<int> basis(m, -1);
  std::vector<bool> is_art(cols, false);

  int next_slack = n, next_art = n + slack_count;
  for (int i = 0; i < m; ++i) {
    const auto& c = problem.constraints[i];
    for (auto [v, coef] : c.terms) {
      if (v < 0 || v >= n) throw std::out_of_range("constraint references unknown variable");
      t.at(i, v) += sign[i] * coef;
    }
    t.rhs(i) = sign[i] * c.rhs;
    Sense s = c.sense;
    if (sign[i] < 0 && s != Sense::kEqual) {
      s = s == Sense::kLessEqual ? Sense::kGreaterEqual : Sense::kLessEqual;
    }
    if (s == Sense::kLessEqual) {
      t.at(i, next_slack) = 1.0;
      basis[i] = next_slack++;
    } else {
      if (s == Sense::kGreaterEqual) t.at(i, next_slack++) = -1.0;
      t.at(i, next_art) = 1.0;
      is_art[next_art] = true;
      basis[i] = next_art++;
    }
  }

  std::vector<bool> allowed(cols, true);

  // Phase 1: maximize -sum(artificials).
  if (art_count > 0) {
    for (int i = 0; i < m; ++i) {
      if (!is_art[basis[i]]) continue;
      for (int c = 0; c <= cols; ++c) t.at(m, c) -= t.at(i, c);
    }
    for (int c = 0; c < cols; ++c) {
      if (is_art[c]) t.at(m, c) += 1.0;
    }
    run(t, basis, allowed);
    double art_sum = 0;
    for (int i = 0; i < m; ++i) {
      if (is_art[basis[i]]) art_sum += t.rhs(i);
    }
    if (art_sum > 1e-7) return {Status::kInfeasible, 0.0, {}};
    for (int i = 0; i < m; ++i) {
      if (!is_art[basis[i]]) continue;
      for (int c = 0; c < cols; ++c) {
        if (!is_art[c] && std::abs(t.at(i, c)) > kEps) {
          t.pivot(i, c);
          basis[i] = c;
          break;
        }
      }
    }
    for (int c = 0; c < cols; ++c) {
      if (is_art[c]) allowed[c] = false;
    }
  }

  // Phase 2 cost row: reduced costs of the original objective.
  for (int c = 0; c <= cols; ++c) t.at(m, c) = 0.0;
  for (int v = 0; v < n && v < static_cast<int>(problem.objective.size()); ++v) {
    t.at(m, v) = -problem.objective[v];
  }
  for (int i = 0; i < m; ++i) {
    const int b = basis[i];
    const double cb = b < n && b < static_cast<int>(problem.objective.size())
                          ? problem.objective[b]
                          : 0.0;
    if (cb == 0.0) continue;
    for (int c = 0; c <= cols; ++c) t.at(m, c) += cb * t.at(i, c);
  }
  if (!run(t, basis, allowed)) return {Status::kUnbounded, 0.0, {}};

  Solution sol;
  sol.status = Status::kOptimal;
  sol.x.assign(n, 0.0);
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) sol.x[basis[i]] = t.rhs(i);
  }
  sol.objective = 0.0;
  for (int v = 0; v < n && v < static_cast<int>(problem.objective.size()); ++v) {
    sol.objective += problem.objective[v] * sol.x[v];
  }
  return sol;
}

}  // namespace ncndn::lp
