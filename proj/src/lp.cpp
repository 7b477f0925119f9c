#include "decoykit/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace decoykit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-9;
constexpr double kFeasTol = 1e-9;
constexpr int kRefactorEvery = 50;

enum VarState : unsigned char { kBasic, kAtLower, kAtUpper };

// Equality form: [A | -I | D] (x, s, a) = 0 with boxes on every column.
// Structural columns 0..n-1, slack (logical) columns n..n+m-1, artificial
// columns n+m..n+2m-1.
class Simplex {
 public:
  Simplex(const LpProblem& p, bool maximize)
      : prob_(p),
        n_(static_cast<int>(p.num_vars())),
        m_(static_cast<int>(p.num_rows())) {
    const int total = n_ + 2 * m_;
    lo_.resize(total);
    up_.resize(total);
    cost_.assign(total, 0.0);
    x_.assign(total, 0.0);
    state_.assign(total, kAtLower);
    art_sign_.assign(m_, 1.0);

    for (int j = 0; j < n_; ++j) {
      lo_[j] = p.var_lower[j];
      up_[j] = p.var_upper[j];
      cost_[j] = maximize ? -p.objective[j] : p.objective[j];
    }
    for (int i = 0; i < m_; ++i) {
      lo_[n_ + i] = p.row_lower[i];
      up_[n_ + i] = p.row_upper[i];
      lo_[n_ + m_ + i] = 0.0;
      up_[n_ + m_ + i] = kInf;
    }

    scale_ = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (std::isfinite(p.row_lower[i]))
        scale_ = std::max(scale_, std::fabs(p.row_lower[i]));
      if (std::isfinite(p.row_upper[i]))
        scale_ = std::max(scale_, std::fabs(p.row_upper[i]));
    }
    for (int j = 0; j < n_; ++j) {
      scale_ = std::max(scale_, std::fabs(p.var_lower[j]));
      scale_ = std::max(scale_, std::fabs(p.var_upper[j]));
    }
  }

  double feas_tol() const { return kFeasTol * scale_; }

  // Column entry G[i][j] of the equality matrix.
  double entry(int i, int j) const {
    if (j < n_) return prob_.rows[i][j];
    if (j < n_ + m_) return (j - n_ == i) ? -1.0 : 0.0;
    return (j - n_ - m_ == i) ? art_sign_[j - n_ - m_] : 0.0;
  }

  // w = Binv * G_j
  void column_ftran(int j, std::vector<double>& w) const {
    w.assign(m_, 0.0);
    if (j < n_) {
      for (int i = 0; i < m_; ++i) {
        double acc = 0.0;
        const double* bi = &binv_[static_cast<std::size_t>(i) * m_];
        for (int r = 0; r < m_; ++r) acc += bi[r] * prob_.rows[r][j];
        w[i] = acc;
      }
    } else if (j < n_ + m_) {
      const int s = j - n_;
      for (int i = 0; i < m_; ++i)
        w[i] = -binv_[static_cast<std::size_t>(i) * m_ + s];
    } else {
      const int a = j - n_ - m_;
      for (int i = 0; i < m_; ++i)
        w[i] = art_sign_[a] * binv_[static_cast<std::size_t>(i) * m_ + a];
    }
  }

  bool refactor() {
    // Gauss-Jordan inversion of the basis matrix with partial pivoting.
    std::vector<double> b(static_cast<std::size_t>(m_) * m_, 0.0);
    std::vector<double> inv(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      inv[static_cast<std::size_t>(i) * m_ + i] = 1.0;
      for (int k = 0; k < m_; ++k)
        b[static_cast<std::size_t>(i) * m_ + k] = entry(i, basic_[k]);
    }
    for (int col = 0; col < m_; ++col) {
      int piv = col;
      double best = std::fabs(b[static_cast<std::size_t>(col) * m_ + col]);
      for (int i = col + 1; i < m_; ++i) {
        const double v = std::fabs(b[static_cast<std::size_t>(i) * m_ + col]);
        if (v > best) {
          best = v;
          piv = i;
        }
      }
      if (best < kPivotTol) return false;
      if (piv != col) {
        for (int k = 0; k < m_; ++k) {
          std::swap(b[static_cast<std::size_t>(piv) * m_ + k],
                    b[static_cast<std::size_t>(col) * m_ + k]);
          std::swap(inv[static_cast<std::size_t>(piv) * m_ + k],
                    inv[static_cast<std::size_t>(col) * m_ + k]);
        }
      }
      const double d = 1.0 / b[static_cast<std::size_t>(col) * m_ + col];
      for (int k = 0; k < m_; ++k) {
        b[static_cast<std::size_t>(col) * m_ + k] *= d;
        inv[static_cast<std::size_t>(col) * m_ + k] *= d;
      }
      for (int i = 0; i < m_; ++i) {
        if (i == col) continue;
        const double f = b[static_cast<std::size_t>(i) * m_ + col];
        if (f == 0.0) continue;
        for (int k = 0; k < m_; ++k) {
          b[static_cast<std::size_t>(i) * m_ + k] -=
              f * b[static_cast<std::size_t>(col) * m_ + k];
          inv[static_cast<std::size_t>(i) * m_ + k] -=
              f * inv[static_cast<std::size_t>(col) * m_ + k];
        }
      }
    }
    binv_ = std::move(inv);
    return true;
  }

  void recompute_values() {
    const int total = n_ + 2 * m_;
    std::vector<double> rhs(m_, 0.0);
    for (int j = 0; j < total; ++j) {
      if (state_[j] == kBasic) continue;
      const double v = (state_[j] == kAtLower) ? lo_[j] : up_[j];
      x_[j] = v;
      if (v == 0.0) continue;
      if (j < n_) {
        for (int i = 0; i < m_; ++i) rhs[i] -= prob_.rows[i][j] * v;
      } else if (j < n_ + m_) {
        rhs[j - n_] += v;
      } else {
        rhs[j - n_ - m_] -= art_sign_[j - n_ - m_] * v;
      }
    }
    for (int i = 0; i < m_; ++i) {
      double acc = 0.0;
      const double* bi = &binv_[static_cast<std::size_t>(i) * m_];
      for (int r = 0; r < m_; ++r) acc += bi[r] * rhs[r];
      x_[basic_[i]] = acc;
    }
  }

  void init_phase1() {
    basic_.resize(m_);
    binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);

    // Structurals rest at the bound nearest zero; slacks at the bound
    // nearest the implied row value so the artificial start is small.
    for (int j = 0; j < n_; ++j) {
      const bool lower_finite = std::isfinite(lo_[j]);
      const bool upper_finite = std::isfinite(up_[j]);
      if (lower_finite && upper_finite)
        state_[j] = (std::fabs(lo_[j]) <= std::fabs(up_[j])) ? kAtLower
                                                             : kAtUpper;
      else
        state_[j] = lower_finite ? kAtLower : kAtUpper;
      x_[j] = (state_[j] == kAtLower) ? lo_[j] : up_[j];
    }
    for (int i = 0; i < m_; ++i) {
      double row_value = 0.0;
      for (int j = 0; j < n_; ++j) row_value += prob_.rows[i][j] * x_[j];
      const int s = n_ + i;
      double sv;
      if (std::isfinite(lo_[s]) && std::isfinite(up_[s])) {
        const double c = std::clamp(row_value, lo_[s], up_[s]);
        state_[s] = (std::fabs(c - lo_[s]) <= std::fabs(up_[s] - c))
                        ? kAtLower
                        : kAtUpper;
        sv = (state_[s] == kAtLower) ? lo_[s] : up_[s];
      } else if (std::isfinite(lo_[s])) {
        state_[s] = kAtLower;
        sv = lo_[s];
      } else {
        state_[s] = kAtUpper;
        sv = up_[s];
      }
      x_[s] = sv;
      const double residual = row_value - sv;
      art_sign_[i] = (residual >= 0.0) ? -1.0 : 1.0;
      const int a = n_ + m_ + i;
      basic_[i] = a;
      state_[a] = kBasic;
      binv_[static_cast<std::size_t>(i) * m_ + i] = art_sign_[i];
    }
    recompute_values();
  }

  // Current objective under the given cost vector.
  double objective_value(const std::vector<double>& c) const {
    double v = 0.0;
    for (int j = 0; j < n_ + 2 * m_; ++j)
      if (c[j] != 0.0) v += c[j] * x_[j];
    return v;
  }

  enum class LoopResult { optimal, unbounded, iteration_limit, singular };

  LoopResult iterate(const std::vector<double>& c, bool phase2) {
    const int total = n_ + 2 * m_;
    const long max_iter = 500 + 200L * (n_ + m_);
    std::vector<double> y(m_), w(m_);
    int since_refactor = 0;
    int degenerate_run = 0;

    for (;;) {
      if (++iterations_ > max_iter) return LoopResult::iteration_limit;

      // y = c_B' Binv
      for (int r = 0; r < m_; ++r) {
        double acc = 0.0;
        for (int i = 0; i < m_; ++i) {
          const double cb = c[basic_[i]];
          if (cb != 0.0) acc += cb * binv_[static_cast<std::size_t>(i) * m_ + r];
        }
        y[r] = acc;
      }

      // Pricing: pick an entering column.
      int q = -1;
      double best_score = kCostTol;
      for (int j = 0; j < total; ++j) {
        if (state_[j] == kBasic) continue;
        if (up_[j] - lo_[j] <= 0.0) continue;  // fixed
        if (phase2 && j >= n_ + m_) continue;  // artificials are retired
        double d = c[j];
        if (j < n_) {
          for (int i = 0; i < m_; ++i)
            if (prob_.rows[i][j] != 0.0) d -= y[i] * prob_.rows[i][j];
        } else if (j < n_ + m_) {
          d += y[j - n_];
        } else {
          d -= y[j - n_ - m_] * art_sign_[j - n_ - m_];
        }
        const bool improving =
            (state_[j] == kAtLower) ? (d < -kCostTol) : (d > kCostTol);
        if (!improving) continue;
        if (bland_) {
          q = j;
          break;
        }
        if (std::fabs(d) > best_score) {
          best_score = std::fabs(d);
          q = j;
        }
      }
      if (q < 0) return LoopResult::optimal;

      const double sigma = (state_[q] == kAtLower) ? 1.0 : -1.0;
      column_ftran(q, w);

      // Ratio test. Entering moves by delta >= 0; basics change by
      // -sigma * w * delta.
      double delta = up_[q] - lo_[q];  // own bound flip
      int leave = -1;
      double leave_pivot = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double wi = sigma * w[i];
        const int bj = basic_[i];
        double bound, step;
        if (wi > kPivotTol) {
          bound = lo_[bj];
          if (!std::isfinite(bound)) continue;
          step = (x_[bj] - bound) / wi;
        } else if (wi < -kPivotTol) {
          bound = up_[bj];
          if (!std::isfinite(bound)) continue;
          step = (x_[bj] - bound) / wi;
        } else {
          continue;
        }
        if (step < 0.0) step = 0.0;  // tolerate slight bound drift
        const bool better =
            step < delta - 1e-15 ||
            (step < delta + 1e-15 &&
             (leave < 0 ||
              (bland_ ? basic_[i] < basic_[leave]
                      : std::fabs(w[i]) > std::fabs(leave_pivot))));
        if (better) {
          delta = step;
          leave = i;
          leave_pivot = w[i];
        }
      }

      if (!std::isfinite(delta)) return LoopResult::unbounded;

      degenerate_run = (delta <= 1e-13) ? degenerate_run + 1 : 0;
      if (degenerate_run > 2 * (n_ + m_) + 20) bland_ = true;

      if (leave < 0) {
        // Bound flip: the entering variable crosses its box.
        state_[q] = (state_[q] == kAtLower) ? kAtUpper : kAtLower;
      } else {
        const int out = basic_[leave];
        state_[out] = (sigma * w[leave] > 0.0) ? kAtLower : kAtUpper;
        basic_[leave] = q;
        state_[q] = kBasic;
        // Product-form update of Binv.
        const double piv = w[leave];
        double* rowr = &binv_[static_cast<std::size_t>(leave) * m_];
        for (int k = 0; k < m_; ++k) rowr[k] /= piv;
        for (int i = 0; i < m_; ++i) {
          if (i == leave) continue;
          const double f = w[i];
          if (f == 0.0) continue;
          double* rowi = &binv_[static_cast<std::size_t>(i) * m_];
          for (int k = 0; k < m_; ++k) rowi[k] -= f * rowr[k];
        }
        if (++since_refactor >= kRefactorEvery) {
          if (!refactor()) return LoopResult::singular;
          since_refactor = 0;
        }
      }
      recompute_values();
    }
  }

  double infeasibility() const {
    double s = 0.0;
    for (int i = 0; i < m_; ++i)
      if (basic_[i] >= n_ + m_) s += std::fabs(x_[basic_[i]]);
    for (int j = n_ + m_; j < n_ + 2 * m_; ++j)
      if (state_[j] == kAtUpper) s += std::fabs(x_[j]);
    return s;
  }

  // After phase 1: pivot leftover basic artificials out where possible,
  // then freeze every artificial at zero.
  void retire_artificials() {
    std::vector<double> w(m_);
    for (int i = 0; i < m_; ++i) {
      if (basic_[i] < n_ + m_) continue;
      int replacement = -1;
      double best = 1e-7;
      for (int j = 0; j < n_ + m_; ++j) {
        if (state_[j] == kBasic) continue;
        column_ftran(j, w);
        if (std::fabs(w[i]) > best) {
          best = std::fabs(w[i]);
          replacement = j;
        }
      }
      if (replacement >= 0) {
        column_ftran(replacement, w);
        const int out = basic_[i];
        state_[out] = kAtLower;
        basic_[i] = replacement;
        state_[replacement] = kBasic;
        const double piv = w[i];
        double* rowr = &binv_[static_cast<std::size_t>(i) * m_];
        for (int k = 0; k < m_; ++k) rowr[k] /= piv;
        for (int r = 0; r < m_; ++r) {
          if (r == i) continue;
          const double f = w[r];
          if (f == 0.0) continue;
          double* rowq = &binv_[static_cast<std::size_t>(r) * m_];
          for (int k = 0; k < m_; ++k) rowq[k] -= f * rowr[k];
        }
      }
    }
    for (int i = 0; i < m_; ++i) up_[n_ + m_ + i] = 0.0;
    recompute_values();
  }

  bool primal_feasible_within(double tol) const {
    for (int j = 0; j < n_ + m_; ++j) {
      if (x_[j] < lo_[j] - tol) return false;
      if (x_[j] > up_[j] + tol) return false;
    }
    return infeasibility() <= tol;
  }

  const LpProblem& prob_;
  int n_, m_;
  double scale_ = 1.0;
  std::vector<double> lo_, up_, cost_, x_;
  std::vector<unsigned char> state_;
  std::vector<double> art_sign_;
  std::vector<int> basic_;
  std::vector<double> binv_;
  long iterations_ = 0;
  bool bland_ = false;
};

void check_dimensions(const LpProblem& p) {
  const std::size_t n = p.num_vars();
  const std::size_t m = p.num_rows();
  if (p.var_lower.size() != n || p.var_upper.size() != n)
    throw std::invalid_argument("lp: variable bound size mismatch");
  if (p.row_lower.size() != m || p.row_upper.size() != m)
    throw std::invalid_argument("lp: row bound size mismatch");
  for (const auto& r : p.rows)
    if (r.size() != n) throw std::invalid_argument("lp: row width mismatch");
}

bool trivially_infeasible(const LpProblem& p) {
  for (std::size_t j = 0; j < p.num_vars(); ++j)
    if (p.var_lower[j] > p.var_upper[j]) return true;
  for (std::size_t i = 0; i < p.num_rows(); ++i)
    if (p.row_lower[i] > p.row_upper[i]) return true;
  return false;
}

// Rows with no finite bound constrain nothing; drop them so the basis stays
// well-conditioned. Keeps a map back to original row indices.
LpProblem strip_free_rows(const LpProblem& p, std::vector<std::size_t>& map) {
  LpProblem q;
  q.sense = p.sense;
  q.objective = p.objective;
  q.var_lower = p.var_lower;
  q.var_upper = p.var_upper;
  for (std::size_t i = 0; i < p.num_rows(); ++i) {
    if (!std::isfinite(p.row_lower[i]) && !std::isfinite(p.row_upper[i]))
      continue;
    q.add_row(p.rows[i], p.row_lower[i], p.row_upper[i]);
    map.push_back(i);
  }
  return q;
}

LpSolution solve_boxes_only(const LpProblem& p) {
  LpSolution sol;
  sol.status = LpSolution::Status::optimal;
  sol.x.resize(p.num_vars());
  const bool maximize = p.sense == LpProblem::Sense::maximize;
  double v = 0.0;
  for (std::size_t j = 0; j < p.num_vars(); ++j) {
    const double c = maximize ? -p.objective[j] : p.objective[j];
    sol.x[j] = (c >= 0.0) ? p.var_lower[j] : p.var_upper[j];
    if (!std::isfinite(sol.x[j])) {
      if (p.objective[j] != 0.0) {
        sol.status = LpSolution::Status::unbounded;
        return sol;
      }
      sol.x[j] = std::isfinite(p.var_lower[j]) ? p.var_lower[j]
                 : std::isfinite(p.var_upper[j]) ? p.var_upper[j]
                                                 : 0.0;
    }
    v += p.objective[j] * sol.x[j];
  }
  sol.value = v;
  sol.reduced_costs = p.objective;
  return sol;
}

}  // namespace

LpSolution lp_solve(const LpProblem& problem) {
  check_dimensions(problem);
  LpSolution sol;
  if (trivially_infeasible(problem)) {
    sol.status = LpSolution::Status::infeasible;
    return sol;
  }
  std::vector<std::size_t> row_map;
  const LpProblem p = strip_free_rows(problem, row_map);
  if (p.num_rows() == 0) {
    sol = solve_boxes_only(p);
    sol.row_duals.assign(problem.num_rows(), 0.0);
    return sol;
  }

  const bool maximize = problem.sense == LpProblem::Sense::maximize;
  Simplex s(p, maximize);
  s.init_phase1();

  const int n = static_cast<int>(p.num_vars());
  const int m = static_cast<int>(p.num_rows());
  std::vector<double> phase1_cost(n + 2 * m, 0.0);
  for (int i = 0; i < m; ++i) phase1_cost[n + m + i] = 1.0;

  auto r1 = s.iterate(phase1_cost, /*phase2=*/false);
  if (r1 == Simplex::LoopResult::singular ||
      r1 == Simplex::LoopResult::iteration_limit) {
    sol.status = LpSolution::Status::failed;
    sol.iterations = s.iterations_;
    return sol;
  }
  if (s.infeasibility() > s.feas_tol()) {
    sol.status = LpSolution::Status::infeasible;
    sol.iterations = s.iterations_;
    return sol;
  }
  s.retire_artificials();

  auto r2 = s.iterate(s.cost_, /*phase2=*/true);
  sol.iterations = s.iterations_;
  if (r2 == Simplex::LoopResult::unbounded) {
    sol.status = LpSolution::Status::unbounded;
    return sol;
  }
  if (r2 != Simplex::LoopResult::optimal) {
    sol.status = LpSolution::Status::failed;
    return sol;
  }

  // Clean the final basis before extracting the solution.
  if (!s.refactor()) {
    sol.status = LpSolution::Status::failed;
    return sol;
  }
  s.recompute_values();
  if (!s.primal_feasible_within(100.0 * s.feas_tol())) {
    sol.status = LpSolution::Status::failed;
    return sol;
  }

  sol.status = LpSolution::Status::optimal;
  sol.x.assign(s.x_.begin(), s.x_.begin() + n);
  for (int j = 0; j < n; ++j)
    sol.x[j] = std::clamp(sol.x[j], p.var_lower[j] - 1e-12,
                          p.var_upper[j] + 1e-12);
  double value = 0.0;
  for (int j = 0; j < n; ++j) value += problem.objective[j] * sol.x[j];
  sol.value = value;

  // Duals from the final basis, reported for the problem as posed.
  std::vector<double> y(m, 0.0);
  for (int r = 0; r < m; ++r) {
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
      const double cb = s.cost_[s.basic_[i]];
      if (cb != 0.0) acc += cb * s.binv_[static_cast<std::size_t>(i) * m + r];
    }
    y[r] = maximize ? -acc : acc;
  }
  sol.row_duals.assign(problem.num_rows(), 0.0);
  for (int r = 0; r < m; ++r) sol.row_duals[row_map[r]] = y[r];
  sol.reduced_costs.resize(n);
  for (int j = 0; j < n; ++j) {
    double d = problem.objective[j];
    for (int r = 0; r < m; ++r)
      if (p.rows[r][j] != 0.0) d -= y[r] * p.rows[r][j];
    sol.reduced_costs[j] = d;
  }
  return sol;
}

bool lp_feasible(const LpProblem& problem) {
  check_dimensions(problem);
  if (trivially_infeasible(problem)) return false;
  std::vector<std::size_t> row_map;
  const LpProblem p = strip_free_rows(problem, row_map);
  if (p.num_rows() == 0) return true;

  Simplex s(p, false);
  s.init_phase1();
  const int n = static_cast<int>(p.num_vars());
  const int m = static_cast<int>(p.num_rows());
  std::vector<double> phase1_cost(n + 2 * m, 0.0);
  for (int i = 0; i < m; ++i) phase1_cost[n + m + i] = 1.0;
  auto r = s.iterate(phase1_cost, /*phase2=*/false);
  if (r != Simplex::LoopResult::optimal) return false;
  return s.infeasibility() <= s.feas_tol();
}

}  // namespace decoykit
