#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace decoykit {

/// Small dense linear program with double-sided row constraints and
/// box-bounded variables:
///
///   min/max  c'x   subject to   row_lower <= A x <= row_upper,
///                               var_lower <=  x  <= var_upper.
///
/// Row bounds may be +-infinity on either side; variable boxes are expected
/// to be finite. Sized for tens of variables and rows.
struct LpProblem {
  enum class Sense { minimize, maximize };

  Sense sense = Sense::minimize;
  std::vector<double> objective;
  std::vector<std::vector<double>> rows;
  std::vector<double> row_lower;
  std::vector<double> row_upper;
  std::vector<double> var_lower;
  std::vector<double> var_upper;

  std::size_t num_vars() const { return objective.size(); }
  std::size_t num_rows() const { return rows.size(); }

  void add_row(std::vector<double> coeff, double lower, double upper) {
    rows.push_back(std::move(coeff));
    row_lower.push_back(lower);
    row_upper.push_back(upper);
  }

  static constexpr double infinity() {
    return std::numeric_limits<double>::infinity();
  }
};

struct LpSolution {
  enum class Status { optimal, infeasible, unbounded, failed };

  Status status = Status::failed;
  double value = 0.0;
  std::vector<double> x;
  /// Simplex multipliers per row, in the problem's own sense.
  std::vector<double> row_duals;
  std::vector<double> reduced_costs;
  long iterations = 0;

  bool optimal() const { return status == Status::optimal; }
};

/// Two-phase bounded-variable revised simplex with Bland's-rule fallback.
/// A numerically suspect basis is reported as Status::failed, never as a
/// wrong optimum. Throws std::invalid_argument on dimension mismatch.
LpSolution lp_solve(const LpProblem& problem);

/// True iff some point satisfies all rows and boxes within tolerance
/// (phase 1 only). Inverted bounds make the problem infeasible rather than
/// raising an error.
bool lp_feasible(const LpProblem& problem);

}  // namespace decoykit
