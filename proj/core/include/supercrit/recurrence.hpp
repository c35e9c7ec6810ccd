#pragma once

// The energy recurrence sequences (a_k), (delta_k), (eta_k) and the derived
// oscillation constants.  Each step solves an implicit scalar equation for
// the height ratio on (0,1) -- the trivial root at 1 is excluded by the
// bracket -- and propagates the energy a_{k+1}.

#include <span>
#include <vector>

#include "supercrit/errors.hpp"

namespace supercrit {

struct RecurrenceRow {
  int k = 0;
  double a = 0.0;
  double delta = 0.0;
  double eta = 0.0;
  double eta_tilde = 0.0;
  double delta_star = 0.0;
  double eta_star = 0.0;
  double alpha_star = 0.0;
  double residual = 0.0;  // step-equation residual at the accepted root
};

class RecurrenceTable {
 public:
  RecurrenceTable(double q, double p, std::vector<RecurrenceRow> rows)
      : q_(q), p_(p), rows_(std::move(rows)) {}

  double q() const { return q_; }
  double p() const { return p_; }  // +inf when q == 1
  bool multiple_exponential() const;
  int k_max() const { return static_cast<int>(rows_.size()); }
  const RecurrenceRow& row(int k) const;  // 1-based
  const std::vector<RecurrenceRow>& rows() const { return rows_; }

 private:
  double q_, p_;
  std::vector<RecurrenceRow> rows_;
};

// q in [1,2); p from conjugacy (treated as the q = 1 branch once p > 1e6,
// where the power-step equation degenerates to its log-limit form).
RecurrenceTable build_table(double q, int k_max, double tol = 1e-12);

// alpha_{q,k}(x) on [delta_{k+1}, delta_k] (q > 1) or [eta_{k+1}, eta_k]
// (q == 1); requires k < table.k_max().
double alpha(const RecurrenceTable& table, int k, double x);

struct TableVerification {
  std::vector<double> identity_residual;  // |eta~_k sum 2a_i/eta~_i - (2+a_k)|
  std::vector<double> partial_sums;       // S_k = sum_{i<=k} a_i
  bool a_strictly_decreasing = false;
  bool height_strictly_decreasing = false;  // delta (q>1) or eta (q=1)
  bool ratios_in_unit_interval = false;
  bool alpha_star_increasing = false;
  double max_identity_residual = 0.0;
  bool all_ok = false;
};

TableVerification verify_table(const RecurrenceTable& table);

}  // namespace supercrit
