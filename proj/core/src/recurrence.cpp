#include "supercrit/recurrence.hpp"

#include <cmath>
#include <limits>

#include "supercrit/rootfind.hpp"

namespace supercrit {

namespace {

constexpr double kLargeP = 1e6;

// step equation for q > 1: (2p/(2+a))(1-d) - 1 + d^p, root d in (0,1)
double power_step(double p, double a, double d) {
  return (2.0 * p / (2.0 + a)) * (1.0 - d) - 1.0 + std::pow(d, p);
}

// step equation for q = 1: (2/(2+a)) log(1/y) - 1 + y, root y in (0,1)
double log_step(double a, double y) {
  return (2.0 / (2.0 + a)) * (-std::log(y)) - 1.0 + y;
}

}  // namespace

bool RecurrenceTable::multiple_exponential() const {
  return !(p_ < kLargeP);
}

const RecurrenceRow& RecurrenceTable::row(int k) const {
  if (k < 1 || k > k_max())
    throw domain_error("RecurrenceTable::row: k out of range");
  return rows_[static_cast<std::size_t>(k - 1)];
}

RecurrenceTable build_table(double q, int k_max, double tol) {
  if (!(q >= 1.0) || !(q < 2.0))
    throw domain_error("build_table: q must lie in [1,2)");
  if (k_max < 1) throw domain_error("build_table: k_max must be >= 1");
  if (!(tol > 0.0)) throw domain_error("build_table: tol must be positive");

  const double p = q == 1.0 ? std::numeric_limits<double>::infinity()
                            : q / (q - 1.0);
  const bool log_branch = !(p < kLargeP);

  std::vector<RecurrenceRow> rows;
  rows.reserve(static_cast<std::size_t>(k_max));

  RecurrenceRow r;
  r.k = 1;
  r.a = 2.0;
  r.delta = 1.0;
  r.eta = 1.0;
  r.eta_tilde = 1.0;
  rows.push_back(r);

  const double eps = 1e-15;
  for (int k = 1; k < k_max; ++k) {
    const RecurrenceRow& cur = rows.back();
    RecurrenceRow next;
    next.k = k + 1;
    if (!log_branch) {
      auto f = [&](double d) { return power_step(p, cur.a, d); };
      RootResult root = find_root_bracketed(f, eps, 1.0 - eps, 1e-16, 0.0, 400);
      if (!root.converged || std::fabs(root.residual) > tol)
        throw numeric_error("build_table: ratio bracket failed at k=" +
                            std::to_string(k) + " (residual " +
                            std::to_string(root.residual) + ")");
      double d = root.x;
      next.residual = std::fabs(root.residual);
      next.delta = cur.delta * d;
      next.a = 2.0 - std::pow(d, p - 1.0) * (2.0 + cur.a);
      next.eta = std::pow(next.delta, p);
      next.eta_tilde = std::pow(next.delta, p - 1.0);  // eta^{1/q} = delta^{p-1}
    } else {
      auto f = [&](double y) { return log_step(cur.a, y); };
      RootResult root = find_root_bracketed(f, eps, 1.0 - eps, 1e-16, 0.0, 400);
      if (!root.converged || std::fabs(root.residual) > tol)
        throw numeric_error("build_table: ratio bracket failed at k=" +
                            std::to_string(k));
      double y = root.x;
      next.residual = std::fabs(root.residual);
      next.delta = 1.0;
      next.eta = cur.eta * y;
      next.eta_tilde = next.eta;
      next.a = 2.0 - y * (2.0 + cur.a);
    }
    rows.push_back(next);
  }

  // derived oscillation constants
  for (auto& row : rows) {
    if (!log_branch) {
      double shrink = 1.0 - row.a / (2.0 * (p - 1.0));
      row.delta_star = shrink * row.delta;
      row.alpha_star = (2.0 + row.a) * std::pow(shrink, p - 1.0);
      row.eta_star = std::pow(row.delta_star, p);
    } else {
      row.delta_star = 1.0;
      row.eta_star = std::exp(-row.a / 2.0) * row.eta;
      row.alpha_star = (2.0 + row.a) * std::exp(-row.a / 2.0);
    }
  }

  return RecurrenceTable(q, p, std::move(rows));
}

double alpha(const RecurrenceTable& table, int k, double x) {
  if (k < 1 || k >= table.k_max())
    throw domain_error("alpha: needs rows k and k+1 in the table");
  const RecurrenceRow& rk = table.row(k);
  const RecurrenceRow& rk1 = table.row(k + 1);
  if (!table.multiple_exponential()) {
    if (!(x >= rk1.delta && x <= rk.delta))
      throw domain_error("alpha: x outside [delta_{k+1}, delta_k]");
    double ratio = x / rk.delta;
    double denom = 1.0 - (2.0 * table.p() / (2.0 + rk.a)) * (1.0 - ratio);
    return 2.0 * std::pow(ratio, table.p()) / denom;
  }
  if (!(x >= rk1.eta && x <= rk.eta))
    throw domain_error("alpha: x outside [eta_{k+1}, eta_k]");
  double ratio = x / rk.eta;
  double denom = 1.0 - (2.0 / (2.0 + rk.a)) * (-std::log(ratio));
  return 2.0 * ratio / denom;
}

TableVerification verify_table(const RecurrenceTable& table) {
  TableVerification out;
  const auto& rows = table.rows();
  const bool log_branch = table.multiple_exponential();

  double sum = 0.0;   // running S_k
  double inner = 0.0; // running sum of 2 a_i / eta~_i
  out.a_strictly_decreasing = true;
  out.height_strictly_decreasing = true;
  out.ratios_in_unit_interval = true;
  out.alpha_star_increasing = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    sum += r.a;
    out.partial_sums.push_back(sum);
    inner += 2.0 * r.a / r.eta_tilde;
    double res = std::fabs(r.eta_tilde * inner - (2.0 + r.a));
    out.identity_residual.push_back(res);
    out.max_identity_residual = std::max(out.max_identity_residual, res);
    if (i > 0) {
      const auto& prev = rows[i - 1];
      if (!(r.a < prev.a)) out.a_strictly_decreasing = false;
      double h = log_branch ? r.eta / prev.eta : r.delta / prev.delta;
      if (!(h > 0.0 && h < 1.0)) out.ratios_in_unit_interval = false;
      if (log_branch ? !(r.eta < prev.eta) : !(r.delta < prev.delta))
        out.height_strictly_decreasing = false;
      if (!(r.alpha_star > prev.alpha_star)) out.alpha_star_increasing = false;
    }
    if (!(r.a > 0.0 && r.a <= 2.0)) out.a_strictly_decreasing = false;
    if (!(r.alpha_star < 2.0)) out.alpha_star_increasing = false;
  }
  out.all_ok = out.a_strictly_decreasing && out.height_strictly_decreasing &&
               out.ratios_in_unit_interval && out.alpha_star_increasing &&
               out.max_identity_residual <= 1e-10;
  return out;
}

}  // namespace supercrit
