#include "qmix/entropic.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/tools/roots.hpp>

#include "qmix/error.hpp"

namespace qmix {

double spectrum_entropy(std::span<const double> eigenvalues) {
  double s = 0.0;
  for (double l : eigenvalues)
    if (l > 1e-12) s -= l * std::log(l);
  return s;
}

double von_neumann_entropy(const DensityMatrix& rho) { return spectrum_entropy(rho.eigenvalues()); }

std::string ConditionalEntry::label(int n_qubits) const {
  // Parties are lettered A, B, C, D from qubit 0.
  std::string out = "S(";
  for (int q = 0; q < n_qubits; ++q) out += static_cast<char>('A' + q);
  out += ")-S(";
  for (int q : reduced) out += static_cast<char>('A' + q);
  return out + ")";
}

double EntropicReport::min_conditional_ln2() const { return min_conditional / std::numbers::ln2; }

EntropicReport entropic_report(const DensityMatrix& rho) {
  const int n = rho.n_qubits();
  checked_dim(n);
  const double total = von_neumann_entropy(rho);

  EntropicReport report;
  report.n_qubits = n;
  report.min_conditional = std::numeric_limits<double>::infinity();

  const unsigned full = (1u << n) - 1;
  // Subsets containing qubit 0 (most significant mask bit), excluding the full set.
  for (unsigned mask = 1; mask < full; ++mask) {
    if (!(mask & (1u << (n - 1)))) continue;
    std::vector<int> side, other;
    for (int q = 0; q < n; ++q) ((mask >> (n - 1 - q)) & 1u ? side : other).push_back(q);
    const int index = static_cast<int>(report.bipartitions.size());
    report.bipartitions.push_back(side);
    for (const auto& kept : {side, other}) {
      const DensityMatrix reduced(static_cast<int>(kept.size()), partial_trace(rho.matrix(), n, kept));
      const double value = total - von_neumann_entropy(reduced);
      report.entries.push_back({kept, index, value});
      report.min_conditional = std::min(report.min_conditional, value);
    }
  }
  report.violated = report.min_conditional < -1e-12;
  return report;
}

bool is_classical(const DensityMatrix& rho) { return !entropic_report(rho).violated; }

double single_eigenvalue_bound(int n_qubits) {
  const double d = static_cast<double>(checked_dim(n_qubits));
  // 2^n lambda ln lambda = -ln 2; lambda ln lambda is increasing on [1/e, 1].
  auto f = [d](double l) { return d * l * std::log(l) + std::numbers::ln2; };
  auto tol = [](double a, double b) { return std::abs(b - a) < 1e-12; };
  const auto [lo, hi] = boost::math::tools::bisect(f, 1.0 / std::numbers::e, 1.0, tol);
  return 0.5 * (lo + hi);
}

double single_eigenvalue_ratio(int n_qubits) {
  const double d = static_cast<double>(checked_dim(n_qubits));
  const double top = single_eigenvalue_bound(n_qubits);
  const double rest = (1.0 - top) / (d - 1.0);
  return 1.0 / (top * top + (d - 1.0) * rest * rest);
}

}  // namespace qmix
