#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qmix/entropic.hpp"
#include "qmix/error.hpp"
#include "qmix/states.hpp"

using namespace qmix;
using Catch::Matchers::WithinAbs;

namespace {

// prod lambda^lambda, written without logarithms.
double self_power_product(const std::vector<double>& spectrum) {
  double p = 1.0;
  for (double l : spectrum)
    if (l > 0.0) p *= std::pow(l, l);
  return p;
}

std::vector<double> reduced_spectrum(const DensityMatrix& rho, int keep) {
  const std::array<int, 1> k{keep};
  return hermitian_eigenvalues(partial_trace(rho.matrix(), 2, k));
}

}  // namespace

TEST_CASE("von Neumann entropy examples") {
  CHECK_THAT(von_neumann_entropy(ghz(2)), WithinAbs(0.0, 1e-12));
  CHECK_THAT(von_neumann_entropy(maximally_mixed(2)), WithinAbs(std::log(4.0), 1e-14));
  const std::array<double, 2> q{0.9, 0.1};
  CHECK_THAT(spectrum_entropy(q), WithinAbs(0.3250829733914482, 1e-15));
  const std::array<double, 3> with_zero{0.5, 0.5, 0.0};
  CHECK_THAT(spectrum_entropy(with_zero), WithinAbs(std::log(2.0), 1e-15));
}

TEST_CASE("entropy bounds and unitary invariance") {
  RandomStream rng(11);
  for (int n : {2, 3, 4}) {
    for (int rep = 0; rep < 30; ++rep) {
      const DensityMatrix rho = random_density(n, rng);
      const double s = von_neumann_entropy(rho);
      CHECK(s >= 0.0);
      CHECK(s <= n * std::log(2.0) + 1e-10);
      const DensityMatrix rotated(n, conjugate_by(haar_unitary(rho.dim(), rng), rho.matrix()));
      CHECK_THAT(von_neumann_entropy(rotated), WithinAbs(s, 1e-10));
    }
  }
}

TEST_CASE("report structure") {
  RandomStream rng(2);
  const std::size_t expected_bipartitions[] = {0, 0, 1, 3, 7};
  for (int n : {2, 3, 4}) {
    const EntropicReport rep = entropic_report(random_density(n, rng));
    CHECK(rep.n_qubits == n);
    CHECK(rep.bipartitions.size() == expected_bipartitions[n]);
    CHECK(rep.entries.size() == 2 * expected_bipartitions[n]);
    double min = 1e300;
    for (const auto& e : rep.entries) min = std::min(min, e.value);
    CHECK(rep.min_conditional == min);
    CHECK(rep.violated == (rep.min_conditional < -1e-12));
    CHECK_THAT(rep.min_conditional_ln2(), WithinAbs(rep.min_conditional / std::log(2.0), 1e-15));
  }
  const EntropicReport two = entropic_report(maximally_mixed(2));
  CHECK(two.entries[0].label(2) == "S(AB)-S(A)");
  CHECK(two.entries[1].label(2) == "S(AB)-S(B)");
  const EntropicReport three = entropic_report(maximally_mixed(3));
  CHECK(three.entries[0].label(3).rfind("S(ABC)-S(", 0) == 0);
  CHECK_THROWS_AS(entropic_report(DensityMatrix(1, Matrix::identity(2) * 0.5)), Error);
}

TEST_CASE("report examples") {
  const EntropicReport bell = entropic_report(ghz(2));
  CHECK_THAT(bell.min_conditional, WithinAbs(-std::log(2.0), 1e-12));
  CHECK(bell.violated);
  const EntropicReport mixed = entropic_report(maximally_mixed(2));
  CHECK_THAT(mixed.min_conditional, WithinAbs(std::log(2.0), 1e-14));
  CHECK_FALSE(mixed.violated);
}

TEST_CASE("classicality examples") {
  CHECK(is_classical(product(basis_state(1, 0), maximally_mixed(1))));
  CHECK_FALSE(is_classical(ghz(3)));
  CHECK(is_classical(werner3(0.1)));
  CHECK_FALSE(is_classical(ghz(4)));
}

TEST_CASE("product-form inequality agrees with the report") {
  // S(AB) >= S(A) <=> prod lambda^lambda <= alpha^alpha (1 - alpha)^(1 - alpha).
  RandomStream rng(10);
  int compared = 0;
  for (int rep = 0; rep < 10000; ++rep) {
    const DensityMatrix rho = random_density(2, rng);
    const double joint = self_power_product(rho.eigenvalues());
    const double a = self_power_product(reduced_spectrum(rho, 0));
    const double b = self_power_product(reduced_spectrum(rho, 1));
    const double margin = std::min(a, b) - joint;
    if (std::abs(margin) < 1e-10) continue;
    ++compared;
    CHECK(entropic_report(rho).violated == (margin < 0.0));
  }
  CHECK(compared > 9900);
}

TEST_CASE("no violations for R >= 2 or lambda_max <= 1/2") {
  RandomStream rng(12);
  for (double ratio : {2.0, 2.5, 3.0, 3.5, 4.0})
    for (int rep = 0; rep < 500; ++rep) CHECK_FALSE(entropic_report(random_fixed_ratio(2, ratio, rng)).violated);
  int low_lmax = 0;
  for (int rep = 0; rep < 5000; ++rep) {
    const DensityMatrix rho = random_density(2, rng);
    if (max_eigenvalue(rho) > 0.5) continue;
    ++low_lmax;
    CHECK_FALSE(entropic_report(rho).violated);
  }
  CHECK(low_lmax > 500);
}

TEST_CASE("subadditivity") {
  RandomStream rng(13);
  for (int rep = 0; rep < 500; ++rep) {
    const DensityMatrix rho = random_density(2, rng);
    const double sa = spectrum_entropy(reduced_spectrum(rho, 0));
    const double sb = spectrum_entropy(reduced_spectrum(rho, 1));
    CHECK(sa + sb >= von_neumann_entropy(rho) - 1e-10);
  }
}

TEST_CASE("single-eigenvalue bound") {
  const double l3 = single_eigenvalue_bound(3);
  CHECK_THAT(l3, WithinAbs(0.90909, 1e-4));
  CHECK(l3 > 1.0 / 8.0);
  // The defining equation holds at the root; the small root near 0.0229 is excluded.
  CHECK_THAT(8.0 * l3 * std::log(l3), WithinAbs(-std::log(2.0), 1e-9));
  CHECK_THAT(single_eigenvalue_ratio(3), WithinAbs(1.2, 0.05));
  for (int n : {2, 3, 4}) {
    const double l = single_eigenvalue_bound(n);
    CHECK(l > 1.0 / std::exp(1.0));
    CHECK(l < 1.0);
    CHECK_THAT(std::pow(std::pow(l, l), std::pow(2.0, n)), WithinAbs(0.5, 1e-9));
  }
}
