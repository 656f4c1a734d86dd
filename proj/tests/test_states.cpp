#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "qmix/error.hpp"
#include "qmix/states.hpp"

using namespace qmix;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

template <typename F>
ErrorKind error_kind(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::IoError;
}

double sum_sq(const std::vector<double>& v) {
  return std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
}

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

}  // namespace

TEST_CASE("DensityMatrix validates its invariants") {
  CHECK_NOTHROW(DensityMatrix(1, Matrix::identity(2) * 0.5));
  CHECK(error_kind([] { DensityMatrix(1, Matrix::identity(2)); }) == ErrorKind::InvalidState);  // trace 2
  Matrix neg(2);
  neg(0, 0) = 1.2;
  neg(1, 1) = -0.2;
  CHECK(error_kind([&] { DensityMatrix(1, neg); }) == ErrorKind::InvalidState);
  Matrix skew = Matrix::identity(2) * 0.5;
  skew(0, 1) = 0.1;
  CHECK(error_kind([&] { DensityMatrix(1, skew); }) == ErrorKind::InvalidState);
}

TEST_CASE("tetrahedron constants") {
  const auto v = TetrahedronGeometry::vertices();
  CHECK_THAT(v[3][2], WithinAbs(0.75 * std::sqrt(2.0 / 3.0), 1e-16));
  CHECK(v[3][0] == 0.0);
  CHECK(v[3][1] == 0.0);
  for (int i = 0; i < 4; ++i) {
    CHECK_THAT(norm(v[i]), WithinAbs(std::sqrt(6.0) / 4.0, 1e-15));
    for (int j = i + 1; j < 4; ++j) {
      const Vec3 d{v[i][0] - v[j][0], v[i][1] - v[j][1], v[i][2] - v[j][2]};
      CHECK_THAT(norm(d), WithinAbs(1.0, 1e-15));
    }
  }
  CHECK_THAT(TetrahedronGeometry::face_radius(), WithinAbs(0.25 * std::sqrt(2.0 / 3.0), 1e-16));
  CHECK_THAT(TetrahedronGeometry::edge_radius(), WithinAbs(std::sqrt(2.0) / 4.0, 1e-16));
  CHECK_THAT(TetrahedronGeometry::vertex_radius(), WithinAbs(std::sqrt(6.0) / 4.0, 1e-16));
  // Radii correspond to R = 3, 2 and 1.
  CHECK_THAT(TetrahedronGeometry::radius_for_ratio(3.0), WithinAbs(TetrahedronGeometry::face_radius(), 1e-15));
  CHECK_THAT(TetrahedronGeometry::radius_for_ratio(2.0), WithinAbs(TetrahedronGeometry::edge_radius(), 1e-15));
  CHECK_THAT(TetrahedronGeometry::radius_for_ratio(1.0), WithinAbs(TetrahedronGeometry::vertex_radius(), 1e-15));
  CHECK(error_kind([] { TetrahedronGeometry::radius_for_ratio(4.5); }) == ErrorKind::BadRatio);
}

TEST_CASE("simplex mapping") {
  const auto centre = simplex_to_eigenvalues({0.0, 0.0, 0.0});
  for (double w : centre.weights) CHECK_THAT(w, WithinAbs(0.25, 1e-16));
  const auto v = TetrahedronGeometry::vertices();
  const auto pure = simplex_to_eigenvalues(v[3]);
  CHECK_THAT(pure.weights[0], WithinAbs(0.0, 1e-15));
  CHECK_THAT(pure.weights[1], WithinAbs(0.0, 1e-15));
  CHECK_THAT(pure.weights[2], WithinAbs(0.0, 1e-15));
  CHECK_THAT(pure.weights[3], WithinAbs(1.0, 1e-15));
  CHECK(error_kind([&] { simplex_to_eigenvalues({0.0, 0.0, 1.0}); }) == ErrorKind::OutsideTetrahedron);

  RandomStream rng(4);
  for (int rep = 0; rep < 200; ++rep) {
    const SimplexPoint p = uniform_simplex(4, rng);
    const Vec3 r = eigenvalues_to_simplex(p);
    const SimplexPoint back = simplex_to_eigenvalues(r);
    for (int i = 0; i < 4; ++i) CHECK_THAT(back.weights[i], WithinAbs(p.weights[i], 1e-14));
    // r^2 = -1/8 + (1/2) sum lambda^2
    CHECK_THAT(norm(r) * norm(r), WithinAbs(-0.125 + 0.5 * sum_sq(p.weights), 1e-14));
  }
}

TEST_CASE("random states satisfy the density-matrix invariants and are reproducible") {
  for (int n : {2, 3, 4}) {
    RandomStream a(99), b(99);
    const DensityMatrix x = random_density(n, a), y = random_density(n, b);
    CHECK(x.matrix() == y.matrix());
    CHECK(x.dim() == (std::size_t{1} << n));
  }
  RandomStream rng(1);
  CHECK(error_kind([&] { random_density(5, rng); }) == ErrorKind::UnsupportedSize);
  CHECK(error_kind([&] { random_density(1, rng); }) == ErrorKind::UnsupportedSize);
}

TEST_CASE("Haar unitaries are unitary with uniform phases") {
  RandomStream rng(6);
  double mean_trace_sq = 0.0;
  const int reps = 4000;
  for (int rep = 0; rep < reps; ++rep) {
    const Matrix u = haar_unitary(4, rng);
    CHECK(max_abs_diff(u * u.adjoint(), Matrix::identity(4)) <= 1e-12);
    mean_trace_sq += std::norm(u.trace()) / reps;
  }
  // E|Tr U|^2 = 1 for Haar U(d).
  CHECK_THAT(mean_trace_sq, WithinAbs(1.0, 0.08));
}

TEST_CASE("uniform simplex has the Dirichlet(1,...,1) marginals") {
  RandomStream rng(7);
  const int reps = 20000;
  double mean = 0.0, mean_sq = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    const SimplexPoint p = uniform_simplex(4, rng);
    CHECK_NOTHROW(p.validate());
    mean += p.weights[2] / reps;
    mean_sq += p.weights[2] * p.weights[2] / reps;
  }
  CHECK_THAT(mean, WithinAbs(0.25, 0.005));
  CHECK_THAT(mean_sq, WithinAbs(0.1, 0.003));  // E x^2 = 2 / (N (N + 1))
}

TEST_CASE("fixed-ratio spectra land on the sphere in every region") {
  RandomStream rng(31);
  for (double ratio : {1.0, 1.2, 1.7, 2.0, 2.4, 2.9, 3.0, 3.5, 4.0}) {
    for (int rep = 0; rep < 200; ++rep) {
      const auto l = fixed_ratio_spectrum(2, ratio, rng);
      CHECK_THAT(sum_sq(l), WithinAbs(1.0 / ratio, 1e-12));
      CHECK(*std::min_element(l.begin(), l.end()) >= 0.0);
      CHECK_THAT(std::accumulate(l.begin(), l.end(), 0.0), WithinAbs(1.0, 1e-13));
    }
  }
  for (int n : {3, 4}) {
    const double top = static_cast<double>(1 << n);
    for (double ratio : {1.0, 1.3, 2.0, 3.0, 4.0, top / 2, top}) {
      for (int rep = 0; rep < 10; ++rep) {
        const auto l = fixed_ratio_spectrum(n, ratio, rng);
        CHECK_THAT(sum_sq(l), WithinAbs(1.0 / ratio, 1e-12));
        CHECK(*std::min_element(l.begin(), l.end()) >= 0.0);
      }
    }
  }
  CHECK(error_kind([&] { fixed_ratio_spectrum(2, 0.9, rng); }) == ErrorKind::BadRatio);
  CHECK(error_kind([&] { fixed_ratio_spectrum(3, 8.5, rng); }) == ErrorKind::BadRatio);
}

TEST_CASE("fixed-ratio state examples") {
  RandomStream rng(2);
  const DensityMatrix mixed = random_fixed_ratio(2, 4.0, rng);
  CHECK(max_abs_diff(mixed.matrix(), Matrix::identity(4) * 0.25) <= 1e-15);
  const DensityMatrix s = random_fixed_ratio(2, 2.5, rng);
  CHECK_THAT(purity(s), WithinAbs(0.4, 1e-12));
}

TEST_CASE("region III spectra sit in the cap around the fourth vertex") {
  RandomStream rng(9);
  for (double ratio : {1.1, 1.5, 1.9}) {
    const double r = TetrahedronGeometry::radius_for_ratio(ratio);
    const double wc = TetrahedronGeometry::cap_cosine(r);
    for (int rep = 0; rep < 100; ++rep) {
      const auto l = fixed_ratio_spectrum(2, ratio, rng);
      const Vec3 p = eigenvalues_to_simplex(SimplexPoint{l});
      CHECK(p[2] / norm(p) >= wc - 1e-12);
      CHECK(std::max_element(l.begin(), l.end()) - l.begin() == 3);
    }
  }
  // The cap opens at the edge sphere and closes at the vertex. At the edge sphere the root is
  // double, so only ~sqrt(eps) accuracy is available there.
  CHECK_THAT(TetrahedronGeometry::cap_cosine(TetrahedronGeometry::edge_radius()), WithinAbs(1.0 / std::sqrt(3.0), 1e-7));
  CHECK_THAT(TetrahedronGeometry::cap_cosine(TetrahedronGeometry::vertex_radius()), WithinAbs(1.0, 1e-12));
}

TEST_CASE("maximum eigenvalue propositions on fixed-ratio samples") {
  RandomStream rng(15);
  for (int rep = 0; rep < 3000; ++rep) {
    std::uniform_real_distribution<double> u(1.0, 4.0);
    const double ratio = u(rng);
    const auto l = fixed_ratio_spectrum(2, ratio, rng);
    const double lmax = *std::max_element(l.begin(), l.end());
    if (ratio >= 2.0) CHECK(lmax < 1.0 / std::sqrt(2.0));
    if (lmax <= 0.5) CHECK(ratio >= 2.0);
  }
}

TEST_CASE("region classification follows the radii") {
  using Geo = TetrahedronGeometry;
  for (double ratio = 1.0; ratio <= 4.0; ratio += 0.01) {
    const double r = Geo::radius_for_ratio(ratio);
    if (r <= Geo::face_radius() + 1e-15) CHECK(ratio >= 3.0 - 1e-12);
    else if (r <= Geo::edge_radius() + 1e-15) CHECK((ratio >= 2.0 - 1e-12 && ratio < 3.0));
    else CHECK(ratio < 2.0);
  }
}

TEST_CASE("walk and direct rejection agree in distribution") {
  // R = 1.5 stays in the vertex-0 cap, R = 4 covers the connected part of the sphere.
  for (double ratio : {1.5, 4.0}) {
    RandomStream a(41), b(42);
    const int reps = 1500;
    double mean_direct = 0.0, mean_walk = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      auto x = fixed_ratio_spectrum(3, ratio, a);
      auto y = fixed_ratio_walk_spectrum(3, ratio, b);
      std::sort(x.rbegin(), x.rend());
      std::sort(y.rbegin(), y.rend());
      mean_direct += x[1] / reps;
      mean_walk += y[1] / reps;
      CHECK_THAT(sum_sq(y), WithinAbs(1.0 / ratio, 1e-12));
    }
    // Standard error of each mean is below 0.002.
    CHECK_THAT(mean_walk, WithinAbs(mean_direct, 0.01));
  }
}

TEST_CASE("unitary conjugation preserves the participation ratio") {
  RandomStream rng(19);
  for (int rep = 0; rep < 50; ++rep) {
    const DensityMatrix rho = random_density(3, rng);
    const Matrix u = haar_unitary(8, rng);
    const DensityMatrix rotated(3, conjugate_by(u, rho.matrix()));
    CHECK_THAT(participation_ratio(rotated), WithinAbs(participation_ratio(rho), 1e-12));
  }
}

TEST_CASE("Werner families") {
  CHECK(max_abs_diff(werner2(0.0).matrix(), Matrix::identity(4) * 0.25) <= 1e-16);
  CHECK(max_abs_diff(werner2(1.0).matrix(), ghz(2).matrix()) <= 1e-16);
  for (double p : {0.1, 0.4, 0.8})
    CHECK_THAT(participation_ratio(werner2(p)), WithinRel(4.0 / (1.0 + 3.0 * p * p), 1e-12));
  CHECK_THAT(participation_ratio(werner2(1.0 / std::sqrt(3.0))), WithinAbs(2.0, 1e-12));

  CHECK(max_abs_diff(werner3(1.0).matrix(), ghz(3).matrix()) <= 1e-16);
  CHECK(max_abs_diff(werner3(0.0).matrix(), Matrix::identity(8) * 0.125) <= 1e-16);
  CHECK_THAT(participation_ratio(werner3(0.2)), WithinAbs(25.0 / 4.0, 1e-12));
  CHECK_THAT(participation_ratio(werner3(0.5)), WithinAbs(32.0 / 11.0, 1e-12));
  // Spectrum (1 - 7x, x, ..., x) with x = (1 - x~) / 8.
  const auto ev = werner3(0.6).eigenvalues();
  CHECK_THAT(ev[0], WithinAbs(1.0 - 7.0 * 0.05, 1e-14));
  for (int k = 1; k < 8; ++k) CHECK_THAT(ev[k], WithinAbs(0.05, 1e-14));

  CHECK(error_kind([] { werner2(1.1); }) == ErrorKind::BadWeight);
  CHECK(error_kind([] { werner3(-0.1); }) == ErrorKind::BadWeight);
}

TEST_CASE("Bell-diagonal states") {
  CHECK(max_abs_diff(bell_diagonal(SimplexPoint{{1, 0, 0, 0}}).matrix(), ghz(2).matrix()) <= 1e-15);
  CHECK(max_abs_diff(bell_diagonal(SimplexPoint{{0.25, 0.25, 0.25, 0.25}}).matrix(), Matrix::identity(4) * 0.25) <= 1e-15);
  CHECK(error_kind([] { bell_diagonal(SimplexPoint{{0.5, 0.6, 0, 0}}); }) == ErrorKind::BadWeight);
  CHECK(error_kind([] { bell_diagonal(SimplexPoint{{1.1, -0.1, 0, 0}}); }) == ErrorKind::BadWeight);
  CHECK(error_kind([] { bell_diagonal(SimplexPoint{{0.5, 0.5}}); }) == ErrorKind::BadWeight);

  RandomStream rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    const SimplexPoint w = random_bell_weights(rng);
    CHECK_NOTHROW(w.validate());
    auto sorted = w.weights;
    std::sort(sorted.rbegin(), sorted.rend());
    const auto ev = bell_diagonal(w).eigenvalues();
    for (int k = 0; k < 4; ++k) CHECK_THAT(ev[k], WithinAbs(sorted[k], 1e-14));
  }
}

TEST_CASE("GHZ and named states") {
  for (int n : {2, 3, 4}) {
    const DensityMatrix g = ghz(n);
    CHECK_THAT(participation_ratio(g), WithinAbs(1.0, 1e-14));
    const std::size_t last = (std::size_t{1} << n) - 1;
    CHECK_THAT(g.matrix()(0, last).real(), WithinAbs(0.5, 1e-16));
    CHECK_THAT(g.matrix()(last, last).real(), WithinAbs(0.5, 1e-16));
  }
  CHECK(error_kind([] { ghz(1); }) == ErrorKind::UnsupportedSize);
  CHECK_THAT(participation_ratio(maximally_mixed(2)), WithinAbs(4.0, 1e-14));
  CHECK_THAT(max_eigenvalue(basis_state(3, 5)), WithinAbs(1.0, 1e-15));
  const DensityMatrix p = product(basis_state(1, 0), maximally_mixed(1));
  CHECK(p.n_qubits() == 2);
  CHECK_THAT(participation_ratio(p), WithinAbs(2.0, 1e-14));
}

TEST_CASE("state files round-trip exactly") {
  RandomStream rng(77);
  const DensityMatrix rho = random_density(3, rng);
  const DensityMatrix back = parse_state_text(to_state_text(rho));
  CHECK(back.n_qubits() == 3);
  CHECK(back.matrix() == rho.matrix());

  const auto path = std::filesystem::temp_directory_path() / "qmix_state_roundtrip.json";
  write_state(rho, path);
  CHECK(read_state(path).matrix() == rho.matrix());
  std::filesystem::remove(path);

  CHECK(error_kind([] { parse_state_text("{\"n_qubits\": 2}"); }) == ErrorKind::ParseError);
  CHECK(error_kind([] { parse_state_text("not json"); }) == ErrorKind::ParseError);
  CHECK(error_kind([] { read_state("/nonexistent/dir/state.json"); }) == ErrorKind::IoError);
}
