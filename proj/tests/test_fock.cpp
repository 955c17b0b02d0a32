#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "npt/fock.hpp"
#include "npt/moments.hpp"

using namespace npt;
using Catch::Approx;

TEST_CASE("singlet_has_the_two_expected_terms") {
  FockSuperposition psi = make_singlet();
  REQUIRE(psi.terms().size() == 2);
  CHECK(psi.amplitude(0, 1).real() == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(psi.amplitude(1, 0).real() == Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(psi.norm_sq() == make_rational(2));
  // overlap with |00> vanishes: disjoint Fock support
  CHECK(psi.amplitude(0, 0) == std::complex<double>{});
  double norm = std::norm(psi.amplitude(0, 1)) + std::norm(psi.amplitude(1, 0));
  CHECK(norm == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fock_constructor_merges_duplicates_and_rejects_zero_norm") {
  FockSuperposition psi({{GaussianRational(1, 0), 0, 0}, {GaussianRational(2, 0), 0, 0}});
  REQUIRE(psi.terms().size() == 1);
  CHECK(psi.terms()[0].amp == GaussianRational(3, 0));

  // exact cancellation leaves nothing to normalize
  CHECK_THROWS_AS(FockSuperposition({{GaussianRational(1, 0), 0, 0},
                                     {GaussianRational(-1, 0), 0, 0}}),
                  DegenerateState);
  CHECK_THROWS_AS(FockSuperposition({}), DegenerateState);
}

TEST_CASE("coherent_bell_normalization_constant") {
  CoherentSuperposition bell = make_coherent_bell({1.0, 0.0}, {1.0, 0.0});
  // c = [2 - 2 exp(-2|a|^2 - 2|b|^2)]^{-1/2}, here [2 - 2 e^-4]^{-1/2}
  double c = 1.0 / std::sqrt(2.0 - 2.0 * std::exp(-4.0));
  CHECK(bell.normalization() == Approx(c).epsilon(1e-14));
  CHECK(std::abs(bell.terms()[0].amp) == Approx(c).epsilon(1e-14));

  // norm of the result is 1 for any admissible input
  for (auto [al, be] : {std::pair{0.3, 1.2}, {1.5, 0.0}, {0.7, 0.7}}) {
    CoherentSuperposition s = make_coherent_bell({al, 0.1}, {be, -0.2});
    CHECK(std::abs(s.normal_expectation(0, 0, 0, 0)) == Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("coherent_bell_degenerate_at_origin") {
  CHECK_THROWS_AS(make_coherent_bell({0.0, 0.0}, {0.0, 0.0}), DegenerateState);
}

TEST_CASE("coherent_overlap_matches_truncated_inner_product") {
  std::complex<double> alpha{1.2, 0.4};
  int cutoff = adequate_cutoff(std::norm(alpha));
  std::complex<double> dot{};
  for (int n = 0; n <= cutoff; ++n)
    dot += std::conj(CoherentSuperposition::fock_amplitude(alpha, n)) *
           CoherentSuperposition::fock_amplitude(-alpha, n);
  CHECK(std::abs(dot - coherent_overlap(alpha, -alpha)) < 1e-9);
}

TEST_CASE("singlet_density_matrix_is_the_rank_one_projector") {
  TruncatedDensityMatrix rho = to_density_matrix(BipartiteState(make_singlet()), 1, 1);
  REQUIRE(rho.dim() == 4);
  REQUIRE(rho.has_exact());
  CHECK(rho.discarded_weight() == 0.0);
  Rational half = make_rational(1, 2);
  // basis 00, 01, 10, 11 (mode a slow)
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      const GaussianRational& v = rho.exact_at(r, c);
      CHECK(v.is_real());
      if ((r == 1 && c == 1) || (r == 2 && c == 2))
        CHECK(v.re == half);
      else if ((r == 1 && c == 2) || (r == 2 && c == 1))
        CHECK(v.re == -half);
      else
        CHECK(v.re == 0);
    }
}

TEST_CASE("truncation_that_discards_all_support_is_fatal") {
  CHECK_THROWS_AS(to_density_matrix(BipartiteState(make_singlet()), 0, 0), TruncationTooSevere);
}

TEST_CASE("coherent_bell_truncation_weights") {
  BipartiteState bell{make_coherent_bell({1.0, 0.0}, {1.0, 0.0})};

  // at the adequacy-rule cutoff the tail is below the default threshold
  int rule = adequate_cutoff(1.0);
  REQUIRE(rule == 19);
  TruncatedDensityMatrix ok = to_density_matrix(bell, rule, rule);
  CHECK(std::abs(ok.discarded_weight()) < 1e-12);

  // cutoff 12 discards ~1.45e-10, fatal at the default threshold but fine
  // at an oracle-grade 1e-8
  CHECK_THROWS_AS(to_density_matrix(bell, 12, 12), TruncationTooSevere);
  TruncatedDensityMatrix loose = to_density_matrix(bell, 12, 12, 1e-8);
  CHECK(loose.discarded_weight() == Approx(1.448e-10).epsilon(0.05));
}

TEST_CASE("ladder_matrices_are_mutual_adjoints_with_number_diagonal") {
  const int cutoff = 7;
  LadderMatrix low = LadderMatrix::make(Mode::a, false, cutoff);
  LadderMatrix dag = LadderMatrix::make(Mode::a, true, cutoff);
  CHECK((low.entries.adjoint() - dag.entries).cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXcd number = dag.entries * low.entries;
  for (int n = 0; n <= cutoff; ++n) {
    CHECK(std::abs(number(n, n) - std::complex<double>(n, 0)) < 1e-12);
    for (int m = 0; m <= cutoff; ++m)
      if (m != n) CHECK(number(m, n) == std::complex<double>{});
  }

  // [a, a+] = 1 away from the truncation boundary
  Eigen::MatrixXcd comm = low.entries * dag.entries - dag.entries * low.entries;
  for (int n = 0; n < cutoff; ++n) CHECK(std::abs(comm(n, n) - 1.0) < 1e-12);
  CHECK(std::abs(comm(cutoff, cutoff) + double(cutoff)) < 1e-12);  // boundary row excluded
}

TEST_CASE("exact_ladder_number_operator_is_the_integer_diagonal") {
  // sqrt(n) * sqrt(n) collapses to the integer n in the surd ring, so the
  // number operator and interior commutator are exact
  const int cutoff = 6;
  auto low = detail::exact_ladder(cutoff, false);
  auto dag = detail::exact_ladder(cutoff, true);
  auto number = dag * low;
  for (int n = 0; n <= cutoff; ++n) {
    for (int m = 0; m <= cutoff; ++m) {
      const SurdSum& v = number.at(m, n);
      if (m == n) {
        REQUIRE(v.is_rational());
        CHECK(v.as_rational() == GaussianRational(n, 0));
      } else {
        CHECK(v.is_zero());
      }
    }
  }
  auto left = low * dag;
  for (int n = 0; n < cutoff; ++n) {
    SurdSum comm = left.at(n, n);
    comm -= number.at(n, n);
    CHECK(comm.as_rational() == GaussianRational(1, 0));
  }
}

TEST_CASE("apply_word_moves_photons_and_tracks_leakage") {
  const int na = 2, nb = 2, db = nb + 1;
  Eigen::VectorXcd v01 = Eigen::VectorXcd::Zero((na + 1) * db);
  v01(0 * db + 1) = 1.0;  // |01>

  // a+ b : single photon transfer |01> -> |10>
  LadderFactor word1[] = {{Mode::a, true}, {Mode::b, false}};
  ApplyResult r1 = apply_word(v01, word1, na, nb);
  CHECK(r1.leakage == 0.0);
  CHECK(std::abs(r1.vec(1 * db + 0) - std::complex<double>(1, 0)) < 1e-15);
  CHECK(r1.vec.norm() == Approx(1.0));

  // vacuum annihilation: zero vector, no leakage
  Eigen::VectorXcd v00 = Eigen::VectorXcd::Zero((na + 1) * db);
  v00(0) = 1.0;
  LadderFactor word2[] = {{Mode::a, false}};
  ApplyResult r2 = apply_word(v00, word2, na, nb);
  CHECK(r2.vec.norm() == 0.0);
  CHECK(r2.leakage == 0.0);

  // |11> is a number-operator eigenstate of a+a b+b
  Eigen::VectorXcd v11 = Eigen::VectorXcd::Zero((na + 1) * db);
  v11(1 * db + 1) = 1.0;
  LadderFactor word3[] = {{Mode::a, true}, {Mode::a, false}, {Mode::b, true}, {Mode::b, false}};
  ApplyResult r3 = apply_word(v11, word3, na, nb);
  CHECK((r3.vec - v11).norm() < 1e-15);

  // raising at the cutoff leaks |amp|^2 (n+1)
  Eigen::VectorXcd vtop = Eigen::VectorXcd::Zero((na + 1) * db);
  vtop(na * db + 0) = 0.5;
  LadderFactor word4[] = {{Mode::a, true}};
  ApplyResult r4 = apply_word(vtop, word4, na, nb);
  CHECK(r4.vec.norm() == 0.0);
  CHECK(r4.leakage == Approx(0.25 * (na + 1)).epsilon(1e-14));
}

TEST_CASE("density_inputs_embed_and_project_across_cutoffs") {
  TruncatedDensityMatrix rho = to_density_matrix(BipartiteState(make_singlet()), 1, 1);

  // embedding into a larger space keeps every entry and the exact copy
  TruncatedDensityMatrix big = to_density_matrix(BipartiteState(rho), 2, 2);
  REQUIRE(big.dim() == 9);
  REQUIRE(big.has_exact());
  CHECK(big.exact_at(big.index(0, 1), big.index(1, 0)).re == make_rational(-1, 2));
  CHECK(big.entries().trace().real() == Approx(1.0).margin(1e-14));

  // projecting |00>+|11> down to (1,0) keeps only the |00> block
  FockSuperposition phi({{GaussianRational(1, 0), 0, 0}, {GaussianRational(1, 0), 1, 1}});
  TruncatedDensityMatrix full = to_density_matrix(BipartiteState(phi), 1, 1);
  TruncatedDensityMatrix proj = to_density_matrix(BipartiteState(full), 1, 0, 0.6);
  REQUIRE(proj.dim() == 2);
  CHECK(proj.discarded_weight() == Approx(0.5).margin(1e-12));
  CHECK(proj.entries()(0, 0).real() == Approx(1.0).margin(1e-12));
}

TEST_CASE("density_matrix_validation_rejects_bad_input") {
  Eigen::MatrixXcd good = Eigen::MatrixXcd::Zero(4, 4);
  good(0, 0) = 1.0;
  CHECK_NOTHROW(TruncatedDensityMatrix(1, 1, good));

  Eigen::MatrixXcd not_hermitian = good;
  not_hermitian(0, 1) = 0.5;
  CHECK_THROWS_AS(TruncatedDensityMatrix(1, 1, not_hermitian), std::invalid_argument);

  Eigen::MatrixXcd bad_trace = good * 2.0;
  CHECK_THROWS_AS(TruncatedDensityMatrix(1, 1, bad_trace), std::invalid_argument);

  Eigen::MatrixXcd negative = Eigen::MatrixXcd::Zero(4, 4);
  negative(0, 0) = 1.5;
  negative(1, 1) = -0.5;
  CHECK_THROWS_AS(TruncatedDensityMatrix(1, 1, negative), std::invalid_argument);
}

TEST_CASE("state_fingerprints_distinguish_states") {
  std::string singlet = state_fingerprint(BipartiteState(make_singlet()));
  std::string again = state_fingerprint(BipartiteState(make_singlet()));
  std::string bell = state_fingerprint(BipartiteState(make_coherent_bell({1, 0}, {1, 0})));
  CHECK(singlet == again);
  CHECK(singlet != bell);
}
