#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "npt/moments.hpp"

using namespace npt;
using Catch::Approx;

TEST_CASE("contraction_of_a_with_adagger") {
  auto c = normal_order_contraction(1, 1);
  REQUIRE(c.size() == 2);
  CHECK(c[0] == std::pair{0, std::uint64_t{1}});
  CHECK(c[1] == std::pair{1, std::uint64_t{1}});

  // already normal-ordered words contract trivially
  for (int n : {0, 1, 4, 9}) {
    auto t = normal_order_contraction(0, n);
    REQUIRE(t.size() == 1);
    CHECK(t[0] == std::pair{0, std::uint64_t{1}});
  }
}

TEST_CASE("contraction_2_2_verified_against_ladder_matrices") {
  auto c = normal_order_contraction(2, 2);
  REQUIRE(c.size() == 3);
  CHECK(c[0].second == 1);
  CHECK(c[1].second == 4);
  CHECK(c[2].second == 2);

  // independent check: multiply truncated ladder matrices and compare the
  // interior of a^2 a+^2 with a+^2 a^2 + 4 a+a + 2
  const int cutoff = 8;
  Eigen::MatrixXcd low = LadderMatrix::make(Mode::a, false, cutoff).entries;
  Eigen::MatrixXcd dag = LadderMatrix::make(Mode::a, true, cutoff).entries;
  Eigen::MatrixXcd lhs = low * low * dag * dag;
  Eigen::MatrixXcd rhs = dag * dag * low * low + 4.0 * dag * low +
                         2.0 * Eigen::MatrixXcd::Identity(cutoff + 1, cutoff + 1);
  CHECK((lhs - rhs).topLeftCorner(cutoff - 2, cutoff - 2).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("swap_rule_trades_b_mode_exponents") {
  auto [i, j] = swap_for_partial_transpose({0, 0, 0, 0}, {0, 1, 0, 1});
  CHECK(i == MultiIndex{0, 0, 0, 1});
  CHECK(j == MultiIndex{0, 1, 0, 0});

  // pairs without b content are untouched
  auto [i2, j2] = swap_for_partial_transpose({1, 1, 0, 0}, {2, 0, 0, 0});
  CHECK(i2 == MultiIndex{1, 1, 0, 0});
  CHECK(j2 == MultiIndex{2, 0, 0, 0});
}

TEST_CASE("swap_rule_is_an_involution_through_degree_3") {
  std::vector<MultiIndex> all;
  for (int d = 0; d <= 3; ++d)
    for (int i1 = 0; i1 <= d; ++i1)
      for (int i2 = 0; i2 <= d - i1; ++i2)
        for (int i3 = 0; i3 <= d - i1 - i2; ++i3)
          all.push_back({i1, i2, i3, d - i1 - i2 - i3});
  REQUIRE(all.size() == 35);
  for (const auto& i : all)
    for (const auto& j : all) {
      auto [si, sj] = swap_for_partial_transpose(i, j);
      auto [ti, tj] = swap_for_partial_transpose(si, sj);
      REQUIRE(ti == i);
      REQUIRE(tj == j);
    }
}

TEST_CASE("singlet_moments_match_hand_values") {
  MomentEvaluator ev{BipartiteState(make_singlet())};
  // Tr[rho] = 1
  MomentValue one = ev({0, 0, 0, 0}, {0, 0, 0, 0});
  REQUIRE(one.is_exact());
  CHECK(one.exact->re == 1);
  // <a+ b> = -1/2
  MomentValue adb = ev({0, 0, 0, 0}, {1, 0, 0, 1});
  REQUIRE(adb.is_exact());
  CHECK(adb.exact->re == make_rational(-1, 2));
  CHECK(adb.exact->im == 0);
}

TEST_CASE("coherent_moments_use_the_eigenvalue_property") {
  // product coherent |alpha>|beta> with alpha = 1: <a+^p a^q> = 1 and
  // <(a+a)(a+a)> = |a|^4 + |a|^2 = 2
  CoherentSuperposition prod(
      std::vector<CoherentSuperposition::Term>{{{1, 0}, {1, 0}, {1, 0}}});
  MomentEvaluator ev{BipartiteState(prod)};
  MomentValue v = ev({1, 1, 0, 0}, {1, 1, 0, 0});
  CHECK(v.value.real() == Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(v.value.imag()) < 1e-14);
  MomentValue n = ev({0, 0, 0, 0}, {1, 1, 0, 0});
  CHECK(n.value.real() == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("exact_backend_raises_on_surviving_surds") {
  // (|00> + |02>)/sqrt(2): <b+^2> picks up a lone sqrt(2)
  FockSuperposition psi({{GaussianRational(1, 0), 0, 0}, {GaussianRational(1, 0), 0, 2}});
  MomentEvaluator exact{BipartiteState(psi), Backend::exact};
  CHECK_THROWS_AS(exact({0, 0, 0, 0}, {0, 0, 2, 0}), IrrationalValue);

  MomentEvaluator fallback{BipartiteState(psi), Backend::automatic};
  MomentValue v = fallback({0, 0, 0, 0}, {0, 0, 2, 0});
  CHECK_FALSE(v.is_exact());
  CHECK(v.surd_residue);
  CHECK(v.value.real() == Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));

  // coherent states have no exact path at all
  MomentEvaluator coh{BipartiteState(make_coherent_bell({1, 0}, {1, 0})), Backend::exact};
  CHECK_THROWS_AS(coh({0, 0, 0, 0}, {0, 0, 0, 0}), IrrationalValue);
}

namespace {

// frozen from an independent exact evaluation (symbolic ladder matrices,
// truncated trace at cutoff 5): M(rho^Gamma) for the singlet over the
// 15 sv-compatible operators, times 4 to keep the table integral
const int kSingletGamma4x[15][15] = {
    {4, 0, 0, 0, 0, 2, 2, -2, 0, 0, -2, 0, 0, 0, 0},
    {0, 2, 0, 0, -2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {0, 0, 6, -2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {0, 0, -2, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {0, -2, 0, 0, 6, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {2, 0, 0, 0, 0, 2, 0, 0, 0, 0, -2, 0, 0, 0, 0},
    {2, 0, 0, 0, 0, 0, 2, 0, 0, 0, -2, 0, 0, 0, 0},
    {-2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {0, 0, 0, 0, 0, 0, 0, 0, 2, 0, 0, 0, -4, 0, 0},
    {0, 0, 0, 0, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, -4},
    {-2, 0, 0, 0, 0, -2, -2, 0, 0, 0, 8, 0, 0, 0, 0},
    {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {0, 0, 0, 0, 0, 0, 0, 0, -4, 0, 0, 0, 16, 0, 0},
    {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {0, 0, 0, 0, 0, 0, 0, 0, 0, -4, 0, 0, 0, 0, 16}};

}  // namespace

TEST_CASE("singlet_transposed_matrix_matches_the_oracle_table") {
  OperatorOrdering ordering = OperatorOrdering::sv_compatible(15);
  MomentMatrix m =
      build_moment_matrix(BipartiteState(make_singlet()), ordering, 15, /*transposed=*/true);
  REQUIRE(m.fully_exact());
  for (std::size_t p = 0; p < 15; ++p)
    for (std::size_t q = 0; q < 15; ++q) {
      const GaussianRational& v = *m.at(p, q).exact;
      REQUIRE(v.im == 0);
      REQUIRE(v.re == make_rational(kSingletGamma4x[p][q], 4));
    }
}

TEST_CASE("size_one_matrix_is_the_unit_trace") {
  OperatorOrdering ordering = OperatorOrdering::sv_compatible(15);
  MomentMatrix m =
      build_moment_matrix(BipartiteState(make_singlet()), ordering, 1, /*transposed=*/true);
  REQUIRE(m.size == 1);
  CHECK(m.at(0, 0).exact->re == 1);
}

TEST_CASE("built_matrices_are_hermitian_including_exact_entries") {
  OperatorOrdering ordering = OperatorOrdering::sv_compatible(15);
  FockSuperposition psi({{GaussianRational(make_rational(1), make_rational(1, 3)), 0, 1},
                         {GaussianRational(make_rational(-1, 2), make_rational(2)), 2, 0},
                         {GaussianRational(1, 0), 1, 1}});
  for (bool transposed : {false, true}) {
    MomentMatrix m = build_moment_matrix(BipartiteState(psi), ordering, 15, transposed);
    for (std::size_t p = 0; p < m.size; ++p)
      for (std::size_t q = 0; q < m.size; ++q) {
        CHECK(m.at(p, q).value == std::conj(m.at(q, p).value));
        if (m.at(p, q).is_exact()) {
          REQUIRE(m.at(q, p).is_exact());
          CHECK(*m.at(p, q).exact == m.at(q, p).exact->conj());
        }
      }
  }
}

TEST_CASE("untransposed_matrix_is_a_psd_gram_matrix_with_nonnegative_diagonal") {
  OperatorOrdering ordering = OperatorOrdering::sv_compatible(15);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<FockSuperposition::Term> terms;
    for (int t = 0; t < 3; ++t)
      terms.push_back({GaussianRational::from_double(unit(rng), unit(rng)),
                       static_cast<int>(rng() % 3), static_cast<int>(rng() % 3)});
    MomentMatrix m = build_moment_matrix(BipartiteState(FockSuperposition(terms)), ordering, 15,
                                         /*transposed=*/false);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m.complex_matrix(), Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    for (std::size_t p = 0; p < m.size; ++p) {
      CHECK(std::abs(m.at(p, p).value.imag()) < 1e-12);
      CHECK(m.at(p, p).value.real() >= -1e-12);
    }
  }
}

TEST_CASE("cross_validation_agrees_between_paths") {
  OperatorOrdering ordering = OperatorOrdering::sv_compatible(15);
  // finite Fock support: both paths exact, discrepancy literally zero
  CHECK(cross_validate_backends(BipartiteState(make_singlet()), ordering, 8, true) <= 1e-12);
  // coherent states: analytic vs truncated trace at the rule cutoff
  BipartiteState bell{make_coherent_bell({1, 0}, {1, 0})};
  CHECK(cross_validate_backends(bell, ordering, 10, true) <= 1e-9);
  // inadequate cutoff: the trace path refuses
  CHECK_THROWS_AS(cross_validate_backends(bell, ordering, 10, true, std::pair{6, 6}),
                  TruncationTooSevere);
}

TEST_CASE("transposed_and_plain_matrices_share_cached_moments") {
  MomentEvaluator ev{BipartiteState(make_singlet())};
  OperatorOrdering ordering = OperatorOrdering::sv_compatible(15);
  MomentMatrix gamma = build_moment_matrix(ev, ordering, 15, true);
  MomentMatrix plain = build_moment_matrix(ev, ordering, 15, false);
  // entry sets coincide up to the index swap
  for (std::size_t p = 0; p < 15; ++p)
    for (std::size_t q = 0; q < 15; ++q) {
      auto [si, sj] = swap_for_partial_transpose(ordering.at(p), ordering.at(q));
      std::size_t sp = ordering.position_of(si), sq = ordering.position_of(sj);
      if (sp == 0 || sq == 0) continue;  // swapped word outside the enumeration
      CHECK(gamma.at(p, q).value == plain.at(sp - 1, sq - 1).value);
    }
}

TEST_CASE("backend_float_never_carries_exact_values") {
  MomentEvaluator ev{BipartiteState(make_singlet()), Backend::floating};
  OperatorOrdering ordering = OperatorOrdering::sv_compatible(15);
  MomentMatrix m = build_moment_matrix(ev, ordering, 15, true);
  CHECK_FALSE(m.fully_exact());
  for (const auto& e : m.entries) CHECK_FALSE(e.is_exact());
  // but the values agree with the exact backend
  MomentMatrix mx = build_moment_matrix(BipartiteState(make_singlet()), ordering, 15, true,
                                        Backend::exact);
  for (std::size_t k = 0; k < m.entries.size(); ++k)
    CHECK(std::abs(m.entries[k].value - mx.entries[k].value) < 1e-12);
}

TEST_CASE("matrix_size_must_fit_the_ordering") {
  OperatorOrdering ordering = OperatorOrdering::sv_compatible(15);
  CHECK_THROWS_AS(
      build_moment_matrix(BipartiteState(make_singlet()), ordering, 16, true),
      std::invalid_argument);
}

TEST_CASE("orderings_are_graded_deduplicated_and_named") {
  OperatorOrdering sv = OperatorOrdering::sv_compatible(35);
  REQUIRE(sv.size() == 35);
  CHECK(sv.at(0).is_identity());
  for (std::size_t k = 0; k + 1 < sv.size(); ++k)
    CHECK(sv.at(k).degree() <= sv.at(k + 1).degree());
  CHECK(sv.at(7) == MultiIndex{0, 1, 0, 1});  // a b sits at position 8

  OperatorOrdering gr = OperatorOrdering::grlex(15);
  CHECK(gr.at(1) == MultiIndex{0, 0, 0, 1});  // lexicographic within degree

  CHECK_THROWS_AS(OperatorOrdering("bad", {{1, 0, 0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(OperatorOrdering("dup", {{0, 0, 0, 0}, {1, 0, 0, 0}, {1, 0, 0, 0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(OperatorOrdering("ungraded", {{0, 0, 0, 0}, {1, 1, 0, 0}, {1, 0, 0, 0}}),
                  std::invalid_argument);
}

TEST_CASE("operator_words_render_readably") {
  CHECK(MultiIndex{0, 0, 0, 0}.word() == "1");
  CHECK(MultiIndex{0, 1, 0, 1}.word() == "a b");
  CHECK(MultiIndex{2, 0, 1, 0}.word() == "a+^2 b+");
  CHECK(MultiIndex{1, 2, 0, 3}.word() == "a+ a^2 b^3");
}
