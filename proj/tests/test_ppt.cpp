#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <random>
#include <vector>

#include "npt/minors.hpp"
#include "npt/moments.hpp"
#include "npt/ppt.hpp"

using namespace npt;
using Catch::Approx;

TEST_CASE("singlet_partial_transpose_spectrum") {
  TruncatedDensityMatrix rho = to_density_matrix(BipartiteState(make_singlet()), 1, 1);
  TruncatedDensityMatrix pt = partial_transpose(rho);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(pt.entries(), Eigen::EigenvaluesOnly);
  std::vector<double> eigs(es.eigenvalues().data(), es.eigenvalues().data() + 4);
  std::sort(eigs.begin(), eigs.end());
  CHECK(eigs[0] == Approx(-0.5).margin(1e-12));
  for (int k = 1; k < 4; ++k) CHECK(eigs[k] == Approx(0.5).margin(1e-12));

  // exact entries transpose exactly
  REQUIRE(pt.has_exact());
  CHECK(pt.exact_at(pt.index(0, 0), pt.index(1, 1)).re == make_rational(-1, 2));
}

TEST_CASE("partial_transpose_is_an_entrywise_involution_preserving_the_trace") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<FockSuperposition::Term> terms;
    for (int t = 0; t < 3; ++t)
      terms.push_back({GaussianRational::from_double(unit(rng), unit(rng)),
                       static_cast<int>(rng() % 3), static_cast<int>(rng() % 3)});
    TruncatedDensityMatrix rho =
        to_density_matrix(BipartiteState(FockSuperposition(terms)), 2, 2);
    TruncatedDensityMatrix pt = partial_transpose(rho);
    TruncatedDensityMatrix back = partial_transpose(pt);
    CHECK((back.entries() - rho.entries()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(pt.entries().trace() == rho.entries().trace());
    CHECK((pt.entries() - pt.entries().adjoint()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("diagonal_product_states_are_gamma_invariant") {
  // |0><0| x |1><1|
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
  m(1, 1) = 1.0;  // index (n_a=0, n_b=1)
  TruncatedDensityMatrix rho(1, 1, m);
  TruncatedDensityMatrix pt = partial_transpose(rho);
  CHECK((pt.entries() - rho.entries()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("transposing_either_subsystem_gives_the_same_spectrum") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<FockSuperposition::Term> terms;
    for (int t = 0; t < 3; ++t)
      terms.push_back({GaussianRational::from_double(unit(rng), unit(rng)),
                       static_cast<int>(rng() % 3), static_cast<int>(rng() % 3)});
    TruncatedDensityMatrix rho =
        to_density_matrix(BipartiteState(FockSuperposition(terms)), 2, 2);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> second(partial_transpose(rho).entries(),
                                                           Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> first(
        partial_transpose_first_mode(rho).entries(), Eigen::EigenvaluesOnly);
    CHECK((second.eigenvalues() - first.eigenvalues()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("oracle_verdicts_on_the_named_states") {
  PartialTransposeResult singlet = oracle_npt(BipartiteState(make_singlet()), 1, 1);
  CHECK(singlet.npt());
  CHECK(singlet.min_eigenvalue == Approx(-0.5).margin(1e-12));
  CHECK(singlet.negativity == Approx(0.5).margin(1e-12));
  CHECK(singlet.residual <= 1e-8);
  double trace = 0.0;
  for (double ev : singlet.eigenvalues) trace += ev;
  CHECK(trace == Approx(1.0).margin(1e-12));

  PartialTransposeResult vacuum =
      oracle_npt(BipartiteState(FockSuperposition({{GaussianRational(1, 0), 0, 0}})), 1, 1);
  CHECK_FALSE(vacuum.npt());
  CHECK(vacuum.min_eigenvalue == Approx(0.0).margin(1e-12));

  // the oracle's tolerance doubles as its truncation threshold, so cutoff 12
  // (tail ~1.4e-10) is acceptable here
  PartialTransposeResult bell =
      oracle_npt(BipartiteState(make_coherent_bell({1, 0}, {1, 0})), 12, 12);
  CHECK(bell.npt());
  CHECK(bell.min_eigenvalue < -0.4);
}

TEST_CASE("audit_classifies_all_verdict_combinations") {
  WitnessResult witnessed;
  witnessed.verdict = WitnessResult::Verdict::npt_witnessed;
  WitnessResult clean;

  PartialTransposeResult npt;
  npt.verdict = PartialTransposeResult::Verdict::npt;
  PartialTransposeResult ppt;

  CHECK(agreement_audit(witnessed, npt).outcome == AuditRecord::Outcome::consistent);
  CHECK(agreement_audit(clean, ppt).outcome == AuditRecord::Outcome::consistent);
  CHECK(agreement_audit(clean, npt).outcome == AuditRecord::Outcome::expected_incompleteness);
  CHECK(agreement_audit(witnessed, ppt).hard_failure());
}

TEST_CASE("moment_witnesses_are_sound_against_the_oracle") {
  OperatorOrdering ordering = OperatorOrdering::sv_compatible(15);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  int witnessed_count = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<FockSuperposition::Term> terms;
    int nterms = 1 + static_cast<int>(rng() % 3);
    for (int t = 0; t < nterms; ++t)
      terms.push_back({GaussianRational::from_double(unit(rng), unit(rng)),
                       static_cast<int>(rng() % 3), static_cast<int>(rng() % 3)});
    BipartiteState state{FockSuperposition(terms)};
    MomentMatrix m = build_moment_matrix(state, ordering, 15, true);
    WitnessResult w = search_witness(m, 3);
    PartialTransposeResult oracle = oracle_npt(state, 2, 2);
    AuditRecord audit = agreement_audit(w, oracle);
    REQUIRE_FALSE(audit.hard_failure());
    if (w.witnessed()) {
      ++witnessed_count;
      CHECK(oracle.min_eigenvalue < -1e-8);
    }
  }
  CHECK(witnessed_count > 0);  // the sweep must actually exercise the sound path
}
