#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "npt/errors.hpp"
#include "npt/fock.hpp"
#include "npt/minors.hpp"

namespace npt {

/// Ground-truth verdict from explicit partial transposition and
/// diagonalization of the truncated density matrix.
struct PartialTransposeResult {
  enum class Verdict { npt, ppt_at_truncation };
  Verdict verdict = Verdict::ppt_at_truncation;
  double min_eigenvalue = 0.0;
  double negativity = 0.0;  // sum of |negative eigenvalues|
  int n_max_a = 0;
  int n_max_b = 0;
  std::vector<double> eigenvalues;
  double residual = 0.0;  // ||rho^G v - lambda v|| for the extremal pair

  bool npt() const { return verdict == Verdict::npt; }
};

/// Transposition of the second mode's indices:
/// <m_a m_b|rho^G|n_a n_b> = <m_a n_b|rho|n_a m_b>. Hermitian, trace
/// preserving, and an involution at the entry level.
inline TruncatedDensityMatrix partial_transpose(const TruncatedDensityMatrix& rho) {
  const int da = rho.dim_a(), db = rho.dim_b();
  Eigen::MatrixXcd out(rho.dim(), rho.dim());
  std::optional<std::vector<GaussianRational>> exact;
  if (rho.has_exact()) exact.emplace(static_cast<std::size_t>(rho.dim()) * rho.dim());
  for (int ma = 0; ma < da; ++ma)
    for (int mb = 0; mb < db; ++mb)
      for (int na = 0; na < da; ++na)
        for (int nb = 0; nb < db; ++nb) {
          const int r = rho.index(ma, mb), c = rho.index(na, nb);
          const int pr = rho.index(ma, nb), pc = rho.index(na, mb);
          out(r, c) = rho.entries()(pr, pc);
          if (exact)
            (*exact)[static_cast<std::size_t>(r) * rho.dim() + c] = rho.exact_at(pr, pc);
        }
  return TruncatedDensityMatrix::unchecked(rho.n_max_a(), rho.n_max_b(), std::move(out),
                                           std::move(exact), rho.discarded_weight());
}

/// Partial transposition on the first mode instead; the spectrum must agree
/// with the second-mode transpose (asserted in tests).
inline TruncatedDensityMatrix partial_transpose_first_mode(const TruncatedDensityMatrix& rho) {
  const int da = rho.dim_a(), db = rho.dim_b();
  Eigen::MatrixXcd out(rho.dim(), rho.dim());
  for (int ma = 0; ma < da; ++ma)
    for (int mb = 0; mb < db; ++mb)
      for (int na = 0; na < da; ++na)
        for (int nb = 0; nb < db; ++nb)
          out(rho.index(ma, mb), rho.index(na, nb)) =
              rho.entries()(rho.index(na, mb), rho.index(ma, nb));
  return TruncatedDensityMatrix::unchecked(rho.n_max_a(), rho.n_max_b(), std::move(out),
                                           std::nullopt, rho.discarded_weight());
}

/// NPT iff the partial transpose has an eigenvalue below -tolerance. For
/// states with finite Fock support inside the cutoffs the verdict is exact.
/// The tolerance doubles as the truncation-weight threshold.
inline PartialTransposeResult oracle_npt(const BipartiteState& state, int n_max_a, int n_max_b,
                                         double tolerance = 1e-8) {
  TruncatedDensityMatrix rho = to_density_matrix(state, n_max_a, n_max_b, tolerance);
  TruncatedDensityMatrix pt = partial_transpose(rho);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(pt.entries());
  if (es.info() != Eigen::Success) throw Error("eigensolver failed on the partial transpose");

  PartialTransposeResult result;
  result.n_max_a = n_max_a;
  result.n_max_b = n_max_b;
  result.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + pt.dim());
  result.min_eigenvalue = es.eigenvalues().minCoeff();
  for (double lambda : result.eigenvalues) result.negativity += std::max(0.0, -lambda);
  result.verdict = result.min_eigenvalue < -tolerance ? PartialTransposeResult::Verdict::npt
                                                      : PartialTransposeResult::Verdict::ppt_at_truncation;

  // the verdict hinges on one sign: check the extremal eigenpairs
  const Eigen::Index lo = 0, hi = pt.dim() - 1;
  for (Eigen::Index k : {lo, hi}) {
    Eigen::VectorXcd v = es.eigenvectors().col(k);
    double res = (pt.entries() * v - es.eigenvalues()(k) * v).norm();
    result.residual = std::max(result.residual, res);
  }
  if (result.residual > 1e-8) throw Error("extremal eigenpair residual exceeds 1e-8");
  return result;
}

/// Cross-check of the moment-based verdict against the density-matrix oracle.
struct AuditRecord {
  enum class Outcome { consistent, expected_incompleteness, hard_failure };
  Outcome outcome = Outcome::consistent;
  std::string note;

  bool hard_failure() const { return outcome == Outcome::hard_failure; }
};

/// (moment NPT, oracle PPT-at-truncation) is a soundness violation — a
/// negative principal minor certifies a negative direction, so the oracle
/// must see it whenever the truncation holds the full support. The converse
/// gap is expected: finitely many moments need not reveal every NPT state.
inline AuditRecord agreement_audit(const WitnessResult& moment_verdict,
                                   const PartialTransposeResult& oracle_verdict) {
  AuditRecord rec;
  if (moment_verdict.witnessed() && oracle_verdict.npt()) {
    rec.outcome = AuditRecord::Outcome::consistent;
    rec.note = "both NPT";
  } else if (!moment_verdict.witnessed() && !oracle_verdict.npt()) {
    rec.outcome = AuditRecord::Outcome::consistent;
    rec.note = "both non-detecting";
  } else if (moment_verdict.witnessed()) {
    rec.outcome = AuditRecord::Outcome::hard_failure;
    rec.note = "moment witness but oracle sees no negative eigenvalue: soundness violation";
  } else {
    rec.outcome = AuditRecord::Outcome::expected_incompleteness;
    rec.note = "oracle NPT but no witness at this truncation (expected incompleteness)";
  }
  return rec;
}

}  // namespace npt
