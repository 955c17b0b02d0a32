#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "npt/errors.hpp"
#include "npt/moments.hpp"
#include "npt/multiindex.hpp"
#include "npt/rational.hpp"

namespace npt {

inline constexpr double kDefaultZeroTol = 1e-10;
inline constexpr std::size_t kDefaultSearchBudget = 1u << 20;

enum class SignClass { positive, zero, negative };

inline const char* to_string(SignClass s) {
  switch (s) {
    case SignClass::positive: return "+";
    case SignClass::zero: return "0";
    default: return "-";
  }
}

/// Strictly increasing 1-based row/column labels into an operator ordering.
struct IndexSubset {
  std::vector<std::size_t> indices;

  IndexSubset() = default;
  explicit IndexSubset(std::vector<std::size_t> idx) : indices(std::move(idx)) {
    if (indices.empty()) throw std::invalid_argument("index subset must be nonempty");
    for (std::size_t k = 0; k < indices.size(); ++k) {
      if (indices[k] == 0) throw std::invalid_argument("index subsets are 1-based");
      if (k > 0 && indices[k] <= indices[k - 1])
        throw std::invalid_argument("index subset must be strictly increasing");
    }
  }

  std::size_t cardinality() const { return indices.size(); }

  /// The subset rendered as operator words, e.g. "1, a b".
  std::string words(const OperatorOrdering& ordering) const {
    std::string s;
    for (std::size_t k = 0; k < indices.size(); ++k) {
      if (k) s += ", ";
      s += ordering.at(indices[k] - 1).word();
    }
    return s;
  }

  friend bool operator==(const IndexSubset& a, const IndexSubset& b) {
    return a.indices == b.indices;
  }
};

// ---------------------------------------------------------------------------
// determinant engines
// ---------------------------------------------------------------------------

/// Exact elimination determinant over Gaussian rationals.
inline GaussianRational det_exact_complex(std::vector<GaussianRational> a, std::size_t n) {
  if (n == 0) return GaussianRational(1, 0);
  auto at = [&a, n](std::size_t r, std::size_t c) -> GaussianRational& { return a[r * n + c]; };
  GaussianRational det(1, 0);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot_row = k;
    while (pivot_row < n && at(pivot_row, k).is_zero()) ++pivot_row;
    if (pivot_row == n) return GaussianRational(0, 0);
    if (pivot_row != k) {
      for (std::size_t c = k; c < n; ++c) std::swap(at(k, c), at(pivot_row, c));
      det = -det;
    }
    const GaussianRational pivot = at(k, k);
    det *= pivot;
    for (std::size_t r = k + 1; r < n; ++r) {
      if (at(r, k).is_zero()) continue;
      GaussianRational factor = at(r, k) / pivot;
      for (std::size_t c = k; c < n; ++c) at(r, c) -= factor * at(k, c);
    }
  }
  return det;
}

/// Exact determinant; the input is expected to be Hermitian, so the result
/// must be a real rational (asserted).
inline Rational det_exact(std::vector<GaussianRational> a, std::size_t n) {
  GaussianRational d = det_exact_complex(std::move(a), n);
  if (!d.is_real()) throw Error("determinant of a Hermitian matrix must be real");
  return d.re;
}

struct DetFloat {
  std::complex<double> det{};
  double growth = 1.0;       // max intermediate entry / max input entry
  double pivot_ratio = 1.0;  // |largest pivot| / |smallest pivot|, a cheap condition proxy
  double max_abs = 0.0;      // largest input entry magnitude
};

/// Pivoted LU determinant with the element-growth estimate used to size the
/// zero band.
inline DetFloat det_float(Eigen::MatrixXcd a) {
  const auto n = a.rows();
  DetFloat out;
  out.max_abs = n == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
  if (n == 0) {
    out.det = 1.0;
    return out;
  }
  if (out.max_abs == 0.0) {
    out.det = 0.0;
    out.pivot_ratio = std::numeric_limits<double>::infinity();
    return out;
  }
  double sign = 1.0;
  double max_inter = out.max_abs;
  double min_pivot = std::numeric_limits<double>::infinity();
  double max_pivot = 0.0;
  std::complex<double> det{1.0, 0.0};
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index best = k;
    double best_abs = std::abs(a(k, k));
    for (Eigen::Index r = k + 1; r < n; ++r) {
      double v = std::abs(a(r, k));
      if (v > best_abs) {
        best_abs = v;
        best = r;
      }
    }
    if (best_abs == 0.0) {
      out.det = 0.0;
      out.growth = max_inter / out.max_abs;
      out.pivot_ratio = std::numeric_limits<double>::infinity();
      return out;
    }
    if (best != k) {
      a.row(k).swap(a.row(best));
      sign = -sign;
    }
    const std::complex<double> pivot = a(k, k);
    det *= pivot;
    min_pivot = std::min(min_pivot, best_abs);
    max_pivot = std::max(max_pivot, best_abs);
    for (Eigen::Index r = k + 1; r < n; ++r) {
      const std::complex<double> factor = a(r, k) / pivot;
      a(r, k) = 0.0;
      for (Eigen::Index c = k + 1; c < n; ++c) {
        a(r, c) -= factor * a(k, c);
        max_inter = std::max(max_inter, std::abs(a(r, c)));
      }
    }
  }
  out.det = sign * det;
  out.growth = max_inter / out.max_abs;
  out.pivot_ratio = max_pivot / min_pivot;
  return out;
}

/// Outcome of one principal-minor evaluation.
struct MinorReport {
  IndexSubset subset;
  std::complex<double> det{};
  std::optional<Rational> exact_det{};
  SignClass sign = SignClass::zero;
  double zero_band = 0.0;

  bool is_exact() const { return exact_det.has_value(); }
};

namespace detail {

inline MinorReport classify_minor(const MomentMatrix& m, IndexSubset subset, double tol) {
  const std::size_t card = subset.cardinality();
  bool exact = true;
  for (std::size_t r : subset.indices)
    for (std::size_t c : subset.indices)
      exact = exact && m.at(r - 1, c - 1).is_exact();

  MinorReport report;
  report.subset = std::move(subset);
  if (exact) {
    std::vector<GaussianRational> sub;
    sub.reserve(card * card);
    for (std::size_t r : report.subset.indices)
      for (std::size_t c : report.subset.indices) sub.push_back(*m.at(r - 1, c - 1).exact);
    Rational d = det_exact(std::move(sub), card);
    report.det = {d.get_d(), 0.0};
    report.sign = d == 0 ? SignClass::zero
                         : (d > 0 ? SignClass::positive : SignClass::negative);
    report.exact_det = std::move(d);
    return report;
  }

  Eigen::MatrixXcd sub(card, card);
  for (std::size_t r = 0; r < card; ++r)
    for (std::size_t c = 0; c < card; ++c)
      sub(r, c) = m.at(report.subset.indices[r] - 1, report.subset.indices[c] - 1).value;
  DetFloat d = det_float(std::move(sub));
  if (std::abs(d.det.imag()) > 1e-8 * std::max(1.0, std::abs(d.det)))
    throw Error("principal minor of a Hermitian matrix came out nonreal");
  report.det = {d.det.real(), 0.0};
  report.zero_band = tol * d.growth * std::pow(d.max_abs, static_cast<double>(card));
  report.sign = std::abs(d.det.real()) <= report.zero_band
                    ? SignClass::zero
                    : (d.det.real() > 0 ? SignClass::positive : SignClass::negative);
  return report;
}

}  // namespace detail

/// det of the submatrix keeping rows/columns labelled by r.
inline MinorReport principal_minor(const MomentMatrix& m, const IndexSubset& r,
                                   double tol = kDefaultZeroTol) {
  for (std::size_t idx : r.indices)
    if (idx > m.size)
      throw SubsetOutOfRange("subset index " + std::to_string(idx) + " exceeds matrix size " +
                             std::to_string(m.size));
  return detail::classify_minor(m, r, tol);
}

/// Determinants of the leading blocks M_1 .. M_{n_max} in order — the
/// original (insufficient) criterion, kept verbatim for comparison.
inline std::vector<MinorReport> leading_minor_scan(const MomentMatrix& m, std::size_t n_max,
                                                   double tol = kDefaultZeroTol) {
  if (n_max > m.size)
    throw SubsetOutOfRange("leading scan depth exceeds matrix size " + std::to_string(m.size));
  std::vector<MinorReport> reports;
  reports.reserve(n_max);
  std::vector<std::size_t> prefix;
  for (std::size_t k = 1; k <= n_max; ++k) {
    prefix.push_back(k);
    reports.push_back(detail::classify_minor(m, IndexSubset(prefix), tol));
    // bordered-Schur consistency: while the chain stays positive definite, a
    // first negative determinant forces a negative Schur complement
    if (k >= 2 && reports[k - 1].sign == SignClass::negative) {
      bool chain_positive = true;
      for (std::size_t p = 0; p + 1 < k; ++p)
        chain_positive = chain_positive && reports[p].sign == SignClass::positive;
      if (chain_positive && reports[k - 2].is_exact() && reports[k - 1].is_exact()) {
        Rational schur = *reports[k - 1].exact_det / *reports[k - 2].exact_det;
        if (schur >= 0) throw Error("bordered Schur complement inconsistency");
      }
    }
  }
  return reports;
}

enum class SearchStrategy { exhaustive, eigenvector_guided };

struct WitnessResult {
  enum class Verdict { npt_witnessed, no_witness_found };
  Verdict verdict = Verdict::no_witness_found;
  std::optional<IndexSubset> witness{};
  std::optional<MinorReport> minor{};
  std::size_t subsets_examined = 0;
  std::string ordering_name;
  std::size_t matrix_size = 0;
  std::size_t max_cardinality = 0;

  bool witnessed() const { return verdict == Verdict::npt_witnessed; }
};

namespace detail {

template <typename Visit>
void for_each_subset(std::size_t n, std::size_t max_card, Visit&& visit) {
  for (std::size_t card = 1; card <= std::min(max_card, n); ++card) {
    std::vector<std::size_t> idx(card);
    std::iota(idx.begin(), idx.end(), 1);
    while (true) {
      if (!visit(idx)) return;
      // next combination, lexicographic
      std::size_t k = card;
      while (k > 0 && idx[k - 1] == n - card + k) --k;
      if (k == 0) break;
      ++idx[k - 1];
      for (std::size_t j = k; j < card; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
}

}  // namespace detail

/// Hunts for an index subset whose principal minor is strictly negative — a
/// certificate that the matrix is not positive semidefinite. Exhaustive
/// enumeration goes by cardinality then lexicographic order with early exit;
/// the guided strategy ranks indices by the most-negative eigenvector and
/// probes nested prefixes plus small perturbations.
inline WitnessResult search_witness(const MomentMatrix& m, std::size_t max_cardinality,
                                    SearchStrategy strategy = SearchStrategy::exhaustive,
                                    double tol = kDefaultZeroTol,
                                    std::size_t budget = kDefaultSearchBudget) {
  if (!m.transposed)
    throw std::invalid_argument("witness search expects the partially transposed matrix");
  WitnessResult result;
  result.ordering_name = m.ordering.name();
  result.matrix_size = m.size;
  result.max_cardinality = max_cardinality;

  auto probe = [&](const std::vector<std::size_t>& idx) -> bool {
    ++result.subsets_examined;
    if (result.subsets_examined > budget)
      throw BudgetExhausted("witness search budget exhausted", result.subsets_examined - 1);
    MinorReport rep = detail::classify_minor(m, IndexSubset(idx), tol);
    if (rep.sign == SignClass::negative) {
      result.verdict = WitnessResult::Verdict::npt_witnessed;
      result.witness = rep.subset;
      result.minor = std::move(rep);
      return false;
    }
    return true;
  };

  if (strategy == SearchStrategy::exhaustive) {
    detail::for_each_subset(m.size, max_cardinality,
                            [&](const std::vector<std::size_t>& idx) { return probe(idx); });
    return result;
  }

  // eigenvector-guided
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m.complex_matrix());
  Eigen::VectorXcd v = es.eigenvectors().col(0);  // most negative eigenvalue first
  std::vector<std::size_t> ranked(m.size);
  std::iota(ranked.begin(), ranked.end(), 1);
  std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t x, std::size_t y) {
    return std::abs(v(static_cast<Eigen::Index>(x - 1))) >
           std::abs(v(static_cast<Eigen::Index>(y - 1)));
  });

  std::vector<std::vector<std::size_t>> seen;
  auto try_candidate = [&](std::vector<std::size_t> idx) -> bool {
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    if (std::find(seen.begin(), seen.end(), idx) != seen.end()) return true;
    seen.push_back(idx);
    return probe(idx);
  };

  const std::size_t depth = std::min<std::size_t>(max_cardinality, m.size);
  for (std::size_t len = 1; len <= depth; ++len) {
    std::vector<std::size_t> prefix(ranked.begin(), ranked.begin() + len);
    if (!try_candidate(prefix)) return result;
    // perturbations: swap the weakest member for the next few ranked indices
    for (std::size_t alt = len; alt < std::min(m.size, len + 4); ++alt) {
      std::vector<std::size_t> variant = prefix;
      variant[len - 1] = ranked[alt];
      if (!try_candidate(variant)) return result;
    }
  }
  return result;
}

/// End-to-end verdict for a state. NPT-witnessed is conclusive; the other
/// outcome is only "no witness at this truncation", never a PPT claim.
struct Classification {
  bool npt = false;
  WitnessResult witness;
  std::size_t n_operators = 0;
  std::size_t max_cardinality = 0;
  std::string ordering_name;
  Backend backend = Backend::automatic;
};

inline Classification classify_state(const BipartiteState& state,
                                     const OperatorOrdering& ordering, std::size_t n,
                                     std::size_t max_cardinality,
                                     Backend backend = Backend::automatic,
                                     double tol = kDefaultZeroTol,
                                     SearchStrategy strategy = SearchStrategy::exhaustive) {
  MomentMatrix m = build_moment_matrix(state, ordering, n, /*transposed=*/true, backend);
  Classification c;
  c.witness = search_witness(m, max_cardinality, strategy, tol);
  c.npt = c.witness.witnessed();
  c.n_operators = n;
  c.max_cardinality = max_cardinality;
  c.ordering_name = ordering.name();
  c.backend = backend;
  return c;
}

/// Result of a leading-minor signature hunt over within-degree permutations.
struct OrderingSearchResult {
  OperatorOrdering ordering;
  std::vector<SignClass> signature;  // over the full 15 operators
  std::size_t determinants_evaluated = 0;
};

/// Searches permutations of the degree-1 and degree-2 blocks of the default
/// ordering for one whose leading-minor signature on the given state matches
/// the target prefix. Deterministic: degree-1 arrangements in lexicographic
/// order starting from the default, degree-2 candidates in default order,
/// first match wins.
inline OrderingSearchResult ordering_signature_search(const BipartiteState& state,
                                                      const std::vector<SignClass>& target,
                                                      std::size_t budget = 2'000'000,
                                                      Backend backend = Backend::automatic,
                                                      double tol = kDefaultZeroTol) {
  const OperatorOrdering base = OperatorOrdering::sv_compatible(15);
  if (target.empty() || target.size() > base.size())
    throw std::invalid_argument("target signature length must be 1..15");
  MomentMatrix full = build_moment_matrix(state, base, base.size(), /*transposed=*/true, backend);

  std::size_t evals = 0;
  auto minor_sign = [&](const std::vector<std::size_t>& perm, std::size_t len) -> SignClass {
    if (++evals > budget)
      throw NoMatchingOrdering("ordering search budget exhausted", evals - 1);
    bool exact = true;
    for (std::size_t r = 0; r < len; ++r)
      for (std::size_t c = 0; c < len; ++c)
        exact = exact && full.at(perm[r], perm[c]).is_exact();
    if (exact) {
      std::vector<GaussianRational> sub;
      sub.reserve(len * len);
      for (std::size_t r = 0; r < len; ++r)
        for (std::size_t c = 0; c < len; ++c) sub.push_back(*full.at(perm[r], perm[c]).exact);
      Rational d = det_exact(std::move(sub), len);
      return d == 0 ? SignClass::zero : (d > 0 ? SignClass::positive : SignClass::negative);
    }
    Eigen::MatrixXcd sub(len, len);
    for (std::size_t r = 0; r < len; ++r)
      for (std::size_t c = 0; c < len; ++c) sub(r, c) = full.at(perm[r], perm[c]).value;
    DetFloat d = det_float(std::move(sub));
    double band = tol * d.growth * std::pow(d.max_abs, static_cast<double>(len));
    return std::abs(d.det.real()) <= band
               ? SignClass::zero
               : (d.det.real() > 0 ? SignClass::positive : SignClass::negative);
  };

  // base positions: [0] identity, [1..4] degree-1 block, [5..14] degree-2 block
  std::vector<std::size_t> deg1 = {1, 2, 3, 4};
  const std::vector<std::size_t> deg2_base = {5, 6, 7, 8, 9, 10, 11, 12, 13, 14};

  std::vector<std::size_t> perm;  // positions into `base`, grown per slot
  std::vector<bool> used(base.size(), false);

  auto finish = [&](std::vector<std::size_t> prefix) {
    for (std::size_t p = 1; p <= 4; ++p)
      if (std::find(prefix.begin(), prefix.end(), p) == prefix.end()) prefix.push_back(p);
    for (std::size_t p : deg2_base)
      if (std::find(prefix.begin(), prefix.end(), p) == prefix.end()) prefix.push_back(p);
    std::vector<MultiIndex> ops;
    ops.reserve(prefix.size());
    for (std::size_t p : prefix) ops.push_back(base.at(p));
    OperatorOrdering ordering("signature-search", std::move(ops));
    std::vector<SignClass> signature;
    for (std::size_t len = 1; len <= prefix.size(); ++len)
      signature.push_back(minor_sign(prefix, len));
    return OrderingSearchResult{std::move(ordering), std::move(signature), evals};
  };

  // depth-first over slots; slot s fills position s of the ordering
  auto search = [&](auto&& self, std::size_t slot) -> std::optional<OrderingSearchResult> {
    if (slot == target.size()) return finish(perm);
    const bool deg1_slot = slot >= 1 && slot <= 4;
    const auto& candidates = deg1_slot ? deg1 : deg2_base;
    for (std::size_t cand : candidates) {
      if (used[cand]) continue;
      perm.push_back(cand);
      used[cand] = true;
      if (minor_sign(perm, perm.size()) == target[slot]) {
        if (auto found = self(self, slot + 1)) return found;
      }
      used[cand] = false;
      perm.pop_back();
    }
    return std::nullopt;
  };

  // slot 0 is always the identity
  perm.push_back(0);
  used[0] = true;
  if (minor_sign(perm, 1) == target[0]) {
    if (auto found = search(search, 1)) return *found;
  }
  throw NoMatchingOrdering("no ordering matches the requested signature", evals);
}

/// Parses "+0-" style signature strings (spaces and commas ignored).
inline std::vector<SignClass> parse_signature(std::string_view text) {
  std::vector<SignClass> sig;
  for (char c : text) {
    switch (c) {
      case '+': sig.push_back(SignClass::positive); break;
      case '0': sig.push_back(SignClass::zero); break;
      case '-': sig.push_back(SignClass::negative); break;
      case ' ':
      case ',': break;
      default: throw ParseError(std::string("bad signature character '") + c + "'");
    }
  }
  return sig;
}

}  // namespace npt
