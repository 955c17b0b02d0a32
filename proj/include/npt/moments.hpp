#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "npt/errors.hpp"
#include "npt/fock.hpp"
#include "npt/multiindex.hpp"
#include "npt/rational.hpp"
#include "npt/surd.hpp"

namespace npt {

/// Bosonic reordering identity a^m a+^n = sum_k k! C(m,k) C(n,k) a+^{n-k} a^{m-k}.
/// Returns (k, coefficient) pairs with exact integer coefficients.
inline std::vector<std::pair<int, std::uint64_t>> normal_order_contraction(int m, int n) {
  if (m < 0 || n < 0) throw std::invalid_argument("negative power in contraction");
  if (m > 16 || n > 16) throw std::invalid_argument("operator degree beyond supported range");
  auto binom = [](int a, int b) {
    std::uint64_t r = 1;
    for (int i = 1; i <= b; ++i) r = r * static_cast<std::uint64_t>(a - b + i) / i;
    return r;
  };
  std::vector<std::pair<int, std::uint64_t>> out;
  std::uint64_t kfact = 1;
  for (int k = 0; k <= std::min(m, n); ++k) {
    if (k > 0) kfact *= static_cast<std::uint64_t>(k);
    out.emplace_back(k, kfact * binom(m, k) * binom(n, k));
  }
  return out;
}

enum class Backend { exact, floating, automatic };

inline const char* to_string(Backend b) {
  switch (b) {
    case Backend::exact: return "exact";
    case Backend::floating: return "float";
    default: return "auto";
  }
}

/// How moments are evaluated: closed-form normal-ordered expectations, or an
/// explicit operator-matrix trace on the truncated space.
enum class MomentPath { analytic, truncated_trace };

/// One matrix entry: always a float value, plus the exact Gaussian rational
/// when the backend could produce one. surd_residue marks an exact-path
/// computation that fell back because an irrational surd survived.
struct MomentValue {
  std::complex<double> value{};
  std::optional<GaussianRational> exact{};
  bool surd_residue = false;

  bool is_exact() const { return exact.has_value(); }
  MomentValue conj() const {
    MomentValue m{std::conj(value), std::nullopt, surd_residue};
    if (exact) m.exact = exact->conj();
    return m;
  }
};

namespace detail {

/// Dense square matrix over an arbitrary ring; just enough for exact ladder
/// words on small truncated spaces.
template <typename T>
class RingMatrix {
 public:
  explicit RingMatrix(int n) : n_(n), v_(static_cast<std::size_t>(n) * n) {}
  static RingMatrix identity(int n, const T& one) {
    RingMatrix m(n);
    for (int i = 0; i < n; ++i) m.at(i, i) = one;
    return m;
  }
  T& at(int r, int c) { return v_[static_cast<std::size_t>(r) * n_ + c]; }
  const T& at(int r, int c) const { return v_[static_cast<std::size_t>(r) * n_ + c]; }
  int size() const { return n_; }

  friend RingMatrix operator*(const RingMatrix& a, const RingMatrix& b) {
    RingMatrix out(a.n_);
    for (int r = 0; r < a.n_; ++r)
      for (int k = 0; k < a.n_; ++k) {
        const T& x = a.at(r, k);
        if (x.is_zero()) continue;
        for (int c = 0; c < a.n_; ++c) {
          if (b.at(k, c).is_zero()) continue;
          out.at(r, c) += x * b.at(k, c);
        }
      }
    return out;
  }

 private:
  int n_;
  std::vector<T> v_;
};

inline RingMatrix<SurdSum> exact_ladder(int cutoff, bool dagger) {
  RingMatrix<SurdSum> m(cutoff + 1);
  for (int n = 1; n <= cutoff; ++n) {
    if (dagger)
      m.at(n, n - 1) = SurdSum::sqrt_of(static_cast<std::uint64_t>(n));
    else
      m.at(n - 1, n) = SurdSum::sqrt_of(static_cast<std::uint64_t>(n));
  }
  return m;
}

/// Word a+^{p1} a^{q1} a+^{p2} a^{q2} as an explicit truncated matrix product
/// (rightmost factor acts first).
template <typename M, typename Ladder>
M ladder_word(const Ladder& low, const Ladder& dag, const M& id, int p1, int q1, int p2, int q2) {
  M out = id;
  for (int i = 0; i < q2; ++i) out = low * out;
  for (int i = 0; i < p2; ++i) out = dag * out;
  for (int i = 0; i < q1; ++i) out = low * out;
  for (int i = 0; i < p1; ++i) out = dag * out;
  return out;
}

}  // namespace detail

/// Computes moments Tr[f_i^dag f_j rho] for a fixed state, caching each value
/// per resolved index pair so the transposed and plain matrices share
/// entries. Thread-safe for concurrent lookups/idempotent inserts.
class MomentEvaluator {
 public:
  explicit MomentEvaluator(BipartiteState state, Backend backend = Backend::automatic,
                           MomentPath path = MomentPath::analytic,
                           std::optional<std::pair<int, int>> trace_cutoffs = std::nullopt,
                           double truncation_threshold = kDefaultTruncationThreshold)
      : state_(std::move(state)),
        backend_(backend),
        path_(path),
        requested_cutoffs_(trace_cutoffs),
        threshold_(truncation_threshold),
        fingerprint_(state_fingerprint(state_)) {}

  const BipartiteState& state() const { return state_; }
  Backend backend() const { return backend_; }
  MomentPath path() const { return path_; }
  const std::string& fingerprint() const { return fingerprint_; }

  /// Plain moment Tr[f_i^dag f_j rho].
  MomentValue operator()(const MultiIndex& i, const MultiIndex& j) const {
    std::array<int, 8> key{i.ad, i.a, i.bd, i.b, j.ad, j.a, j.bd, j.b};
    {
      std::lock_guard lock(mu_);
      if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    MomentValue v = compute(i, j);
    std::lock_guard lock(mu_);
    return cache_.try_emplace(key, std::move(v)).first->second;
  }

  /// Moment of the partially transposed state, via the index-reordering rule.
  MomentValue transposed(const MultiIndex& i, const MultiIndex& j) const {
    auto [si, sj] = swap_for_partial_transpose(i, j);
    return (*this)(si, sj);
  }

 private:
  MomentValue compute(const MultiIndex& i, const MultiIndex& j) const {
    bool want_exact = backend_ != Backend::floating && exact_capable(state_);
    if (backend_ == Backend::exact && !exact_capable(state_))
      throw IrrationalValue("state not representable in exact arithmetic");
    if (want_exact) {
      SurdSum s = path_ == MomentPath::analytic ? analytic_exact(i, j) : trace_exact(i, j);
      if (s.is_rational()) {
        GaussianRational r = s.as_rational();
        return {r.to_complex(), std::move(r), false};
      }
      if (backend_ == Backend::exact)
        throw IrrationalValue("surd residue in moment (" + i.word() + ", " + j.word() + ")");
      return {s.to_complex(), std::nullopt, true};
    }
    std::complex<double> v =
        path_ == MomentPath::analytic ? analytic_float(i, j) : trace_float(i, j);
    return {v, std::nullopt, false};
  }

  // ----- analytic path: contract the inner a^m a+^n factors, then take
  // normal-ordered expectations per state family -----

  template <typename Acc, typename ExpectFn>
  Acc contract(const MultiIndex& i, const MultiIndex& j, ExpectFn&& expect) const {
    Acc total{};
    for (const auto& [k, ck] : normal_order_contraction(i.ad, j.ad)) {
      const int pa = i.a + j.ad - k, qa = i.ad + j.a - k;
      for (const auto& [l, cl] : normal_order_contraction(i.bd, j.bd)) {
        const int pb = i.b + j.bd - l, qb = i.bd + j.b - l;
        total += expect(ck * cl, pa, qa, pb, qb);
      }
    }
    return total;
  }

  SurdSum analytic_exact(const MultiIndex& i, const MultiIndex& j) const {
    return contract<SurdSum>(i, j, [&](std::uint64_t c, int pa, int qa, int pb, int qb) {
      SurdSum e = normal_expectation_exact(pa, qa, pb, qb);
      e.scale(GaussianRational(make_rational(static_cast<long>(c))));
      return e;
    });
  }

  std::complex<double> analytic_float(const MultiIndex& i, const MultiIndex& j) const {
    return contract<std::complex<double>>(
        i, j, [&](std::uint64_t c, int pa, int qa, int pb, int qb) {
          return static_cast<double>(c) * normal_expectation_float(pa, qa, pb, qb);
        });
  }

  /// <a+^p a^q b+^r b^s> on the exact families.
  SurdSum normal_expectation_exact(int p, int q, int r, int s) const {
    if (const auto* fock = std::get_if<FockSuperposition>(&state_)) {
      SurdSum acc;
      for (const auto& bra : fock->terms()) {
        for (const auto& ket : fock->terms()) {
          if (ket.n_a < q || bra.n_a != ket.n_a - q + p) continue;
          if (ket.n_b < s || bra.n_b != ket.n_b - s + r) continue;
          SurdSum v = SurdSum::sqrt_of_falling(static_cast<std::uint64_t>(ket.n_a),
                                               static_cast<unsigned>(q)) *
                      SurdSum::sqrt_of_falling(static_cast<std::uint64_t>(bra.n_a),
                                               static_cast<unsigned>(p)) *
                      SurdSum::sqrt_of_falling(static_cast<std::uint64_t>(ket.n_b),
                                               static_cast<unsigned>(s)) *
                      SurdSum::sqrt_of_falling(static_cast<std::uint64_t>(bra.n_b),
                                               static_cast<unsigned>(r));
          v.scale(bra.amp.conj() * ket.amp);
          acc += v;
        }
      }
      acc.scale(GaussianRational(make_rational(1)) / GaussianRational(fock->norm_sq()));
      return acc;
    }
    const auto& rho = std::get<TruncatedDensityMatrix>(state_);
    SurdSum acc;
    for (int na = q; na <= rho.n_max_a(); ++na) {
      const int ma = na - q + p;
      if (ma > rho.n_max_a()) continue;
      SurdSum av = SurdSum::sqrt_of_falling(static_cast<std::uint64_t>(na),
                                            static_cast<unsigned>(q)) *
                   SurdSum::sqrt_of_falling(static_cast<std::uint64_t>(ma),
                                            static_cast<unsigned>(p));
      for (int nb = s; nb <= rho.n_max_b(); ++nb) {
        const int mb = nb - s + r;
        if (mb > rho.n_max_b()) continue;
        const GaussianRational& rv = rho.exact_at(rho.index(na, nb), rho.index(ma, mb));
        if (rv.is_zero()) continue;
        SurdSum v = av * SurdSum::sqrt_of_falling(static_cast<std::uint64_t>(nb),
                                                  static_cast<unsigned>(s)) *
                    SurdSum::sqrt_of_falling(static_cast<std::uint64_t>(mb),
                                             static_cast<unsigned>(r));
        v.scale(rv);
        acc += v;
      }
    }
    return acc;
  }

  std::complex<double> normal_expectation_float(int p, int q, int r, int s) const {
    if (const auto* fock = std::get_if<FockSuperposition>(&state_)) {
      std::complex<double> acc{};
      const double norm_sq = fock->norm_sq().get_d();
      for (const auto& bra : fock->terms()) {
        for (const auto& ket : fock->terms()) {
          if (ket.n_a < q || bra.n_a != ket.n_a - q + p) continue;
          if (ket.n_b < s || bra.n_b != ket.n_b - s + r) continue;
          double w = std::sqrt(falling(ket.n_a, q) * falling(bra.n_a, p) * falling(ket.n_b, s) *
                               falling(bra.n_b, r));
          acc += std::conj(bra.amp.to_complex()) * ket.amp.to_complex() * w;
        }
      }
      return acc / norm_sq;
    }
    if (const auto* coh = std::get_if<CoherentSuperposition>(&state_))
      return coh->normal_expectation(p, q, r, s);
    const auto& rho = std::get<TruncatedDensityMatrix>(state_);
    std::complex<double> acc{};
    for (int na = q; na <= rho.n_max_a(); ++na) {
      const int ma = na - q + p;
      if (ma > rho.n_max_a()) continue;
      const double aw = std::sqrt(falling(na, q) * falling(ma, p));
      for (int nb = s; nb <= rho.n_max_b(); ++nb) {
        const int mb = nb - s + r;
        if (mb > rho.n_max_b()) continue;
        const double w = aw * std::sqrt(falling(nb, s) * falling(mb, r));
        acc += w * rho.entries()(rho.index(na, nb), rho.index(ma, mb));
      }
    }
    return acc;
  }

  static double falling(int n, int k) {
    double v = 1.0;
    for (int i = 0; i < k; ++i) v *= static_cast<double>(n - i);
    return v;
  }

  // ----- truncated-trace path: explicit matrix products on the truncated
  // space; raising past the cutoff is lost, which is exactly the semantics
  // being cross-checked -----

  std::shared_ptr<const TruncatedDensityMatrix> trace_density(int head_a, int head_b) const {
    std::lock_guard lock(trace_mu_);
    if (trace_rho_ && built_head_a_ >= head_a && built_head_b_ >= head_b) return trace_rho_;
    int cut_a = 0, cut_b = 0;
    if (requested_cutoffs_) {
      cut_a = requested_cutoffs_->first;
      cut_b = requested_cutoffs_->second;
      head_a = head_b = 64;  // explicit cutoffs are never auto-grown
    } else if (const auto* fock = std::get_if<FockSuperposition>(&state_)) {
      cut_a = fock->max_n_a() + head_a;
      cut_b = fock->max_n_b() + head_b;
    } else if (const auto* coh = std::get_if<CoherentSuperposition>(&state_)) {
      cut_a = adequate_cutoff(coh->max_alpha_sq()) + head_a;
      cut_b = adequate_cutoff(coh->max_beta_sq()) + head_b;
    } else {
      const auto& rho = std::get<TruncatedDensityMatrix>(state_);
      cut_a = rho.n_max_a();
      cut_b = rho.n_max_b();
      head_a = head_b = 64;  // the given truncation defines the space
    }
    trace_rho_ = std::make_shared<const TruncatedDensityMatrix>(
        to_density_matrix(state_, cut_a, cut_b, threshold_));
    built_head_a_ = head_a;
    built_head_b_ = head_b;
    return trace_rho_;
  }

  std::complex<double> trace_float(const MultiIndex& i, const MultiIndex& j) const {
    const auto rho_ptr = trace_density(i.a + j.ad, i.b + j.bd);
    const auto& rho = *rho_ptr;
    const int ca = rho.n_max_a(), cb = rho.n_max_b();
    Eigen::MatrixXcd alow = LadderMatrix::make(Mode::a, false, ca).entries;
    Eigen::MatrixXcd adag = LadderMatrix::make(Mode::a, true, ca).entries;
    Eigen::MatrixXcd blow = LadderMatrix::make(Mode::b, false, cb).entries;
    Eigen::MatrixXcd bdag = LadderMatrix::make(Mode::b, true, cb).entries;
    Eigen::MatrixXcd ia = Eigen::MatrixXcd::Identity(ca + 1, ca + 1);
    Eigen::MatrixXcd ib = Eigen::MatrixXcd::Identity(cb + 1, cb + 1);
    // f_i^dag f_j, per mode
    Eigen::MatrixXcd aw = detail::ladder_word(alow, adag, ia, i.a, i.ad, j.ad, j.a);
    Eigen::MatrixXcd bw = detail::ladder_word(blow, bdag, ib, i.b, i.bd, j.bd, j.b);
    // single-band words: row = col + delta
    const int da = (i.a + j.ad) - (i.ad + j.a);
    const int db = (i.b + j.bd) - (i.bd + j.b);
    std::complex<double> acc{};
    for (int na = 0; na <= ca; ++na) {
      const int ma = na + da;
      if (ma < 0 || ma > ca) continue;
      for (int nb = 0; nb <= cb; ++nb) {
        const int mb = nb + db;
        if (mb < 0 || mb > cb) continue;
        acc += aw(ma, na) * bw(mb, nb) * rho.entries()(rho.index(na, nb), rho.index(ma, mb));
      }
    }
    return acc;
  }

  SurdSum trace_exact(const MultiIndex& i, const MultiIndex& j) const {
    const auto rho_ptr = trace_density(i.a + j.ad, i.b + j.bd);
    const auto& rho = *rho_ptr;
    const int ca = rho.n_max_a(), cb = rho.n_max_b();
    auto alow = detail::exact_ladder(ca, false);
    auto adag = detail::exact_ladder(ca, true);
    auto blow = detail::exact_ladder(cb, false);
    auto bdag = detail::exact_ladder(cb, true);
    auto ia = detail::RingMatrix<SurdSum>::identity(ca + 1, SurdSum(GaussianRational(1, 0)));
    auto ib = detail::RingMatrix<SurdSum>::identity(cb + 1, SurdSum(GaussianRational(1, 0)));
    auto aw = detail::ladder_word(alow, adag, ia, i.a, i.ad, j.ad, j.a);
    auto bw = detail::ladder_word(blow, bdag, ib, i.b, i.bd, j.bd, j.b);
    const int da = (i.a + j.ad) - (i.ad + j.a);
    const int db = (i.b + j.bd) - (i.bd + j.b);
    SurdSum acc;
    for (int na = 0; na <= ca; ++na) {
      const int ma = na + da;
      if (ma < 0 || ma > ca) continue;
      for (int nb = 0; nb <= cb; ++nb) {
        const int mb = nb + db;
        if (mb < 0 || mb > cb) continue;
        const GaussianRational& rv = rho.exact_at(rho.index(na, nb), rho.index(ma, mb));
        if (rv.is_zero()) continue;
        SurdSum v = aw.at(ma, na) * bw.at(mb, nb);
        v.scale(rv);
        acc += v;
      }
    }
    return acc;
  }

  BipartiteState state_;
  Backend backend_;
  MomentPath path_;
  std::optional<std::pair<int, int>> requested_cutoffs_;
  double threshold_;
  std::string fingerprint_;

  mutable std::mutex mu_;
  mutable std::map<std::array<int, 8>, MomentValue> cache_;
  mutable std::mutex trace_mu_;
  mutable std::shared_ptr<const TruncatedDensityMatrix> trace_rho_;
  mutable int built_head_a_ = -1;
  mutable int built_head_b_ = -1;
};

/// Hermitian matrix of moments under a fixed operator ordering, tagged with
/// everything needed to reproduce it.
struct MomentMatrix {
  OperatorOrdering ordering;
  std::size_t size = 0;
  bool transposed = false;
  Backend backend = Backend::automatic;
  MomentPath path = MomentPath::analytic;
  std::string state_fingerprint;
  std::vector<MomentValue> entries;  // row-major, size x size

  const MomentValue& at(std::size_t p, std::size_t q) const { return entries[p * size + q]; }

  Eigen::MatrixXcd complex_matrix() const {
    Eigen::MatrixXcd m(size, size);
    for (std::size_t p = 0; p < size; ++p)
      for (std::size_t q = 0; q < size; ++q) m(p, q) = at(p, q).value;
    return m;
  }

  bool fully_exact() const {
    for (const auto& e : entries)
      if (!e.is_exact()) return false;
    return true;
  }
};

/// Assembles the N x N (partially transposed) moment matrix. Only the upper
/// triangle is evaluated; the lower is filled by conjugation.
inline MomentMatrix build_moment_matrix(const MomentEvaluator& eval,
                                        const OperatorOrdering& ordering, std::size_t n,
                                        bool transposed) {
  if (n == 0 || n > ordering.size())
    throw std::invalid_argument("matrix size must be in 1.." + std::to_string(ordering.size()));
  MomentMatrix m{ordering, n, transposed, eval.backend(), eval.path(), eval.fingerprint(), {}};
  m.entries.resize(n * n);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p; q < n; ++q) {
      try {
        MomentValue v = transposed ? eval.transposed(ordering.at(p), ordering.at(q))
                                   : eval(ordering.at(p), ordering.at(q));
        m.entries[q * n + p] = v.conj();
        m.entries[p * n + q] = std::move(v);
      } catch (const IrrationalValue& e) {
        throw IrrationalValue(std::string(e.what()) + " [entry (" + std::to_string(p + 1) + "," +
                              std::to_string(q + 1) + ")]");
      } catch (const TruncationTooSevere& e) {
        throw TruncationTooSevere(std::string(e.what()) + " [entry (" + std::to_string(p + 1) +
                                      "," + std::to_string(q + 1) + ")]",
                                  e.discarded_weight);
      }
    }
  }
  return m;
}

inline MomentMatrix build_moment_matrix(const BipartiteState& state,
                                        const OperatorOrdering& ordering, std::size_t n,
                                        bool transposed, Backend backend = Backend::automatic,
                                        MomentPath path = MomentPath::analytic,
                                        std::optional<std::pair<int, int>> cutoffs = std::nullopt) {
  MomentEvaluator eval(state, backend, path, cutoffs);
  return build_moment_matrix(eval, ordering, n, transposed);
}

/// Max absolute entrywise discrepancy between the analytic and the
/// truncated-trace evaluation of the same matrix.
inline double cross_validate_backends(const BipartiteState& state,
                                      const OperatorOrdering& ordering, std::size_t n,
                                      bool transposed,
                                      std::optional<std::pair<int, int>> cutoffs = std::nullopt) {
  MomentMatrix analytic =
      build_moment_matrix(state, ordering, n, transposed, Backend::automatic,
                          MomentPath::analytic);
  MomentMatrix traced = build_moment_matrix(state, ordering, n, transposed, Backend::automatic,
                                            MomentPath::truncated_trace, cutoffs);
  double worst = 0.0;
  for (std::size_t k = 0; k < analytic.entries.size(); ++k)
    worst = std::max(worst, std::abs(analytic.entries[k].value - traced.entries[k].value));
  return worst;
}

}  // namespace npt
