#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string_view>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "npt/errors.hpp"
#include "npt/rational.hpp"
#include "npt/surd.hpp"

namespace npt {

enum class Mode { a, b };

inline constexpr double kDefaultTruncationThreshold = 1e-12;

// ---------------------------------------------------------------------------
// pure-state families
// ---------------------------------------------------------------------------

/// Finite superposition of two-mode Fock states. Amplitudes are stored
/// unnormalized as given (exact Gaussian rationals); the squared norm is a
/// rational carried alongside, so 1/sqrt(2)-style factors never leave the
/// exact ring. Terms are deduplicated and sorted by (n_a, n_b).
class FockSuperposition {
 public:
  struct Term {
    GaussianRational amp;
    int n_a = 0;
    int n_b = 0;
  };

  explicit FockSuperposition(std::vector<Term> terms) {
    for (auto& t : terms) {
      if (t.n_a < 0 || t.n_b < 0) throw std::invalid_argument("negative photon count");
      if (t.amp.is_zero()) continue;
      bool merged = false;
      for (auto& u : terms_) {
        if (u.n_a == t.n_a && u.n_b == t.n_b) {
          u.amp += t.amp;
          merged = true;
          break;
        }
      }
      if (!merged) terms_.push_back(std::move(t));
    }
    std::erase_if(terms_, [](const Term& t) { return t.amp.is_zero(); });
    std::sort(terms_.begin(), terms_.end(), [](const Term& x, const Term& y) {
      return std::pair(x.n_a, x.n_b) < std::pair(y.n_a, y.n_b);
    });
    norm_sq_ = make_rational(0);
    for (const auto& t : terms_) norm_sq_ += t.amp.norm2();
    if (terms_.empty() || norm_sq_ == 0)
      throw DegenerateState("Fock superposition has zero norm");
  }

  const std::vector<Term>& terms() const { return terms_; }
  const Rational& norm_sq() const { return norm_sq_; }

  int max_n_a() const {
    int m = 0;
    for (const auto& t : terms_) m = std::max(m, t.n_a);
    return m;
  }
  int max_n_b() const {
    int m = 0;
    for (const auto& t : terms_) m = std::max(m, t.n_b);
    return m;
  }

  /// Normalized amplitude <n_a n_b|psi> as a float.
  std::complex<double> amplitude(int n_a, int n_b) const {
    for (const auto& t : terms_)
      if (t.n_a == n_a && t.n_b == n_b)
        return t.amp.to_complex() / std::sqrt(norm_sq_.get_d());
    return {0.0, 0.0};
  }

 private:
  std::vector<Term> terms_;
  Rational norm_sq_;
};

/// (|01> - |10>)/sqrt(2), stored as raw amplitudes +1 and -1.
inline FockSuperposition make_singlet() {
  return FockSuperposition({{GaussianRational(1, 0), 0, 1}, {GaussianRational(-1, 0), 1, 0}});
}

/// <x|y> for coherent states: exp(-|x|^2/2 - |y|^2/2 + conj(x) y).
inline std::complex<double> coherent_overlap(std::complex<double> x, std::complex<double> y) {
  return std::exp(-std::norm(x) / 2.0 - std::norm(y) / 2.0 + std::conj(x) * y);
}

/// Finite superposition of two-mode coherent states |alpha, beta>.
/// Normalized at construction via the overlap formula.
class CoherentSuperposition {
 public:
  struct Term {
    std::complex<double> amp;
    std::complex<double> alpha;
    std::complex<double> beta;
  };

  explicit CoherentSuperposition(std::vector<Term> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw DegenerateState("coherent superposition needs at least one term");
    double n2 = 0.0;
    for (const auto& t : terms_)
      for (const auto& u : terms_)
        n2 += std::real(std::conj(t.amp) * u.amp * coherent_overlap(t.alpha, u.alpha) *
                        coherent_overlap(t.beta, u.beta));
    if (!(n2 > 1e-14)) throw DegenerateState("coherent superposition has (near-)zero norm");
    normalization_ = 1.0 / std::sqrt(n2);
    for (auto& t : terms_) t.amp *= normalization_;
  }

  const std::vector<Term>& terms() const { return terms_; }

  /// 1/sqrt of the raw squared norm applied at construction.
  double normalization() const { return normalization_; }

  double max_alpha_sq() const {
    double m = 0.0;
    for (const auto& t : terms_) m = std::max(m, std::norm(t.alpha));
    return m;
  }
  double max_beta_sq() const {
    double m = 0.0;
    for (const auto& t : terms_) m = std::max(m, std::norm(t.beta));
    return m;
  }

  /// <a+^p a^q b+^r b^s> in closed form: coherent states are annihilator
  /// eigenstates, so each cross term is a monomial times an overlap.
  std::complex<double> normal_expectation(int p, int q, int r, int s) const {
    std::complex<double> total{0.0, 0.0};
    for (const auto& t : terms_) {
      for (const auto& u : terms_) {
        std::complex<double> v = std::conj(t.amp) * u.amp;
        v *= ipow(std::conj(t.alpha), p) * ipow(u.alpha, q);
        v *= ipow(std::conj(t.beta), r) * ipow(u.beta, s);
        v *= coherent_overlap(t.alpha, u.alpha) * coherent_overlap(t.beta, u.beta);
        total += v;
      }
    }
    return total;
  }

  /// Normalized <n_a n_b|psi>.
  std::complex<double> amplitude(int n_a, int n_b) const {
    std::complex<double> v{0.0, 0.0};
    for (const auto& t : terms_)
      v += t.amp * fock_amplitude(t.alpha, n_a) * fock_amplitude(t.beta, n_b);
    return v;
  }

  /// <n|alpha> = exp(-|alpha|^2/2) alpha^n / sqrt(n!).
  static std::complex<double> fock_amplitude(std::complex<double> alpha, int n) {
    std::complex<double> v = std::exp(-std::norm(alpha) / 2.0);
    for (int k = 1; k <= n; ++k) v *= alpha / std::sqrt(static_cast<double>(k));
    return v;
  }

 private:
  static std::complex<double> ipow(std::complex<double> x, int p) {
    std::complex<double> v{1.0, 0.0};
    for (int k = 0; k < p; ++k) v *= x;
    return v;
  }

  std::vector<Term> terms_;
  double normalization_ = 1.0;
};

/// Normalized |alpha,beta> - |-alpha,-beta>. The two branches coincide at
/// alpha = beta = 0 and the difference cannot be normalized.
inline CoherentSuperposition make_coherent_bell(std::complex<double> alpha,
                                                std::complex<double> beta) {
  if (alpha == std::complex<double>{} && beta == std::complex<double>{})
    throw DegenerateState("coherent Bell state is degenerate at alpha = beta = 0");
  return CoherentSuperposition({{{1.0, 0.0}, alpha, beta}, {{-1.0, 0.0}, -alpha, -beta}});
}

/// Cutoff large enough to push the coherent Poisson tail below ~1e-12.
inline int adequate_cutoff(double mean_photons) {
  return static_cast<int>(
      std::ceil(mean_photons + 8.0 * std::sqrt(std::max(mean_photons, 1.0)) + 10.0));
}

// ---------------------------------------------------------------------------
// truncated density matrices
// ---------------------------------------------------------------------------

/// Two-mode density matrix on the truncated product Fock basis. Basis index
/// is row-major with the mode-a occupation as the slow index. May carry an
/// exact Gaussian-rational copy of its entries.
class TruncatedDensityMatrix {
 public:
  /// Validating constructor for externally supplied matrices: Hermitian and
  /// unit trace within tol, eigenvalues >= -tol.
  TruncatedDensityMatrix(int n_max_a, int n_max_b, Eigen::MatrixXcd entries, double tol = 1e-10)
      : TruncatedDensityMatrix(Tag{}, n_max_a, n_max_b, std::move(entries), std::nullopt, 0.0) {
    const auto& m = entries_;
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol)
      throw std::invalid_argument("density matrix is not Hermitian");
    if (std::abs(m.trace() - std::complex<double>(1.0, 0.0)) > tol)
      throw std::invalid_argument("density matrix trace differs from 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol)
      throw std::invalid_argument("density matrix has a negative eigenvalue");
  }

  /// Non-validating factory for internally constructed matrices (including
  /// partial transposes, which are legitimately non-positive).
  static TruncatedDensityMatrix unchecked(int n_max_a, int n_max_b, Eigen::MatrixXcd entries,
                                          std::optional<std::vector<GaussianRational>> exact,
                                          double discarded_weight) {
    return TruncatedDensityMatrix(Tag{}, n_max_a, n_max_b, std::move(entries), std::move(exact),
                                  discarded_weight);
  }

  int n_max_a() const { return n_max_a_; }
  int n_max_b() const { return n_max_b_; }
  int dim_a() const { return n_max_a_ + 1; }
  int dim_b() const { return n_max_b_ + 1; }
  int dim() const { return dim_a() * dim_b(); }
  int index(int n_a, int n_b) const { return n_a * dim_b() + n_b; }

  const Eigen::MatrixXcd& entries() const { return entries_; }
  const std::optional<std::vector<GaussianRational>>& exact_entries() const { return exact_; }
  bool has_exact() const { return exact_.has_value(); }
  const GaussianRational& exact_at(int r, int c) const { return (*exact_)[r * dim() + c]; }

  /// Weight the truncation discarded before renormalization.
  double discarded_weight() const { return discarded_weight_; }

 private:
  struct Tag {};
  TruncatedDensityMatrix(Tag, int n_max_a, int n_max_b, Eigen::MatrixXcd entries,
                         std::optional<std::vector<GaussianRational>> exact, double discarded)
      : n_max_a_(n_max_a),
        n_max_b_(n_max_b),
        entries_(std::move(entries)),
        exact_(std::move(exact)),
        discarded_weight_(discarded) {
    if (n_max_a_ < 0 || n_max_b_ < 0) throw std::invalid_argument("negative cutoff");
    if (entries_.rows() != dim() || entries_.cols() != dim())
      throw std::invalid_argument("density matrix dimension mismatch");
    if (exact_ && static_cast<int>(exact_->size()) != dim() * dim())
      throw std::invalid_argument("exact entry count mismatch");
  }

  int n_max_a_;
  int n_max_b_;
  Eigen::MatrixXcd entries_;
  std::optional<std::vector<GaussianRational>> exact_;
  double discarded_weight_ = 0.0;
};

using BipartiteState = std::variant<FockSuperposition, CoherentSuperposition, TruncatedDensityMatrix>;

/// |psi><psi| projected onto the truncated basis and renormalized. The weight
/// discarded by the projection is recorded; exceeding the threshold is fatal
/// since every downstream moment would silently inherit the bias.
inline TruncatedDensityMatrix to_density_matrix(const BipartiteState& state, int n_max_a,
                                                int n_max_b,
                                                double threshold = kDefaultTruncationThreshold) {
  if (n_max_a < 0 || n_max_b < 0) throw std::invalid_argument("negative cutoff");
  const int da = n_max_a + 1, db = n_max_b + 1, dim = da * db;

  if (const auto* fock = std::get_if<FockSuperposition>(&state)) {
    std::vector<GaussianRational> amp(dim);
    Rational kept = make_rational(0);
    for (const auto& t : fock->terms()) {
      if (t.n_a > n_max_a || t.n_b > n_max_b) continue;
      amp[t.n_a * db + t.n_b] = t.amp;
      kept += t.amp.norm2();
    }
    Rational discarded = (fock->norm_sq() - kept) / fock->norm_sq();
    double discarded_d = discarded.get_d();
    if (kept == 0 || discarded_d > threshold)
      throw TruncationTooSevere("truncation discards weight " + std::to_string(discarded_d) +
                                    " (threshold " + std::to_string(threshold) + ")",
                                discarded_d);
    std::vector<GaussianRational> exact(static_cast<std::size_t>(dim) * dim);
    Eigen::MatrixXcd m(dim, dim);
    for (int r = 0; r < dim; ++r) {
      for (int c = 0; c < dim; ++c) {
        GaussianRational v = amp[r] * amp[c].conj();
        v /= GaussianRational(kept);
        m(r, c) = v.to_complex();
        exact[static_cast<std::size_t>(r) * dim + c] = std::move(v);
      }
    }
    return TruncatedDensityMatrix::unchecked(n_max_a, n_max_b, std::move(m), std::move(exact),
                                             discarded_d);
  }

  if (const auto* coh = std::get_if<CoherentSuperposition>(&state)) {
    Eigen::VectorXcd amp(dim);
    double kept = 0.0;
    for (int na = 0; na < da; ++na)
      for (int nb = 0; nb < db; ++nb) {
        std::complex<double> v = coh->amplitude(na, nb);
        amp(na * db + nb) = v;
        kept += std::norm(v);
      }
    double discarded = 1.0 - kept;
    if (!(kept > 0.0) || discarded > threshold)
      throw TruncationTooSevere("truncation discards weight " + std::to_string(discarded) +
                                    " (threshold " + std::to_string(threshold) + ")",
                                discarded);
    Eigen::MatrixXcd m = (amp * amp.adjoint()) / kept;
    return TruncatedDensityMatrix::unchecked(n_max_a, n_max_b, std::move(m), std::nullopt,
                                             discarded);
  }

  const auto& rho = std::get<TruncatedDensityMatrix>(state);
  if (n_max_a >= rho.n_max_a() && n_max_b >= rho.n_max_b()) {
    // embed into the larger space; nothing is discarded
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    std::optional<std::vector<GaussianRational>> exact;
    if (rho.has_exact()) exact.emplace(static_cast<std::size_t>(dim) * dim);
    for (int ra = 0; ra <= rho.n_max_a(); ++ra)
      for (int rb = 0; rb <= rho.n_max_b(); ++rb)
        for (int ca = 0; ca <= rho.n_max_a(); ++ca)
          for (int cb = 0; cb <= rho.n_max_b(); ++cb) {
            int r = ra * db + rb, c = ca * db + cb;
            m(r, c) = rho.entries()(rho.index(ra, rb), rho.index(ca, cb));
            if (exact)
              (*exact)[static_cast<std::size_t>(r) * dim + c] =
                  rho.exact_at(rho.index(ra, rb), rho.index(ca, cb));
          }
    return TruncatedDensityMatrix::unchecked(n_max_a, n_max_b, std::move(m), std::move(exact),
                                             rho.discarded_weight());
  }
  // project onto the smaller space and renormalize
  Eigen::MatrixXcd m(dim, dim);
  for (int ra = 0; ra < da; ++ra)
    for (int rb = 0; rb < db; ++rb)
      for (int ca = 0; ca < da; ++ca)
        for (int cb = 0; cb < db; ++cb)
          m(ra * db + rb, ca * db + cb) =
              (ra <= rho.n_max_a() && rb <= rho.n_max_b() && ca <= rho.n_max_a() &&
               cb <= rho.n_max_b())
                  ? rho.entries()(rho.index(ra, rb), rho.index(ca, cb))
                  : std::complex<double>{};
  double kept = m.trace().real();
  double discarded = 1.0 - kept;
  if (!(kept > 0.0) || discarded > threshold)
    throw TruncationTooSevere("truncation discards weight " + std::to_string(discarded) +
                                  " (threshold " + std::to_string(threshold) + ")",
                              discarded);
  m /= kept;
  return TruncatedDensityMatrix::unchecked(n_max_a, n_max_b, std::move(m), std::nullopt,
                                           discarded);
}

// ---------------------------------------------------------------------------
// ladder operators on the truncated space
// ---------------------------------------------------------------------------

/// Single-mode ladder operator as an explicit (cutoff+1)^2 matrix,
/// <m|a|n> = sqrt(n) delta_{m,n-1}.
struct LadderMatrix {
  Mode mode = Mode::a;
  bool dagger = false;
  int cutoff = 0;
  Eigen::MatrixXcd entries;

  static LadderMatrix make(Mode mode, bool dagger, int cutoff) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(cutoff + 1, cutoff + 1);
    for (int n = 1; n <= cutoff; ++n) m(n - 1, n) = std::sqrt(static_cast<double>(n));
    if (dagger) m.adjointInPlace();
    return {mode, dagger, cutoff, std::move(m)};
  }
};

struct LadderFactor {
  Mode mode = Mode::a;
  bool dagger = false;
};

struct ApplyResult {
  Eigen::VectorXcd vec;
  double leakage = 0.0;  // squared norm pushed above the cutoff
};

/// Applies a product of ladder factors (leftmost factor acts last) to a
/// state vector on the truncated product basis. Raising above the cutoff
/// truncates but the lost squared norm is accumulated and reported.
inline ApplyResult apply_word(const Eigen::VectorXcd& vec, std::span<const LadderFactor> word,
                              int n_max_a, int n_max_b) {
  const int db = n_max_b + 1;
  if (vec.size() != static_cast<Eigen::Index>((n_max_a + 1) * db))
    throw std::invalid_argument("state vector dimension mismatch");
  ApplyResult out{vec, 0.0};
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    Eigen::VectorXcd next = Eigen::VectorXcd::Zero(out.vec.size());
    for (int na = 0; na <= n_max_a; ++na) {
      for (int nb = 0; nb <= n_max_b; ++nb) {
        std::complex<double> c = out.vec(na * db + nb);
        if (c == std::complex<double>{}) continue;
        int n = it->mode == Mode::a ? na : nb;
        if (it->dagger) {
          int cutoff = it->mode == Mode::a ? n_max_a : n_max_b;
          if (n == cutoff) {
            out.leakage += std::norm(c) * (n + 1);
            continue;
          }
          int idx = it->mode == Mode::a ? (na + 1) * db + nb : na * db + (nb + 1);
          next(idx) += c * std::sqrt(static_cast<double>(n + 1));
        } else {
          if (n == 0) continue;  // annihilated, not leaked
          int idx = it->mode == Mode::a ? (na - 1) * db + nb : na * db + (nb - 1);
          next(idx) += c * std::sqrt(static_cast<double>(n));
        }
      }
    }
    out.vec = std::move(next);
  }
  return out;
}

// ---------------------------------------------------------------------------
// state helpers
// ---------------------------------------------------------------------------

inline bool exact_capable(const BipartiteState& state) {
  if (std::holds_alternative<FockSuperposition>(state)) return true;
  if (const auto* rho = std::get_if<TruncatedDensityMatrix>(&state)) return rho->has_exact();
  return false;
}

namespace detail {
inline void fnv_mix(std::uint64_t& h, std::string_view s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
}
}  // namespace detail

/// Stable content hash used to key moment caches and tag reports.
inline std::string state_fingerprint(const BipartiteState& state) {
  std::uint64_t h = 14695981039346656037ull;
  if (const auto* fock = std::get_if<FockSuperposition>(&state)) {
    detail::fnv_mix(h, "fock");
    for (const auto& t : fock->terms()) {
      detail::fnv_mix(h, to_string(t.amp));
      detail::fnv_mix(h, ";" + std::to_string(t.n_a) + "," + std::to_string(t.n_b) + ";");
    }
  } else if (const auto* coh = std::get_if<CoherentSuperposition>(&state)) {
    detail::fnv_mix(h, "coherent");
    auto mix_c = [&h](std::complex<double> z) {
      detail::fnv_mix(h, std::to_string(z.real()) + "," + std::to_string(z.imag()) + ";");
    };
    for (const auto& t : coh->terms()) {
      mix_c(t.amp);
      mix_c(t.alpha);
      mix_c(t.beta);
    }
  } else {
    const auto& rho = std::get<TruncatedDensityMatrix>(state);
    detail::fnv_mix(h, "density" + std::to_string(rho.n_max_a()) + "," +
                           std::to_string(rho.n_max_b()));
    for (int r = 0; r < rho.dim(); ++r)
      for (int c = 0; c < rho.dim(); ++c) {
        std::complex<double> z = rho.entries()(r, c);
        detail::fnv_mix(h, std::to_string(z.real()) + "," + std::to_string(z.imag()) + ";");
      }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace npt
