#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numeric>

#include "npt/rational.hpp"

namespace npt {

/// Exact sum of terms c_d * sqrt(d) with Gaussian-rational coefficients and
/// squarefree positive integer radicands. Closed under +, -, * and
/// conjugation, which is all the moment accumulator needs: values are either
/// extracted as Gaussian rationals (radicand 1 only) or reported as carrying
/// a surd residue.
class SurdSum {
 public:
  SurdSum() = default;
  SurdSum(GaussianRational r) {  // NOLINT(google-explicit-constructor)
    if (!r.is_zero()) terms_.emplace(1, std::move(r));
  }

  /// sqrt(n) with the square part pulled out: sqrt(12) = 2*sqrt(3).
  static SurdSum sqrt_of(std::uint64_t n) {
    if (n == 0) return SurdSum{};
    std::uint64_t square = 1, radicand = 1;
    for (std::uint64_t p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
      while (n % (p * p) == 0) {
        square *= p;
        n /= p * p;
      }
      if (n % p == 0) {
        radicand *= p;
        n /= p;
      }
    }
    radicand *= n;
    SurdSum s;
    s.terms_.emplace(radicand, GaussianRational(make_rational(static_cast<long>(square))));
    return s;
  }

  /// sqrt of a falling factorial n(n-1)...(n-k+1), factor by factor so no
  /// large integer ever needs factoring.
  static SurdSum sqrt_of_falling(std::uint64_t n, unsigned k) {
    SurdSum s{GaussianRational(1, 0)};
    for (unsigned i = 0; i < k; ++i) s = s * sqrt_of(n - i);
    return s;
  }

  bool is_zero() const { return terms_.empty(); }

  /// True when no radicand other than 1 survived.
  bool is_rational() const {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == 1);
  }

  /// The value as a Gaussian rational; only valid when is_rational().
  GaussianRational as_rational() const {
    if (terms_.empty()) return GaussianRational{};
    if (!is_rational()) throw IrrationalValue("surd residue survived the final sum");
    return terms_.begin()->second;
  }

  SurdSum conj() const {
    SurdSum s;
    for (const auto& [d, c] : terms_) s.terms_.emplace(d, c.conj());
    return s;
  }

  std::complex<double> to_complex() const {
    std::complex<double> v{0.0, 0.0};
    for (const auto& [d, c] : terms_) v += c.to_complex() * std::sqrt(static_cast<double>(d));
    return v;
  }

  SurdSum& operator+=(const SurdSum& o) {
    for (const auto& [d, c] : o.terms_) add_term(d, c);
    return *this;
  }
  SurdSum& operator-=(const SurdSum& o) {
    for (const auto& [d, c] : o.terms_) add_term(d, -c);
    return *this;
  }

  friend SurdSum operator+(SurdSum a, const SurdSum& b) { return a += b; }
  friend SurdSum operator-(SurdSum a, const SurdSum& b) { return a -= b; }

  friend SurdSum operator*(const SurdSum& a, const SurdSum& b) {
    SurdSum out;
    for (const auto& [d1, c1] : a.terms_) {
      for (const auto& [d2, c2] : b.terms_) {
        // both radicands squarefree: d1*d2 = g^2 * m with g = gcd, m squarefree
        std::uint64_t g = std::gcd(d1, d2);
        unsigned __int128 m128 =
            static_cast<unsigned __int128>(d1 / g) * static_cast<unsigned __int128>(d2 / g);
        if (m128 > UINT64_MAX) throw Error("surd radicand overflow");
        GaussianRational coeff = c1 * c2;
        coeff *= GaussianRational(make_rational(static_cast<long>(g)));
        out.add_term(static_cast<std::uint64_t>(m128), coeff);
      }
    }
    return out;
  }

  SurdSum& operator*=(const SurdSum& o) { return *this = *this * o; }

  SurdSum& scale(const GaussianRational& c) {
    if (c.is_zero()) {
      terms_.clear();
      return *this;
    }
    for (auto& [d, coeff] : terms_) coeff *= c;
    return *this;
  }

  const std::map<std::uint64_t, GaussianRational>& terms() const { return terms_; }

 private:
  void add_term(std::uint64_t d, const GaussianRational& c) {
    if (c.is_zero()) return;
    auto [it, inserted] = terms_.try_emplace(d, c);
    if (!inserted) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  std::map<std::uint64_t, GaussianRational> terms_;
};

}  // namespace npt
