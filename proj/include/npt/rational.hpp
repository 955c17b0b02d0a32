#pragma once

#include <gmpxx.h>

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>

#include "npt/errors.hpp"

namespace npt {

using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

/// Parses "p/q", plain integers, and decimal strings ("-0.25", "1e-3")
/// into an exact rational. Decimal strings lose nothing: 0.1 becomes 1/10.
inline Rational parse_rational(std::string_view text) {
  auto fail = [&] { throw ParseError("cannot parse rational: '" + std::string(text) + "'"); };
  if (text.empty()) fail();

  if (text.find('/') != std::string_view::npos) {
    Rational r;
    if (r.set_str(std::string(text), 10) != 0) fail();
    if (r.get_den() == 0) fail();
    r.canonicalize();
    return r;
  }

  std::size_t pos = 0;
  bool negative = false;
  if (text[pos] == '+' || text[pos] == '-') {
    negative = text[pos] == '-';
    ++pos;
  }
  std::string digits;
  long frac_digits = 0;
  bool seen_digit = false, seen_dot = false;
  for (; pos < text.size(); ++pos) {
    char c = text[pos];
    if (c >= '0' && c <= '9') {
      digits.push_back(c);
      seen_digit = true;
      if (seen_dot) ++frac_digits;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else {
      break;
    }
  }
  if (!seen_digit) fail();

  long exponent = 0;
  if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
    ++pos;
    bool exp_neg = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
      exp_neg = text[pos] == '-';
      ++pos;
    }
    if (pos == text.size()) fail();
    for (; pos < text.size(); ++pos) {
      char c = text[pos];
      if (c < '0' || c > '9') fail();
      exponent = exponent * 10 + (c - '0');
      if (exponent > 4096) fail();
    }
    if (exp_neg) exponent = -exponent;
  }
  if (pos != text.size()) fail();

  mpz_class mantissa(digits.empty() ? "0" : digits, 10);
  if (negative) mantissa = -mantissa;
  long shift = exponent - frac_digits;
  mpz_class pow10;
  mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(shift < 0 ? -shift : shift));
  Rational r = shift >= 0 ? Rational(mantissa * pow10) : Rational(mantissa, pow10);
  r.canonicalize();
  return r;
}

inline std::string to_string(const Rational& r) {
  return r.get_str();
}

/// Complex number with exact rational real and imaginary parts
/// (a Gaussian rational). The scalar ring of the exact backend.
struct GaussianRational {
  Rational re{0};
  Rational im{0};

  GaussianRational() = default;
  GaussianRational(Rational r) : re(std::move(r)) {}  // NOLINT(google-explicit-constructor)
  GaussianRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
  GaussianRational(long r, long i = 0) : re(make_rational(r)), im(make_rational(i)) {}

  /// Exact conversion: every finite double is a rational.
  static GaussianRational from_double(double r, double i = 0.0) {
    return {Rational(r), Rational(i)};
  }

  bool is_zero() const { return re == 0 && im == 0; }
  bool is_real() const { return im == 0; }

  GaussianRational conj() const { return {re, -im}; }
  Rational norm2() const { return re * re + im * im; }

  std::complex<double> to_complex() const { return {re.get_d(), im.get_d()}; }

  GaussianRational operator-() const { return {-re, -im}; }

  GaussianRational& operator+=(const GaussianRational& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  GaussianRational& operator-=(const GaussianRational& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  GaussianRational& operator*=(const GaussianRational& o) {
    Rational r = re * o.re - im * o.im;
    Rational i = re * o.im + im * o.re;
    re = std::move(r);
    im = std::move(i);
    return *this;
  }
  GaussianRational& operator/=(const GaussianRational& o) {
    Rational n2 = o.norm2();
    if (n2 == 0) throw std::domain_error("division by zero Gaussian rational");
    Rational r = (re * o.re + im * o.im) / n2;
    Rational i = (im * o.re - re * o.im) / n2;
    re = std::move(r);
    im = std::move(i);
    return *this;
  }

  friend GaussianRational operator+(GaussianRational a, const GaussianRational& b) { return a += b; }
  friend GaussianRational operator-(GaussianRational a, const GaussianRational& b) { return a -= b; }
  friend GaussianRational operator*(GaussianRational a, const GaussianRational& b) { return a *= b; }
  friend GaussianRational operator/(GaussianRational a, const GaussianRational& b) { return a /= b; }
  friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
    return a.re == b.re && a.im == b.im;
  }
};

inline std::string to_string(const GaussianRational& z) {
  if (z.im == 0) return z.re.get_str();
  std::string s = z.re.get_str();
  s += (z.im < 0) ? " - " : " + ";
  Rational ai = abs(z.im);
  s += ai.get_str() + "i";
  return s;
}

}  // namespace npt
