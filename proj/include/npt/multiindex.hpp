#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace npt {

/// Exponent 4-tuple of the operator word a+^ad a^a b+^bd b^b.
/// Field order matches the conventional multiindex (i1,i2,i3,i4).
struct MultiIndex {
  int ad = 0;
  int a = 0;
  int bd = 0;
  int b = 0;

  int degree() const { return ad + a + bd + b; }
  bool is_identity() const { return degree() == 0; }

  /// Multiindex of the adjoint word.
  MultiIndex adjoint() const { return {a, ad, b, bd}; }

  auto operator<=>(const MultiIndex&) const = default;

  /// Human-readable word, e.g. "a+^2 a b" ("1" for the identity).
  std::string word() const {
    if (is_identity()) return "1";
    std::string s;
    auto emit = [&s](const char* sym, int p) {
      if (p == 0) return;
      if (!s.empty()) s += ' ';
      s += sym;
      if (p > 1) s += "^" + std::to_string(p);
    };
    emit("a+", ad);
    emit("a", a);
    emit("b+", bd);
    emit("b", b);
    return s;
  }
};

/// Index-reordering rule relating moments of the partially transposed state
/// to moments of the state itself: the b-mode exponents of the two
/// multiindices trade places. Applying it twice is the identity.
inline std::pair<MultiIndex, MultiIndex> swap_for_partial_transpose(const MultiIndex& i,
                                                                    const MultiIndex& j) {
  return {MultiIndex{i.ad, i.a, j.bd, j.b}, MultiIndex{j.ad, j.a, i.bd, i.b}};
}

/// Deterministic graded enumeration f_1, f_2, ... of operator words defining
/// row/column order of moment matrices. Always starts with the identity and
/// never repeats an entry.
class OperatorOrdering {
 public:
  OperatorOrdering(std::string name, std::vector<MultiIndex> ops)
      : name_(std::move(name)), ops_(std::move(ops)) {
    validate();
  }

  /// Default ordering: identity; a, a+, b, b+; then the degree-2 block with
  /// single-mode squares after the mixed products; degree >= 3 lexicographic.
  static OperatorOrdering sv_compatible(std::size_t n = 15) {
    std::vector<MultiIndex> ops = {{0, 0, 0, 0}};
    static const std::vector<MultiIndex> deg1 = {
        {0, 1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}};
    static const std::vector<MultiIndex> deg2 = {
        {1, 1, 0, 0}, {0, 0, 1, 1}, {0, 1, 0, 1}, {1, 0, 0, 1}, {0, 1, 1, 0},
        {1, 0, 1, 0}, {0, 2, 0, 0}, {2, 0, 0, 0}, {0, 0, 0, 2}, {0, 0, 2, 0}};
    ops.insert(ops.end(), deg1.begin(), deg1.end());
    ops.insert(ops.end(), deg2.begin(), deg2.end());
    for (int d = 3; ops.size() < n; ++d) append_degree(ops, d);
    ops.resize(std::max<std::size_t>(n, 1));
    return {"sv-compatible", std::move(ops)};
  }

  /// Pure graded lexicographic ordering.
  static OperatorOrdering grlex(std::size_t n = 15) {
    std::vector<MultiIndex> ops = {{0, 0, 0, 0}};
    for (int d = 1; ops.size() < n; ++d) append_degree(ops, d);
    ops.resize(std::max<std::size_t>(n, 1));
    return {"grlex", std::move(ops)};
  }

  static OperatorOrdering by_name(const std::string& name, std::size_t n = 15) {
    if (name == "sv-compatible") return sv_compatible(n);
    if (name == "grlex") return grlex(n);
    throw std::invalid_argument("unknown ordering name: " + name);
  }

  const std::string& name() const { return name_; }
  const std::vector<MultiIndex>& ops() const { return ops_; }
  std::size_t size() const { return ops_.size(); }
  const MultiIndex& at(std::size_t i) const { return ops_.at(i); }

  /// 1-based position of a word, or 0 when absent.
  std::size_t position_of(const MultiIndex& m) const {
    auto it = std::find(ops_.begin(), ops_.end(), m);
    return it == ops_.end() ? 0 : static_cast<std::size_t>(it - ops_.begin()) + 1;
  }

  std::string words(std::size_t n = 0) const {
    std::string s;
    std::size_t count = n == 0 ? ops_.size() : std::min(n, ops_.size());
    for (std::size_t i = 0; i < count; ++i) {
      if (i) s += ", ";
      s += ops_[i].word();
    }
    return s;
  }

 private:
  static void append_degree(std::vector<MultiIndex>& ops, int d) {
    std::vector<MultiIndex> block;
    for (int i1 = 0; i1 <= d; ++i1)
      for (int i2 = 0; i2 <= d - i1; ++i2)
        for (int i3 = 0; i3 <= d - i1 - i2; ++i3)
          block.push_back({i1, i2, i3, d - i1 - i2 - i3});
    std::sort(block.begin(), block.end());
    ops.insert(ops.end(), block.begin(), block.end());
  }

  void validate() const {
    if (ops_.empty()) throw std::invalid_argument("ordering must be nonempty");
    if (!ops_.front().is_identity())
      throw std::invalid_argument("ordering must start with the identity word");
    for (std::size_t i = 0; i + 1 < ops_.size(); ++i)
      if (ops_[i + 1].degree() < ops_[i].degree())
        throw std::invalid_argument("ordering must be graded (non-decreasing degree)");
    for (const auto& m : ops_)
      if (m.ad < 0 || m.a < 0 || m.bd < 0 || m.b < 0)
        throw std::invalid_argument("negative exponent in ordering");
    auto sorted = ops_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("duplicate word in ordering");
  }

  std::string name_;
  std::vector<MultiIndex> ops_;
};

}  // namespace npt
