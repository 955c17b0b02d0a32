#pragma once

#include <nlohmann/json.hpp>

#include <complex>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "npt/errors.hpp"
#include "npt/fock.hpp"
#include "npt/minors.hpp"
#include "npt/moments.hpp"
#include "npt/ppt.hpp"
#include "npt/rational.hpp"

namespace npt {

using nlohmann::json;

/// Complex scalar from a two-element [re, im] array. Strings go through the
/// exact rational parser ("1/2", "-0.25"); bare numbers are converted exactly
/// from their double value.
inline GaussianRational parse_complex(const json& j) {
  if (!j.is_array() || j.size() != 2)
    throw ParseError("complex values must be [re, im] pairs: " + j.dump());
  auto part = [](const json& p) -> Rational {
    if (p.is_string()) return parse_rational(p.get<std::string>());
    if (p.is_number()) return Rational(p.get<double>());
    throw ParseError("complex component must be a string or number: " + p.dump());
  };
  return {part(j[0]), part(j[1])};
}

struct StateSpec {
  BipartiteState state;
  std::string kind;
  std::optional<std::pair<int, int>> cutoffs;
};

/// Parses the JSON state description: kind "fock", "coherent" or "density".
inline StateSpec parse_state_spec(const json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw ParseError("state file must be an object with a \"kind\" field");
  const std::string kind = j.at("kind").get<std::string>();

  std::optional<std::pair<int, int>> cutoffs;
  if (j.contains("cutoffs")) {
    const auto& c = j.at("cutoffs");
    if (!c.is_array() || c.size() != 2) throw ParseError("cutoffs must be [n_max_a, n_max_b]");
    cutoffs = {c[0].get<int>(), c[1].get<int>()};
  }

  if (kind == "fock") {
    std::vector<FockSuperposition::Term> terms;
    for (const auto& t : j.at("terms")) {
      FockSuperposition::Term term;
      term.amp = parse_complex(t.at("amplitude"));
      term.n_a = t.at("n_a").get<int>();
      term.n_b = t.at("n_b").get<int>();
      terms.push_back(std::move(term));
    }
    return {FockSuperposition(std::move(terms)), kind, cutoffs};
  }

  if (kind == "coherent") {
    std::vector<CoherentSuperposition::Term> terms;
    for (const auto& t : j.at("terms")) {
      CoherentSuperposition::Term term;
      term.amp = parse_complex(t.at("amplitude")).to_complex();
      term.alpha = parse_complex(t.at("alpha")).to_complex();
      term.beta = parse_complex(t.at("beta")).to_complex();
      terms.push_back(term);
    }
    return {CoherentSuperposition(std::move(terms)), kind, cutoffs};
  }

  if (kind == "density") {
    const int n_max_a = j.at("n_max_a").get<int>();
    const int n_max_b = j.at("n_max_b").get<int>();
    const int dim = (n_max_a + 1) * (n_max_b + 1);
    const auto& rows = j.at("entries");
    if (!rows.is_array() || static_cast<int>(rows.size()) != dim)
      throw ParseError("density entries must be a " + std::to_string(dim) + "x" +
                       std::to_string(dim) + " array");
    Eigen::MatrixXcd m(dim, dim);
    std::vector<GaussianRational> exact(static_cast<std::size_t>(dim) * dim);
    for (int r = 0; r < dim; ++r) {
      if (static_cast<int>(rows[r].size()) != dim) throw ParseError("ragged density row");
      for (int c = 0; c < dim; ++c) {
        GaussianRational v = parse_complex(rows[r][c]);
        m(r, c) = v.to_complex();
        exact[static_cast<std::size_t>(r) * dim + c] = std::move(v);
      }
    }
    // validate through the checking constructor, then keep the exact copy
    TruncatedDensityMatrix checked(n_max_a, n_max_b, m);
    return {TruncatedDensityMatrix::unchecked(n_max_a, n_max_b, std::move(m), std::move(exact),
                                              0.0),
            kind, cutoffs};
  }

  throw ParseError("unknown state kind: '" + kind + "'");
}

inline StateSpec load_state_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read state file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("invalid JSON in " + path + ": " + e.what());
  }
  try {
    return parse_state_spec(j);
  } catch (const json::exception& e) {
    throw ParseError("bad state description in " + path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// report serialization (schema "npt-report/1")
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json determinant_to_json(const MinorReport& r) {
  json d;
  d["decimal"] = format_double(r.det.real());
  d["rational"] = r.is_exact() ? json(r.exact_det->get_str()) : json(nullptr);
  d["exact"] = r.is_exact();
  d["sign"] = to_string(r.sign);
  return d;
}

inline json minor_to_json(const MinorReport& r, const OperatorOrdering& ordering) {
  json m;
  m["indices"] = r.subset.indices;
  m["operators"] = r.subset.words(ordering);
  m["determinant"] = determinant_to_json(r);
  return m;
}

inline json witness_to_json(const WitnessResult& w, const OperatorOrdering& ordering) {
  json o;
  o["verdict"] = w.witnessed() ? "NPT-witnessed" : "no-witness-found";
  o["subsets_examined"] = w.subsets_examined;
  o["max_cardinality"] = w.max_cardinality;
  o["ordering"] = w.ordering_name;
  if (w.witness) o["witness"] = minor_to_json(*w.minor, ordering);
  return o;
}

inline json oracle_to_json(const PartialTransposeResult& r) {
  json o;
  o["verdict"] = r.npt() ? "NPT" : "PPT-at-truncation";
  o["min_eigenvalue"] = r.min_eigenvalue;
  o["negativity"] = r.negativity;
  o["cutoffs"] = {r.n_max_a, r.n_max_b};
  return o;
}

/// Common report skeleton; commands attach their sections to it.
inline json make_report(const MomentMatrix& m) {
  json rep;
  rep["schema"] = "npt-report/1";
  rep["state_fingerprint"] = m.state_fingerprint;
  rep["ordering"] = {{"name", m.ordering.name()}, {"operators", m.ordering.words(m.size)}};
  rep["backend"] = to_string(m.backend);
  rep["transposed"] = m.transposed;
  rep["n_operators"] = m.size;
  return rep;
}

}  // namespace npt
