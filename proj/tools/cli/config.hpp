#pragma once

// Run configuration: JSON document -> validated RunConfig.

#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/expr.hpp"
#include "finsler/metric.hpp"
#include "json.hpp"

namespace finsler::cli {

using json = nlohmann::json;

inline constexpr const char* kToolName = "finsler";
inline constexpr const char* kVersion = "0.1.0";

struct SampleConfig {
  std::vector<std::vector<double>> base_points;
  int random_count = 0;
  double random_radius = 0.2;
  int directions_per_point = 20;
  std::uint64_t seed = 0;
};

struct Tolerances {
  double classify = 1e-7;
  double oracle = 1e-7;
  double s_curvature = 2e-3;
};

struct GeodesicConfig {
  std::vector<double> x0, y0;
  double t_end = 1.0;
  double step = 1e-2;
};

struct RunConfig {
  int dim = 0;
  std::vector<std::vector<std::string>> a_text;
  std::vector<std::string> b_text;
  std::optional<MetricSpec> metric;
  SampleConfig sample;
  Tolerances tol;
  int resolution = 64;
  std::optional<double> lambda;
  std::optional<GeodesicConfig> geodesic;
  /// Canonical (key-sorted) serialization of the input document.
  std::string canonical;

  const MetricSpec& spec() const { return *metric; }
};

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string config_hash(const RunConfig& c) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << fnv1a(c.canonical);
  return os.str();
}

namespace detail {

inline std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

inline const json& require(const json& j, const std::string& key, const std::string& base) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(join(base, key), "missing field");
  return j.at(key);
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

inline int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<int>();
}

inline double positive(const json& j, const std::string& path) {
  const double v = number(j, path);
  if (!(v > 0.0)) throw ConfigError(path, "must be positive");
  return v;
}

inline std::vector<double> vec(const json& j, const std::string& path, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    throw ConfigError(path, "expected an array of " + std::to_string(dim) + " numbers");
  std::vector<double> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number(j[i], path + "." + std::to_string(i + 1)));
  return v;
}

/// Expression text; numbers are accepted and printed back.
inline std::string expr_text(const json& j, const std::string& path) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number()) {
    std::ostringstream os;
    os.precision(17);
    os << j.get<double>();
    return os.str();
  }
  throw ConfigError(path, "expected an expression string");
}

inline expr::Expr parse_at(const std::string& text, int dim, const std::string& path) {
  try {
    return expr::parse(text, dim);
  } catch (const ParseError& e) {
    throw ConfigError(path, std::string("parse error: ") + e.what());
  }
}

inline PhiFamily parse_phi(const json& j, const std::string& path) {
  const json& fam = require(j, "family", path);
  if (!fam.is_string()) throw ConfigError(join(path, "family"), "expected a string");
  const std::string f = fam.get<std::string>();
  try {
    if (f == "riemannian") return PhiFamily::riemannian();
    if (f == "randers") return PhiFamily::randers();
    if (f == "matsumoto") return PhiFamily::matsumoto();
    if (f == "second_approx_matsumoto") return PhiFamily::second_approx_matsumoto();
    if (f == "approx_matsumoto") return PhiFamily::approx_matsumoto(integer(require(j, "order", path), join(path, "order")));
    if (f == "custom_polynomial") {
      const json& c = require(j, "coefficients", path);
      if (!c.is_array() || c.empty()) throw ConfigError(join(path, "coefficients"), "expected a non-empty array");
      std::vector<double> cs;
      for (std::size_t i = 0; i < c.size(); ++i)
        cs.push_back(number(c[i], join(path, "coefficients." + std::to_string(i + 1))));
      return PhiFamily::custom_polynomial(cs);
    }
  } catch (const ArgumentError& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(join(path, "family"), "unknown family '" + f + "'");
}

/// a_ij and a_ji agree if printed identically or numerically at a few fixed points.
inline bool same_function(const expr::Expr& p, const expr::Expr& q, int dim) {
  if (p.str() == q.str()) return true;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  int compared = 0;
  for (int t = 0; t < 8; ++t) {
    std::vector<double> x(dim);
    for (auto& v : x) v = u(rng);
    try {
      const double a = expr::eval_expr(p, x), b = expr::eval_expr(q, x);
      ++compared;
      if (std::abs(a - b) > 1e-12 * (1.0 + std::abs(a))) return false;
    } catch (const EvaluationError&) {
    }
  }
  return compared > 0;
}

}  // namespace detail

/// Validates a parsed document. Paths in errors are dotted with 1-based indices.
inline RunConfig config_from_json(const json& j) {
  using namespace detail;
  if (!j.is_object()) throw ConfigError("", "configuration must be a JSON object");
  RunConfig c;
  c.canonical = j.dump();
  c.dim = integer(require(j, "dim", ""), "dim");
  if (c.dim < 2) throw ConfigError("dim", "must be at least 2");
  const int n = c.dim;

  const json& a = require(j, "a", "");
  if (!a.is_array() || static_cast<int>(a.size()) != n) throw ConfigError("a", "expected a dim x dim array");
  std::vector<std::vector<expr::Expr>> ae(n);
  for (int i = 0; i < n; ++i) {
    const std::string row = "a." + std::to_string(i + 1);
    if (!a[i].is_array() || static_cast<int>(a[i].size()) != n) throw ConfigError(row, "expected " + std::to_string(n) + " entries");
    c.a_text.emplace_back();
    for (int k = 0; k < n; ++k) {
      const std::string path = row + "." + std::to_string(k + 1);
      c.a_text.back().push_back(expr_text(a[i][k], path));
      ae[i].push_back(parse_at(c.a_text.back().back(), n, path));
    }
  }
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k)
      if (!same_function(ae[i][k], ae[k][i], n))
        throw ConfigError("a." + std::to_string(i + 1) + "." + std::to_string(k + 1), "a is not symmetric");

  const PhiFamily phi = parse_phi(require(j, "phi", ""), "phi");
  std::vector<expr::Expr> be;
  if (j.contains("b")) {
    const json& b = j.at("b");
    if (!b.is_array() || static_cast<int>(b.size()) != n) throw ConfigError("b", "expected " + std::to_string(n) + " entries");
    for (int i = 0; i < n; ++i) {
      const std::string path = "b." + std::to_string(i + 1);
      c.b_text.push_back(expr_text(b[i], path));
      be.push_back(parse_at(c.b_text.back(), n, path));
    }
  } else if (phi.uses_beta()) {
    throw ConfigError("b", "missing field");
  } else {
    for (int i = 0; i < n; ++i) {
      c.b_text.emplace_back("0");
      be.push_back(expr::parse("0", n));
    }
  }
  c.metric.emplace(n, std::move(ae), std::move(be), phi);

  if (j.contains("sample")) {
    const json& s = j.at("sample");
    if (!s.is_object()) throw ConfigError("sample", "expected an object");
    if (s.contains("base_points")) {
      const json& bp = s.at("base_points");
      if (!bp.is_array()) throw ConfigError("sample.base_points", "expected an array");
      for (std::size_t i = 0; i < bp.size(); ++i)
        c.sample.base_points.push_back(vec(bp[i], "sample.base_points." + std::to_string(i + 1), n));
    }
    if (s.contains("random_base_points")) {
      const json& r = s.at("random_base_points");
      c.sample.random_count = integer(require(r, "count", "sample.random_base_points"), "sample.random_base_points.count");
      if (c.sample.random_count < 0) throw ConfigError("sample.random_base_points.count", "must be non-negative");
      if (r.contains("radius")) c.sample.random_radius = positive(r.at("radius"), "sample.random_base_points.radius");
    }
    if (s.contains("directions_per_point")) {
      c.sample.directions_per_point = integer(s.at("directions_per_point"), "sample.directions_per_point");
      if (c.sample.directions_per_point < 1) throw ConfigError("sample.directions_per_point", "must be positive");
    }
    if (s.contains("seed")) {
      const json& sd = s.at("seed");
      if (!sd.is_number_unsigned() && !(sd.is_number_integer() && sd.get<long long>() >= 0))
        throw ConfigError("sample.seed", "expected a non-negative integer");
      c.sample.seed = sd.get<std::uint64_t>();
    }
  }
  if (c.sample.base_points.empty() && c.sample.random_count == 0) c.sample.base_points.push_back(std::vector<double>(n, 0.0));

  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    if (!t.is_object()) throw ConfigError("tolerances", "expected an object");
    if (t.contains("classify")) c.tol.classify = positive(t.at("classify"), "tolerances.classify");
    if (t.contains("oracle")) c.tol.oracle = positive(t.at("oracle"), "tolerances.oracle");
    if (t.contains("s_curvature")) c.tol.s_curvature = positive(t.at("s_curvature"), "tolerances.s_curvature");
  }
  if (j.contains("quadrature")) {
    const json& q = j.at("quadrature");
    if (q.contains("resolution")) {
      c.resolution = integer(q.at("resolution"), "quadrature.resolution");
      if (c.resolution < 1) throw ConfigError("quadrature.resolution", "must be positive");
    }
  }
  if (j.contains("lambda") && !j.at("lambda").is_null()) c.lambda = number(j.at("lambda"), "lambda");
  if (j.contains("geodesic")) {
    const json& g = j.at("geodesic");
    GeodesicConfig gc;
    gc.x0 = vec(require(g, "x0", "geodesic"), "geodesic.x0", n);
    gc.y0 = vec(require(g, "y0", "geodesic"), "geodesic.y0", n);
    if (g.contains("t_end")) {
      gc.t_end = number(g.at("t_end"), "geodesic.t_end");
      if (gc.t_end < 0) throw ConfigError("geodesic.t_end", "must be non-negative");
    }
    if (g.contains("step")) gc.step = positive(g.at("step"), "geodesic.step");
    c.geodesic = gc;
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open configuration file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  return config_from_json(j);
}

}  // namespace finsler::cli
