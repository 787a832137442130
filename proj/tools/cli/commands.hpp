#pragma once

// The four CLI commands. Each returns its report; printing and exit codes are
// handled by the caller.

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cli/config.hpp"
#include "finsler/alphabeta.hpp"
#include "finsler/classify.hpp"
#include "finsler/geometry.hpp"
#include "finsler/ratfunc.hpp"
#include "finsler/sampling.hpp"
#include "finsler/volume.hpp"

namespace finsler::cli {

inline json vec_json(const Vector& v) { return json(to_std(v)); }

inline json header(const RunConfig& cfg, const std::string& command) {
  json j;
  j["tool"] = kToolName;
  j["version"] = kVersion;
  j["config_hash"] = config_hash(cfg);
  j["command"] = command;
  j["dim"] = cfg.dim;
  j["phi"] = cfg.spec().phi().name();
  return j;
}

inline std::vector<std::vector<double>> base_points(const RunConfig& cfg) {
  auto pts = cfg.sample.base_points;
  if (cfg.sample.random_count > 0) {
    const auto r = random_base_points(cfg.dim, cfg.sample.random_count, cfg.sample.seed, cfg.sample.random_radius);
    pts.insert(pts.end(), r.begin(), r.end());
  }
  return pts;
}

inline SampleSet sample_of(const RunConfig& cfg) {
  return make_sample(cfg.spec(), base_points(cfg), cfg.sample.directions_per_point);
}

/// lambda at x: the configured override, else the volume value (0 where b = 0).
inline double lambda_at(const RunConfig& cfg, std::span<const double> x) {
  if (cfg.lambda) return *cfg.lambda;
  const MetricSpec& m = cfg.spec();
  if (!m.phi().uses_beta()) return 0.0;
  const double b2 = m.frame(x).b2;
  return b2 > 1e-24 ? lambda_of_b(m.phi(), std::sqrt(b2), m.dim()) : 0.0;
}

inline json cmd_curvatures(const RunConfig& cfg) {
  const MetricSpec& m = cfg.spec();
  const int n = m.dim();
  json rep = header(cfg, "curvatures");
  rep["s_source"] = n <= 3 ? "definitional" : "closed";
  json rows = json::array();
  for (const auto& base : sample_of(cfg)) {
    Vector grad;
    if (n <= 3) grad = log_sigma_gradient(m, base.x, cfg.resolution);
    const double lam = n <= 3 ? 0.0 : lambda_at(cfg, base.x);
    const int N = static_cast<int>(base.ys.size());
    for (int k = 0; k < N; ++k) {
      const PointState p = make_point(m, base.x, base.ys[k]);
      const CurvatureBundle cb = curvature_bundle(m, p);
      json row;
      row["x"] = base.x;
      row["y"] = base.ys[k];
      row["F"] = p.F;
      row["S"] = n <= 3 ? s_curvature_definitional(m, p, grad) : s_curvature_closed(m, p, lam);
      if (N > 1) {
        try {
          row["K"] = flag_curvature(m, p, base.ys[(k + 1) % N]);
        } catch (const DegenerateFlagError&) {
          row["K"] = nullptr;
        }
      } else {
        row["K"] = nullptr;
      }
      row["B_norm"] = cb.B.norm();
      row["D_norm"] = cb.D.norm();
      row["E_norm"] = cb.E.norm();
      row["J_norm"] = cb.J.norm();
      row["I_norm"] = cb.I.norm();
      rows.push_back(std::move(row));
    }
  }
  rep["samples"] = std::move(rows);
  return rep;
}

inline json flag_json(const ClassFlag& f) { return {{"holds", f.holds}, {"residual", f.residual}}; }
inline json fit_json(const IsotropicFit& f) { return {{"holds", f.holds}, {"residual", f.residual}, {"c", f.c}}; }

inline json report_json(const ClassificationReport& r) {
  json j;
  j["tol"] = r.tol;
  j["s_source"] = r.s_source;
  j["flags"] = {{"riemannian", flag_json(r.riemannian)},
                {"berwald", flag_json(r.berwald)},
                {"weakly_berwald", flag_json(r.weakly_berwald)},
                {"douglas", flag_json(r.douglas)},
                {"weakly_landsberg", flag_json(r.weakly_landsberg)},
                {"killing_beta", flag_json(r.killing_beta)},
                {"parallel_beta", flag_json(r.parallel_beta)},
                {"scalar_flag", flag_json(r.scalar_flag)}};
  json dc = json::array();
  for (const auto& v : r.almost_isotropic_flag.dc) dc.push_back(vec_json(v));
  json flag = {{"holds", r.almost_isotropic_flag.holds},
               {"residual", r.almost_isotropic_flag.residual},
               {"dc", dc},
               {"sigma", r.almost_isotropic_flag.sigma}};
  flag["exactness_residual"] = std::isnan(r.almost_isotropic_flag.exactness_residual)
                                   ? json(nullptr)
                                   : json(r.almost_isotropic_flag.exactness_residual);
  j["fits"] = {{"isotropic_S", fit_json(r.isotropic_S)},
               {"isotropic_E", fit_json(r.isotropic_E)},
               {"isotropic_berwald", fit_json(r.isotropic_berwald)},
               {"almost_isotropic_flag", flag}};
  if (r.lemma) {
    j["lemma"] = {{"branch", to_string(r.lemma->branch)},
                  {"residual", r.lemma->residual},
                  {"cs1_residual", r.lemma->cs1_residual},
                  {"cs2_residual", r.lemma->cs2_residual},
                  {"epsilon", r.lemma->epsilon}};
  } else {
    j["lemma"] = nullptr;
  }
  return j;
}

inline json cmd_classify(const RunConfig& cfg) {
  ClassifyOptions opt;
  opt.tol = cfg.tol.classify;
  opt.resolution = cfg.resolution;
  json rep = header(cfg, "classify");
  rep["report"] = report_json(classify_at_points(cfg.spec(), sample_of(cfg), opt));
  return rep;
}

struct VerifyResult {
  json report;
  bool passed = false;
};

namespace detail {

struct Checks {
  json list = json::array();
  bool ok = true;
  void add(const std::string& name, bool pass, double value, double threshold) {
    list.push_back({{"name", name}, {"pass", pass}, {"value", value}, {"threshold", threshold}});
    ok = ok && pass;
  }
  void add(const std::string& name, bool pass) {
    list.push_back({{"name", name}, {"pass", pass}});
    ok = ok && pass;
  }
};

inline double rel_err(const Vector& closed, const Vector& def) {
  return (closed - def).cwiseAbs().maxCoeff() / std::max(def.cwiseAbs().maxCoeff(), 1e-6);
}

}  // namespace detail

/// Certificates, scalar agreement and closed-form versus definitional suites on
/// the configured metric.
inline VerifyResult cmd_verify(const RunConfig& cfg) {
  const MetricSpec& m = cfg.spec();
  const int n = m.dim();
  detail::Checks ck;

  const auto cert = ratfunc::verify_matsumoto_reduction();
  ck.add("matsumoto_reduction_q", cert.q_ok);
  ck.add("matsumoto_reduction_theta", cert.theta_ok);
  ck.add("matsumoto_reduction_psi", cert.psi_ok);
  ck.add("q_denominator_phi_minus_s_phi_rejected", !ratfunc::verify_matsumoto_reduction(ratfunc::QDenominator::PhiMinusSPhi).q_ok);
  for (int d : {2, 3, 4}) ck.add("phi_nonvanishing_n" + std::to_string(d), ratfunc::phi_nonvanishing_certificate(d));
  if (m.phi().uses_beta() && m.phi().is_polynomial()) {
    std::vector<ratfunc::Rational> cs;
    for (double c : m.phi().coefficients()) cs.emplace_back(c);
    ck.add("phi_nonvanishing_configured", ratfunc::phi_nonvanishing_certificate(n, cs));
  }

  {
    std::mt19937_64 rng(cfg.sample.seed);
    std::uniform_real_distribution<double> ub(0.05, 0.3), uu(-1.0, 1.0);
    double worst = 0;
    for (int k = 0; k < 200; ++k) {
      const double b = ub(rng), s = b * uu(rng);
      const auto red = second_matsumoto_scalars(s, b * b);
      const auto gen = phi_scalars(PhiFamily::second_approx_matsumoto(), s, b * b, n);
      for (auto [x, y] : {std::pair{red.Q, gen.Q}, {red.Theta, gen.Theta}, {red.Psi, gen.Psi}})
        worst = std::max(worst, std::abs(x - y) / std::max(1.0, std::abs(y)));
    }
    ck.add("matsumoto_scalars_numeric", worst <= 1e-12, worst, 1e-12);
  }

  double eG = 0, eI = 0, eJ = 0, eJbar = 0, eIb = 0, eS = 0, inv = 0;
  bool s_checked = false;
  for (const auto& base : sample_of(cfg)) {
    const FrameAt fr = m.frame(base.x);
    Vector grad;
    const bool s_def = n <= 3;
    if (s_def) grad = log_sigma_gradient(m, base.x, cfg.resolution);
    const double lam = lambda_at(cfg, base.x);
    for (const auto& y : base.ys) {
      const PointState p = make_point(m, base.x, y);
      const CurvatureBundle cb = curvature_bundle(m, p);
      eG = std::max(eG, detail::rel_err(spray_closed_form(m, p), cb.G));
      const auto Ic = mean_cartan_closed(m, p);
      eI = std::max(eI, detail::rel_err(Ic.I, cb.I));
      const Vector Jc = mean_landsberg_closed(m, p);
      eJ = std::max(eJ, detail::rel_err(Jc, cb.J));
      Vector one(1);
      one << jbar(m, p);
      Vector ref(1);
      ref << cb.J.dot(fr.b_up);
      eJbar = std::max(eJbar, detail::rel_err(one, ref));
      one << Ic.I_dot_b;
      ref << cb.I.dot(fr.b_up);
      eIb = std::max(eIb, detail::rel_err(one, ref));
      if (s_def) {
        s_checked = true;
        eS = std::max(eS, std::abs(s_curvature_closed(m, p, lam) - s_curvature_definitional(m, p, grad)));
      }
      const Vector yv = to_vector(y);
      inv = std::max(inv, std::abs(yv.dot(cb.g * yv) - p.F * p.F) / (p.F * p.F));
      inv = std::max(inv, (cb.R * yv).cwiseAbs().maxCoeff() / (p.F * p.F));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double cy = 0;
          for (int k = 0; k < n; ++k) cy += cb.C(i, j, k) * y[k];
          inv = std::max(inv, std::abs(cy) * p.F);
        }
    }
  }
  const double tol = cfg.tol.oracle;
  ck.add("spray_closed_vs_definitional", eG <= tol, eG, tol);
  ck.add("mean_cartan_closed_vs_definitional", eI <= tol, eI, tol);
  ck.add("mean_cartan_b_contraction", eIb <= tol, eIb, tol);
  ck.add("mean_landsberg_closed_vs_definitional", eJ <= tol, eJ, tol);
  ck.add("mean_landsberg_b_contraction", eJbar <= tol, eJbar, tol);
  if (s_checked) ck.add("s_curvature_closed_vs_definitional", eS <= cfg.tol.s_curvature, eS, cfg.tol.s_curvature);
  ck.add("bundle_invariants", inv <= 1e-9, inv, 1e-9);

  VerifyResult r;
  r.report = header(cfg, "verify");
  r.report["checks"] = ck.list;
  r.report["passed"] = ck.ok;
  r.passed = ck.ok;
  return r;
}

/// CSV rows t, x1..xn, v1..vn, F.
inline std::string cmd_geodesic(const RunConfig& cfg) {
  if (!cfg.geodesic) throw ConfigError("geodesic", "missing field");
  const auto& g = *cfg.geodesic;
  const Trajectory tr = geodesic_integrate(cfg.spec(), g.x0, g.y0, g.t_end, g.step);
  std::ostringstream os;
  os.precision(17);
  const int n = cfg.dim;
  os << "t";
  for (int i = 1; i <= n; ++i) os << ",x" << i;
  for (int i = 1; i <= n; ++i) os << ",v" << i;
  os << ",F\n";
  for (const auto& s : tr.samples) {
    os << s.t;
    for (double v : s.x) os << ',' << v;
    for (double v : s.v) os << ',' << v;
    os << ',' << s.F << '\n';
  }
  return os.str();
}

}  // namespace finsler::cli
