// finsler: curvature reports, classification, verification and geodesics
// for (alpha, beta)-metrics described by a JSON configuration.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cli/commands.hpp"

namespace {

using finsler::cli::json;

enum ExitCode { kOk = 0, kConfig = 2, kDomain = 3, kVerify = 4 };

int report_error(const std::string& type, const std::string& message, int code, json extra = json::object()) {
  json err = {{"type", type}, {"message", message}, {"exit_code", code}};
  err.update(extra);
  std::cerr << json{{"error", err}}.dump() << "\n";
  return code;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw finsler::ArgumentError("cannot write output file '" + out + "'");
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finsler geometry of (alpha, beta)-metrics"};
  app.require_subcommand(1);
  std::string config, out;
  double tol = 0;
  long long seed = -1;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON configuration file")->required();
    sub->add_option("--out", out, "write the report here instead of stdout");
    sub->add_option("--tol", tol, "classification tolerance override")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "sampling seed override")->check(CLI::NonNegativeNumber);
  };
  auto* curv = app.add_subcommand("curvatures", "per-sample curvature scalars as JSON");
  auto* cls = app.add_subcommand("classify", "classification report as JSON");
  auto* ver = app.add_subcommand("verify", "certificates and closed-form/definitional suites");
  auto* geo = app.add_subcommand("geodesic", "RK4 geodesic as CSV");
  for (auto* s : {curv, cls, ver, geo}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("ArgumentError", e.what(), kConfig);
  }

  try {
    finsler::cli::RunConfig cfg = finsler::cli::load_config(config);
    if (tol > 0) cfg.tol.classify = tol;
    if (seed >= 0) cfg.sample.seed = static_cast<std::uint64_t>(seed);
    if (curv->parsed()) {
      emit(finsler::cli::cmd_curvatures(cfg).dump(2) + "\n", out);
    } else if (cls->parsed()) {
      emit(finsler::cli::cmd_classify(cfg).dump(2) + "\n", out);
    } else if (ver->parsed()) {
      const auto r = finsler::cli::cmd_verify(cfg);
      emit(r.report.dump(2) + "\n", out);
      return r.passed ? kOk : kVerify;
    } else if (geo->parsed()) {
      emit(finsler::cli::cmd_geodesic(cfg), out);
    }
    return kOk;
  } catch (const finsler::ConfigError& e) {
    return report_error("ConfigError", e.what(), kConfig, {{"path", e.path()}});
  } catch (const finsler::ParseError& e) {
    return report_error("ParseError", e.what(), kConfig, {{"offset", e.offset()}});
  } catch (const finsler::ArgumentError& e) {
    return report_error("ArgumentError", e.what(), kConfig);
  } catch (const finsler::IntegrationError& e) {
    return report_error("IntegrationError", e.what(), kDomain, {{"last_valid_t", e.last_valid_t()}});
  } catch (const finsler::RegularityError& e) {
    return report_error("RegularityError", e.what(), kDomain);
  } catch (const finsler::DomainError& e) {
    return report_error("DomainError", e.what(), kDomain);
  } catch (const finsler::DegenerateFlagError& e) {
    return report_error("DegenerateFlagError", e.what(), kDomain);
  } catch (const finsler::EvaluationError& e) {
    return report_error("EvaluationError", e.what(), kDomain);
  } catch (const finsler::ArithmeticError& e) {
    return report_error("ArithmeticError", e.what(), kDomain);
  } catch (const finsler::Error& e) {
    return report_error("Error", e.what(), kDomain);
  }
}
