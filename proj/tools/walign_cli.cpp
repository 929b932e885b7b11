// walign: penalized Wasserstein alignment from the command line.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "walign/alignment.hpp"
#include "walign/errors.hpp"
#include "walign/euclidean.hpp"
#include "walign/io.hpp"
#include "walign/measures.hpp"
#include "walign/ot.hpp"
#include "walign/validation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitSolver = 2;
constexpr int kExitValidation = 3;

struct RunConfig {
  std::string mu_path, nu_path;
  std::string family = "rotations2d:8";
  std::string cost = "sq-euclidean";
  std::string penalty_path;
  bool whiten = false;
  std::string out_path;
  std::string svg_path;
  std::string curve_path;
};

struct DemoConfig {
  std::vector<double> a{1.0, 0.0};
  int samples = 2000;
  int grid = 64;
  std::uint64_t seed = 7;
  std::string out_path = "mixture_report.json";
  std::string curve_path;
};

std::string sibling(const std::string& path, const std::string& suffix, const std::string& ext) {
  std::filesystem::path p(path);
  p.replace_filename(p.stem().string() + suffix + ext);
  return p.string();
}

std::pair<walign::DiscreteMeasure, walign::DiscreteMeasure> load_pair(const RunConfig& cfg) {
  auto mu = walign::read_measure_csv(cfg.mu_path);
  auto nu = walign::read_measure_csv(cfg.nu_path);
  if (cfg.whiten) {
    mu = walign::whiten(mu);
    nu = walign::whiten(nu);
  }
  return {std::move(mu), std::move(nu)};
}

int cmd_align(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto [mu, nu] = load_pair(cfg);
  const auto cost = walign::parse_cost_spec(cfg.cost);
  auto family = walign::parse_family_spec(cfg.family, mu.dim(), nu.dim());
  if (!cfg.penalty_path.empty()) {
    const auto pen = walign::read_penalties(cfg.penalty_path);
    family = family.with_penalties(pen);
  }
  const auto ct = walign::build_cost_tensor(mu, nu, family, cost);
  const auto report = walign::align(mu, nu, family, ct);
  auto json = walign::report_json(report, family);
  json["timingsMs"]["total"] =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  walign::write_text(cfg.out_path, walign::dump_json(json) + "\n");
  if (!cfg.svg_path.empty())
    walign::write_text(cfg.svg_path, walign::svg_scatter(nu, walign::pushforward(mu, family[report.theta_star])));
  if (!cfg.curve_path.empty()) walign::write_text(cfg.curve_path, walign::curve_csv(report, family));

  std::printf("value %s\n", walign::format_double(report.value).c_str());
  std::printf("theta* %d (%s)\n", report.theta_star, report.theta_label.c_str());
  for (const auto& w : report.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  return kExitOk;
}

int cmd_ot(const RunConfig& cfg) {
  const auto [mu, nu] = load_pair(cfg);
  if (mu.dim() != nu.dim()) throw walign::InputError("source and target dimensions differ");
  const auto cost = walign::parse_cost_spec(cfg.cost);
  const auto ot = walign::wasserstein(mu.weight_span(), nu.weight_span(), walign::cost_matrix(mu, nu, cost));
  std::printf("%s\n", walign::format_double(ot.value).c_str());
  walign::write_text(cfg.out_path, walign::plan_csv(ot.plan));
  walign::write_text(sibling(cfg.out_path, "_potentials", ".csv"), walign::potentials_csv(ot.potentials));
  return kExitOk;
}

std::string f_curve_csv() {
  const double cs[] = {0.0, 0.5, 1.0, 2.0};
  std::string out = "t,F_c0,F_c0.5,F_c1,F_c2\n";
  for (int s = 0; s <= 2000; ++s) {
    const double t = -8.0 + 16.0 * s / 2000.0;
    out += walign::format_double(t);
    for (double c : cs) out += "," + walign::format_double(walign::mixture_F(c, t));
    out += "\n";
  }
  return out;
}

int cmd_mixture_demo(const DemoConfig& cfg) {
  if (cfg.a.size() != 2) throw walign::InputError("--a takes two numbers");
  walign::Vector a(2);
  a << cfg.a[0], cfg.a[1];
  const auto t0 = std::chrono::steady_clock::now();
  const auto demo = walign::mixture_demo(a, cfg.samples, cfg.seed, cfg.grid);
  auto json = walign::report_json(demo.report, demo.family);
  json["timingsMs"]["total"] =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  json["thetaStarAngle"] = demo.theta_star_angle;
  json["targetAngle"] = demo.target_angle;
  json["angleError"] = demo.angle_error;
  json["a"] = cfg.a;
  json["samples"] = cfg.samples;
  json["grid"] = cfg.grid;
  json["seed"] = cfg.seed;
  json["warnings"] = demo.warnings;
  walign::write_text(cfg.out_path, walign::dump_json(json) + "\n");
  const std::string curve = cfg.curve_path.empty() ? sibling(cfg.out_path, "_F", ".csv") : cfg.curve_path;
  walign::write_text(curve, f_curve_csv());

  std::printf("value %s\n", walign::format_double(demo.report.value).c_str());
  std::printf("theta* %d angle %s (nearest target %s, error %s)\n", demo.report.theta_star,
              walign::format_double(demo.theta_star_angle).c_str(), walign::format_double(demo.target_angle).c_str(),
              walign::format_double(demo.angle_error).c_str());
  for (const auto& w : demo.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  return kExitOk;
}

int cmd_validate(std::uint64_t seed) {
  int failures = 0;
  walign::run_validation_suite(seed, [&](const walign::PropertyResult& r) {
    failures += !r.pass;
    std::printf("%s [%s] %s: %s (%.0f ms)\n", r.pass ? "PASS" : "FAIL", r.module.c_str(), r.name.c_str(),
                r.detail.c_str(), r.ms);
    std::fflush(stdout);
  });
  std::printf("%d propert%s failed\n", failures, failures == 1 ? "y" : "ies");
  return failures == 0 ? kExitOk : kExitValidation;
}

template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const walign::InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  } catch (const walign::SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kExitSolver;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  }
}

void add_pair_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--mu", cfg.mu_path, "source points CSV")->required();
  cmd->add_option("--nu", cfg.nu_path, "target points CSV")->required();
  cmd->add_option("--cost", cfg.cost, "sq-euclidean | power:<p> | inner:<scale>")->capture_default_str();
  cmd->add_flag("--whiten", cfg.whiten, "whiten both measures first");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Penalized Wasserstein alignment of discrete measures"};
  app.require_subcommand(1);

  RunConfig align_cfg;
  auto* align = app.add_subcommand("align", "solve the alignment dual, extract theta*, certify every theta");
  add_pair_options(align, align_cfg);
  align->add_option("--family", align_cfg.family, "rotations2d:<l> | matrices:<path> | igw:<path>")
      ->capture_default_str();
  align->add_option("--penalty", align_cfg.penalty_path, "file of per-theta penalties");
  align->add_option("--out", align_cfg.out_path, "JSON report path")->required();
  align->add_option("--svg", align_cfg.svg_path, "scatter of targets and the theta* pushforward");
  align->add_option("--curve", align_cfg.curve_path, "CSV of the objective curve over theta");

  RunConfig ot_cfg;
  auto* ot = app.add_subcommand("ot", "single optimal transport solve");
  add_pair_options(ot, ot_cfg);
  ot->add_option("--out", ot_cfg.out_path, "plan CSV path; potentials go to <stem>_potentials.csv")->required();

  DemoConfig demo_cfg;
  auto* demo = app.add_subcommand("mixture-demo", "projection of a two-component normal mixture onto a line");
  demo->add_option("--a", demo_cfg.a, "mixture center a in R^2")->expected(2)->capture_default_str();
  demo->add_option("--samples", demo_cfg.samples, "sample count")->capture_default_str();
  demo->add_option("--grid", demo_cfg.grid, "number of projection angles")->capture_default_str();
  demo->add_option("--seed", demo_cfg.seed, "random seed")->capture_default_str();
  demo->add_option("--out", demo_cfg.out_path, "JSON report path")->capture_default_str();
  demo->add_option("--curve", demo_cfg.curve_path, "F(t) curve CSV (default <stem>_F.csv)");

  std::uint64_t validate_seed = 20240611;
  auto* validate = app.add_subcommand("validate", "run the randomized property suite");
  validate->add_option("--seed", validate_seed, "random seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  if (*align) return guarded([&] { return cmd_align(align_cfg); });
  if (*ot) return guarded([&] { return cmd_ot(ot_cfg); });
  if (*demo) return guarded([&] { return cmd_mixture_demo(demo_cfg); });
  if (*validate) return guarded([&] { return cmd_validate(validate_seed); });
  return kExitInput;
}
