// plap: command-line front end for the phase-plane toolkit.
//
// Exit codes: 0 success, 2 invalid parameters or inadmissible request,
// 3 analysis failure, 4 I/O failure.

#include <chrono>
#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plap/analysis.hpp"
#include "plap/io.hpp"
#include "plap/params.hpp"
#include "plap/trajectories.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Common {
  std::optional<int> N;
  std::optional<double> p;
  std::optional<double> alpha;
  std::optional<int> eps;
  std::optional<double> tol;
  std::optional<double> tau_max;
  std::string out;
  std::string seed_file;
};

struct IntegrateOpts {
  double y0 = 0.0;
  double Y0 = 0.0;
  double tau0 = 0.0;
  bool backward = false;
};

struct ShootOpts {
  std::string kind;
  double a = 1.0;
  double c = 1.0;
  double r_bar = 1.0;
  double delta = 1e-7;
};

struct PortraitOpts {
  int grid = 0;
  std::vector<double> box{-1.0, 1.0, -1.0, 1.0};
  std::vector<std::string> special{"T_r", "T_eps", "T_alpha"};
  bool no_special = false;
};

struct AlphaCOpts {
  bool bisection = false;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

plap::ProblemParams require_params(const Common& c) {
  if (!c.N) throw UsageError("missing --N");
  if (!c.p) throw UsageError("missing --p");
  if (!c.alpha) throw UsageError("missing --alpha");
  if (!c.eps) throw UsageError("missing --eps");
  plap::ProblemParams pr{*c.N, *c.p, *c.alpha, *c.eps};
  plap::validate(pr);
  return pr;
}

plap::IntegrationConfig integration_config(const Common& c, double default_span) {
  plap::IntegrationConfig cfg;
  if (c.tol) cfg.rel_tol = *c.tol;
  cfg.max_time_span = c.tau_max.value_or(default_span);
  return cfg;
}

json common_json(const Common& c) {
  json j;
  j["tol"] = c.tol ? json(*c.tol) : json(nullptr);
  j["tau_max"] = c.tau_max ? json(*c.tau_max) : json(nullptr);
  j["seed_file"] = c.seed_file;
  return j;
}

/// Writes the primary output and its siblings, then the manifest beside the
/// primary output.
void emit(const std::string& command, const json& params, const json& config,
          const std::vector<std::pair<fs::path, std::string>>& files,
          std::chrono::steady_clock::time_point start) {
  plap::io::RunManifest m;
  m.command = command;
  m.params = params;
  m.config_hash = plap::io::sha256_hex(plap::io::dump_json(config, -1));
  for (const auto& [path, content] : files) {
    plap::io::write_file(path, content);
    m.outputs.push_back(plap::io::describe_output(path, content));
  }
  m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  plap::io::write_file(plap::io::manifest_path(files.front().first), plap::io::dump_json(plap::io::manifest_json(m)));
}

void emit_json(const std::string& command, const Common& c, const json& params, const json& config,
               const json& body, std::chrono::steady_clock::time_point start) {
  const std::string text = plap::io::dump_json(body);
  if (c.out.empty()) {
    std::cout << text;
  } else {
    emit(command, params, config, {{fs::path(c.out), text}}, start);
  }
}

void emit_trajectory(const std::string& command, const Common& c, const plap::Trajectory& tr, const json& config,
                     std::chrono::steady_clock::time_point start) {
  if (c.out.empty()) throw UsageError(command + " needs --out");
  const fs::path csv(c.out);
  emit(command, plap::io::params_json(tr.params), config,
       {{csv, plap::io::trajectory_csv(tr)}, {plap::io::events_path(csv), plap::io::events_csv(tr)}}, start);
}

std::vector<plap::PhaseState> read_seeds(const std::string& path) {
  std::vector<plap::PhaseState> seeds;
  if (path.empty()) return seeds;
  std::istringstream in(plap::io::read_file(path));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream ls(line);
    double y = 0.0, Y = 0.0;
    if (!(ls >> y)) continue;
    if (!(ls >> Y)) throw UsageError("seed file line " + std::to_string(lineno) + ": expected two numbers");
    seeds.push_back({0.0, y, Y});
  }
  return seeds;
}

int run_constants(const Common& c) {
  const auto pr = require_params(c);
  const auto start = std::chrono::steady_clock::now();
  const json body = plap::io::constants_json(pr, plap::derive_constants(pr));
  emit_json("constants", c, plap::io::params_json(pr), {{"command", "constants"}, {"params", plap::io::params_json(pr)}}, body,
            start);
  return 0;
}

int run_integrate(const Common& c, const IntegrateOpts& o) {
  const auto start = std::chrono::steady_clock::now();
  const auto pr = require_params(c);
  const auto cfg = integration_config(c, 50.0);
  const auto dir = o.backward ? plap::Direction::backward : plap::Direction::forward;
  const auto tr = plap::integrate(pr, plap::PhaseState{o.tau0, o.y0, o.Y0}, dir, cfg);
  json config = common_json(c);
  config["command"] = "integrate";
  config["params"] = plap::io::params_json(pr);
  config["initial"] = {o.tau0, o.y0, o.Y0};
  config["backward"] = o.backward;
  emit_trajectory("integrate", c, tr, config, start);
  return 0;
}

int run_shoot(const Common& c, const ShootOpts& o) {
  const auto start = std::chrono::steady_clock::now();
  const auto pr = require_params(c);
  const auto kind = plap::parse_special_kind(o.kind);
  if (!kind) throw UsageError("unknown trajectory kind '" + o.kind + "'");
  plap::ShootConfig sc;
  sc.delta = o.delta;
  sc.integration = integration_config(c, 200.0);
  plap::Shot shot;
  try {
    shot = *kind == plap::SpecialKind::T_eps ? plap::shoot_double_zero(pr, o.r_bar, sc)
                                              : plap::shoot(*kind, pr, sc, o.a, o.c);
  } catch (const plap::ParamError& e) {
    throw plap::ParamError("inadmissible trajectory kind " + o.kind + " for " + plap::describe(pr) + ": " + e.what());
  }
  json config = common_json(c);
  config["command"] = "shoot";
  config["params"] = plap::io::params_json(pr);
  config["kind"] = o.kind;
  config["a"] = o.a;
  config["c"] = o.c;
  config["r_bar"] = o.r_bar;
  config["delta"] = o.delta;
  emit_trajectory("shoot", c, shot.trajectory, config, start);
  return 0;
}

std::vector<plap::Vec2> points_of(const plap::Trajectory& tr) {
  std::vector<plap::Vec2> pts;
  pts.reserve(tr.samples.size());
  for (const auto& s : tr.samples) pts.push_back({s.y, s.Y});
  return pts;
}

int run_portrait(const Common& c, const PortraitOpts& o) {
  const auto start = std::chrono::steady_clock::now();
  const auto pr = require_params(c);
  if (c.out.empty()) throw UsageError("portrait needs --out");
  if (o.box.size() != 4) throw UsageError("--box takes y_min y_max Y_min Y_max");
  const auto cfg = integration_config(c, 20.0);

  plap::io::Portrait pt;
  pt.params = pr;
  pt.y_min = o.box[0];
  pt.y_max = o.box[1];
  pt.Y_min = o.box[2];
  pt.Y_max = o.box[3];
  pt.stationary_points = plap::classify_stationary_points(pr);

  auto seeds = read_seeds(c.seed_file);
  for (int i = 0; i < o.grid; ++i) {
    for (int k = 0; k < o.grid; ++k) {
      const double y = pt.y_min + (i + 0.5) / o.grid * (pt.y_max - pt.y_min);
      const double Y = pt.Y_min + (k + 0.5) / o.grid * (pt.Y_max - pt.Y_min);
      seeds.push_back({0.0, y, Y});
    }
  }
  for (const auto& s : seeds) {
    if (s.y == 0.0 && s.Y == 0.0) continue;
    for (auto dir : {plap::Direction::backward, plap::Direction::forward}) {
      const auto tr = plap::integrate(pr, s, dir, cfg);
      pt.curves.push_back({points_of(tr), "seed"});
    }
  }

  std::vector<std::string> skipped;
  plap::ShootConfig sc;
  sc.integration = cfg;
  sc.consistency_check = false;
  for (const auto& name : o.no_special ? std::vector<std::string>{} : o.special) {
    const auto kind = plap::parse_special_kind(name);
    if (!kind) throw UsageError("unknown trajectory kind '" + name + "'");
    try {
      const auto shot = plap::shoot(*kind, pr, sc);
      pt.curves.push_back({points_of(shot.trajectory), name});
    } catch (const plap::ParamError&) {
      skipped.push_back(name);
    } catch (const plap::DomainError&) {
      skipped.push_back(name);
    }
  }
  for (const auto& name : skipped) std::cerr << "portrait: " << name << " not drawn for " << plap::describe(pr) << '\n';

  json config = common_json(c);
  config["command"] = "portrait";
  config["params"] = plap::io::params_json(pr);
  config["grid"] = o.grid;
  config["box"] = o.box;
  config["special"] = o.no_special ? std::vector<std::string>{} : o.special;
  config["seed_count"] = seeds.size();
  emit("portrait", plap::io::params_json(pr), config, {{fs::path(c.out), plap::io::portrait_svg(pt)}}, start);
  return 0;
}

int run_alpha_c(const Common& c, const AlphaCOpts& o) {
  const auto start = std::chrono::steady_clock::now();
  if (!c.N) throw UsageError("missing --N");
  if (!c.p) throw UsageError("missing --p");
  // Any admissible alpha validates (N, p); alpha is not an input here.
  plap::validate({*c.N, *c.p, -1.0, -1});
  plap::AlphaCConfig cfg;
  if (c.tol) cfg.tol = *c.tol;
  cfg.force_bisection = o.bisection;
  const auto r = plap::find_alpha_c(*c.N, *c.p, cfg);
  const json params = {{"N", *c.N}, {"p", *c.p}};
  json config = common_json(c);
  config["command"] = "alpha-c";
  config["params"] = params;
  config["bisection"] = o.bisection;
  emit_json("alpha-c", c, params, config, plap::io::alpha_c_json(*c.N, *c.p, r), start);
  return 0;
}

int run_classify(const Common& c) {
  const auto start = std::chrono::steady_clock::now();
  const auto pr = require_params(c);
  plap::RegimeConfig cfg;
  if (c.tau_max) cfg.tau_budget = *c.tau_max;
  if (c.tol) cfg.shoot.integration.rel_tol = *c.tol;
  const auto report = plap::classify_regime(pr, cfg);
  json config = common_json(c);
  config["command"] = "classify";
  config["params"] = plap::io::params_json(pr);
  emit_json("classify", c, plap::io::params_json(pr), config, plap::io::report_json(report), start);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-plane toolkit for radial self-similar profiles of the p-Laplace heat equation (p > 2)"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file supplying defaults")->envname("PLAP_CONFIG");
  app.set_version_flag("--version", std::string(plap::io::kToolVersion));

  Common c;
  app.add_option("--N", c.N, "space dimension");
  app.add_option("--p", c.p, "exponent p > 2");
  app.add_option("--alpha", c.alpha, "self-similarity exponent, nonzero");
  app.add_option("--eps", c.eps, "1 (t > 0 profiles) or -1 (t < 0 profiles)");
  app.add_option("--tol", c.tol, "relative integration tolerance (alpha-c: bracket width)");
  app.add_option("--tau-max", c.tau_max, "tau span of each integration (classify: tau budget)");
  app.add_option("--out", c.out, "output file; JSON commands print to stdout without it");
  app.add_option("--seed-file", c.seed_file, "portrait seeds, one 'y Y' pair per line");

  auto* constants = app.add_subcommand("constants", "derived constants as JSON");

  IntegrateOpts io;
  auto* integrate = app.add_subcommand("integrate", "integrate S from one point; CSV output");
  integrate->add_option("--y0", io.y0, "initial y")->required();
  integrate->add_option("--Y0", io.Y0, "initial Y")->required();
  integrate->add_option("--tau0", io.tau0, "initial tau");
  integrate->add_flag("--backward", io.backward, "integrate towards decreasing tau");

  ShootOpts so;
  auto* shoot = app.add_subcommand("shoot", "construct a special trajectory; CSV output");
  shoot->add_option("--kind", so.kind, "T_r, T_eps, T_alpha, T_eta, T_u, T_plus, T_minus")->required();
  shoot->add_option("--a", so.a, "w(0) for T_r and T_+/-");
  shoot->add_option("--c", so.c, "flux constant for T_+/-");
  shoot->add_option("--r-bar", so.r_bar, "double-zero radius for T_eps");
  shoot->add_option("--delta", so.delta, "manifold offset");

  PortraitOpts po;
  auto* portrait = app.add_subcommand("portrait", "SVG phase portrait in the (y, Y) plane");
  portrait->add_option("--grid", po.grid, "n x n seed grid inside the box");
  portrait->add_option("--box", po.box, "y_min y_max Y_min Y_max")->expected(4);
  portrait->add_option("--special", po.special, "special trajectories to overlay")->expected(1, 7);
  portrait->add_flag("--no-special", po.no_special, "draw seeds and stationary points only");

  AlphaCOpts ao;
  auto* alpha_c = app.add_subcommand("alpha-c", "critical exponent alpha_c(N, p) as JSON");
  alpha_c->add_flag("--bisection", ao.bisection, "bisect even where a closed form exists");

  auto* classify = app.add_subcommand("classify", "regime report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (constants->parsed()) return run_constants(c);
    if (integrate->parsed()) return run_integrate(c, io);
    if (shoot->parsed()) return run_shoot(c, so);
    if (portrait->parsed()) return run_portrait(c, po);
    if (alpha_c->parsed()) return run_alpha_c(c, ao);
    if (classify->parsed()) return run_classify(c);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const plap::ParamError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const plap::AnalysisError& e) {
    std::cerr << "analysis failed: " << e.what() << '\n';
    return 3;
  } catch (const plap::DomainError& e) {
    std::cerr << "analysis failed: " << e.what() << '\n';
    return 3;
  } catch (const plap::io::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 4;
  }
  return 2;
}
