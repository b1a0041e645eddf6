#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "plap/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kWork = fs::temp_directory_path() / "plap_cli_test";

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

RunResult run(const std::string& args, const std::string& env = "") {
  fs::create_directories(kWork);
  const auto out = kWork / "stdout.txt";
  const auto err = kWork / "stderr.txt";
  const std::string cmd = "cd '" + kWork.string() + "' && env -u PLAP_CONFIG " + env + " '" + std::string(PLAP_CLI_PATH) + "' " +
                          args + " >'" + out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = plap::io::read_file(out);
  r.err = plap::io::read_file(err);
  return r;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  return lines;
}

std::vector<double> split_numbers(const std::string& line) {
  std::vector<double> v;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');) v.push_back(std::stod(cell));
  return v;
}

struct Polyline {
  std::string cls;
  std::vector<plap::Vec2> pts;
};

std::string attribute(const std::string& element, const std::string& name) {
  const auto key = name + "=\"";
  const auto at = element.find(key);
  if (at == std::string::npos) return {};
  const auto start = at + key.size();
  return element.substr(start, element.find('"', start) - start);
}

// std::regex recurses per character, so long point lists are split by hand.
std::vector<Polyline> polylines(const std::string& svg) {
  std::vector<Polyline> out;
  for (auto at = svg.find("<polyline "); at != std::string::npos; at = svg.find("<polyline ", at + 1)) {
    const auto element = svg.substr(at, svg.find("/>", at) - at);
    Polyline pl{attribute(element, "class"), {}};
    std::istringstream in(attribute(element, "points"));
    for (std::string pair; in >> pair;) {
      const auto comma = pair.find(',');
      pl.pts.push_back({std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1))});
    }
    out.push_back(std::move(pl));
  }
  return out;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(plap::io::format_number(3.0, 17) == "3");
  CHECK(plap::io::format_number(-15.0 / 7.0, 17) == "-2.1428571428571428");
  CHECK(std::stod(plap::io::format_number(0.1 + 0.2, 17)) == 0.1 + 0.2);
  CHECK(plap::io::format_number(-0.0, 12) == "0");
  CHECK(plap::io::format_number(1.0 / 3.0, 12) == "0.333333333333");
  CHECK(plap::io::format_number(std::nan(""), 12) == "nan");
}

TEST_CASE("JSON dump uses 17 significant digits and round-trips") {
  const json j = {{"a", 1.0 / 3.0}, {"b", {1, 2.5, nullptr}}, {"c", "x\"y"}, {"d", std::nan("")}};
  const auto text = plap::io::dump_json(j);
  CHECK(text.find("0.33333333333333331") != std::string::npos);
  const auto back = json::parse(text);
  CHECK(back["a"].get<double>() == 1.0 / 3.0);
  CHECK(back["c"] == "x\"y");
  CHECK(back["d"].is_null());
  CHECK(plap::io::dump_json(j, -1).find('\n') == plap::io::dump_json(j, -1).size() - 1);
}

TEST_CASE("sha256 matches known digests") {
  CHECK(plap::io::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(plap::io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("sibling paths") {
  CHECK(plap::io::events_path("out/run.csv") == fs::path("out/run.events.csv"));
  CHECK(plap::io::manifest_path("fig.svg") == fs::path("fig.manifest.json"));
}

TEST_CASE("empty portrait is a valid SVG with only stationary points") {
  plap::io::Portrait pt;
  pt.params = {2, 3.0, -6.0, 1};
  pt.y_min = -0.2;
  pt.y_max = 0.2;
  pt.Y_min = -0.15;
  pt.Y_max = 0.15;
  pt.stationary_points = plap::classify_stationary_points(pt.params);
  const auto svg = plap::io::portrait_svg(pt);
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("<polyline") == std::string::npos);
  CHECK(svg.find("script") == std::string::npos);
  const std::regex circle("<circle ");
  CHECK(std::distance(std::sregex_iterator(svg.begin(), svg.end(), circle), std::sregex_iterator()) == 3);
  // Every opened element is closed.
  const std::regex open_tag("<(svg|title|circle)[ >]"), close_tag("</(svg|title|circle)>");
  CHECK(std::distance(std::sregex_iterator(svg.begin(), svg.end(), open_tag), std::sregex_iterator()) ==
        std::distance(std::sregex_iterator(svg.begin(), svg.end(), close_tag), std::sregex_iterator()));
}

TEST_CASE("constants command") {
  const auto r = run("constants --N 1 --p 3 --alpha -4 --eps -1");
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(r.out.find("\"gamma\": 3") != std::string::npos);
  CHECK(j["alpha_star"].get<double>() == doctest::Approx(-15.0 / 7.0).epsilon(1e-15));
  CHECK(j["present"]["ell"] == false);
  CHECK(j["ell"].is_null());

  const auto bad_p = run("constants --N 1 --p 2 --alpha -4 --eps -1");
  CHECK(bad_p.code == 2);
  CHECK(bad_p.err.find("p must exceed 2") != std::string::npos);
  const auto bad_alpha = run("constants --N 1 --p 3 --alpha 0 --eps -1");
  CHECK(bad_alpha.code == 2);
  CHECK(bad_alpha.err.find("alpha != 0") != std::string::npos);
  CHECK(run("constants --N 1 --p 3 --eps -1").code == 2);
}

TEST_CASE("config file and PLAP_CONFIG supply defaults") {
  fs::create_directories(kWork);
  plap::io::write_file(kWork / "defaults.cfg", "N = 1\np = 3\nalpha = -4\neps = -1\n");
  const auto via_flag = run("constants --config defaults.cfg");
  REQUIRE(via_flag.code == 0);
  CHECK(json::parse(via_flag.out)["gamma"].get<double>() == 3.0);
  const auto via_env = run("constants --alpha -2", "PLAP_CONFIG=defaults.cfg");
  REQUIRE(via_env.code == 0);
  CHECK(json::parse(via_env.out)["params"]["alpha"].get<double>() == -2.0);
  CHECK(json::parse(via_env.out)["params"]["N"].get<int>() == 1);
}

TEST_CASE("shoot T_r reproduces the Barenblatt profile") {
  const auto r = run("shoot --kind T_r --N 2 --p 3 --alpha 2 --eps 1 --out bar.csv");
  REQUIRE(r.code == 0);
  const auto lines = lines_of(plap::io::read_file(kWork / "bar.csv"));
  REQUIRE(lines.size() > 10);
  CHECK(lines[0] == "tau,y,Y,r,w,dw");
  const double edge = std::cbrt(9.0);
  double worst = 0.0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto v = split_numbers(lines[i]);
    REQUIRE(v.size() == 6);
    const double rr = v[3];
    if (rr < 0.01 || rr > 0.9 * edge) continue;
    const double exact = std::pow(1.0 - std::pow(rr, 1.5) / 3.0, 2.0);
    worst = std::max(worst, std::abs(v[4] - exact) / exact);
  }
  CHECK(worst <= 1e-6);

  const auto events = lines_of(plap::io::read_file(kWork / "bar.events.csv"));
  CHECK(events[0] == "kind,tau,y,Y");
  CHECK(events.back().rfind("double_zero_capture,", 0) == 0);
}

TEST_CASE("manifest checksums match emitted files; output is deterministic") {
  REQUIRE(run("shoot --kind T_eps --N 2 --p 3 --alpha 1 --eps 1 --out te.csv").code == 0);
  const auto first_csv = plap::io::read_file(kWork / "te.csv");
  const auto manifest = json::parse(plap::io::read_file(kWork / "te.manifest.json"));
  CHECK(manifest["command"] == "shoot");
  CHECK(manifest["tool_version"] == std::string(plap::io::kToolVersion));
  CHECK(manifest["config_hash"].get<std::string>().size() == 64);
  REQUIRE(manifest["outputs"].size() == 2);
  for (const auto& o : manifest["outputs"]) {
    const auto content = plap::io::read_file(kWork / o["path"].get<std::string>());
    CHECK(plap::io::sha256_hex(content) == o["sha256"].get<std::string>());
    CHECK(content.size() == o["bytes"].get<std::size_t>());
  }
  const auto events = lines_of(plap::io::read_file(kWork / "te.events.csv"));
  CHECK(events.back().rfind("double_zero_capture,", 0) == 0);

  REQUIRE(run("shoot --kind T_eps --N 2 --p 3 --alpha 1 --eps 1 --out te.csv").code == 0);
  CHECK(plap::io::read_file(kWork / "te.csv") == first_csv);
  const auto again = json::parse(plap::io::read_file(kWork / "te.manifest.json"));
  CHECK(again["config_hash"] == manifest["config_hash"]);
  CHECK(again["outputs"] == manifest["outputs"]);

  const auto c1 = run("classify --N 1 --p 3 --alpha -2.1 --eps -1");
  const auto c2 = run("classify --N 1 --p 3 --alpha -2.1 --eps -1");
  REQUIRE(c1.code == 0);
  CHECK(c1.out == c2.out);
}

TEST_CASE("integrate writes one row per sample") {
  const auto r = run("integrate --N 1 --p 3 --alpha -4 --eps -1 --y0 0.1 --Y0 0 --tau-max 5 --out orbit.csv");
  REQUIRE(r.code == 0);
  const auto lines = lines_of(plap::io::read_file(kWork / "orbit.csv"));
  REQUIRE(lines.size() > 2);
  const auto first = split_numbers(lines[1]);
  CHECK(first[0] == 0.0);
  CHECK(first[1] == doctest::Approx(0.1));
  CHECK(split_numbers(lines.back())[0] == doctest::Approx(5.0));
  CHECK(fs::exists(kWork / "orbit.events.csv"));
  CHECK(fs::exists(kWork / "orbit.manifest.json"));
}

TEST_CASE("inadmissible shooting kind fails") {
  const auto r = run("shoot --kind T_u --N 4 --p 3 --alpha 1 --eps 1 --out tu.csv");
  CHECK(r.code == 2);
  CHECK(r.err.find("inadmissible") != std::string::npos);
  CHECK(run("shoot --kind T_q --N 4 --p 3 --alpha 1 --eps 1 --out tq.csv").code == 2);
}

TEST_CASE("alpha-c and classify commands") {
  const auto a = run("alpha-c --N 1 --p 3");
  REQUIRE(a.code == 0);
  CHECK(json::parse(a.out)["alpha_c"].get<double>() == -2.0);
  const auto b = run("alpha-c --N 1 --p 3 --bisection --tol 1e-4");
  REQUIRE(b.code == 0);
  CHECK(json::parse(b.out)["alpha_c"].get<double>() == doctest::Approx(-2.0).epsilon(1e-3));

  const auto orb = run("classify --N 1 --p 3 --alpha -2.1 --eps -1 --out orb.json");
  REQUIRE(orb.code == 0);
  const auto j = json::parse(plap::io::read_file(kWork / "orb.json"));
  CHECK(j["schema_version"] == plap::io::kReportSchemaVersion);
  CHECK(j["theorem_tag"] == "orb");
  REQUIRE(!j["checks"].empty());
  for (const auto& c : j["checks"]) {
    CHECK(c.contains("clause"));
    CHECK(c.contains("source_theorem"));
    CHECK(c["status"] == "pass");
  }
  CHECK(fs::exists(kWork / "orb.manifest.json"));

  const auto ent = run("classify --N 1 --p 3 --alpha -1.9 --eps -1");
  REQUIRE(ent.code == 0);
  CHECK(json::parse(ent.out)["theorem_tag"] == "ent");
}

TEST_CASE("every figure recipe loads and names its parameters") {
  const std::vector<std::array<double, 4>> expected = {
      {2, 3, -2, 1},      {2, 3, 1, 1},      {2, 3, 2, 1},     {2, 3, 50, 1},    {1, 3, -4, -1},   {2, 3, -6, 1},
      {1, 3, 0.7, -1},    {1, 3, 1, -1},     {1, 3, -0.7, -1}, {1, 3, -1.49, -1}, {1, 3, -1.5, -1}, {1, 3, -2.53, -1},
      {1, 3, -2.2, -1},   {1, 3, -2.1, -1},  {1, 3, -2, -1},   {1, 3, -1.98, -1}, {1, 3, -1.9, -1}};
  for (std::size_t i = 0; i < expected.size(); ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "fig%02zu.cfg", i + 1);
    CAPTURE(name);
    const auto r = run("constants --config '" + (fs::path(PLAP_RECIPE_DIR) / name).string() + "'");
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out)["params"];
    CHECK(j["N"].get<double>() == expected[i][0]);
    CHECK(j["p"].get<double>() == expected[i][1]);
    CHECK(j["alpha"].get<double>() == expected[i][2]);
    CHECK(j["eps"].get<double>() == expected[i][3]);
  }
}

TEST_CASE("figure 5 recipe: closed curves around the origin") {
  const auto r = run("portrait --config '" + (fs::path(PLAP_RECIPE_DIR) / "fig05.cfg").string() + "' --out fig05.svg");
  REQUIRE(r.code == 0);
  const auto svg = plap::io::read_file(kWork / "fig05.svg");
  CHECK(svg.find("script") == std::string::npos);
  // The origin is drawn at the centre of the frame; T_r winds around it.
  double winding = 0.0;
  for (const auto& pl : polylines(svg)) {
    if (pl.cls != "T_r") continue;
    for (std::size_t i = 1; i < pl.pts.size(); ++i) {
      const double a0 = std::atan2(pl.pts[i - 1][1] - 320.0, pl.pts[i - 1][0] - 320.0);
      const double a1 = std::atan2(pl.pts[i][1] - 320.0, pl.pts[i][0] - 320.0);
      winding += std::remainder(a1 - a0, 2 * std::numbers::pi);
    }
  }
  CHECK(std::abs(winding) / (2 * std::numbers::pi) >= 3.0);
}

TEST_CASE("figure 6 recipe: orbits converge to M_ell") {
  const auto r = run("portrait --config '" + (fs::path(PLAP_RECIPE_DIR) / "fig06.cfg").string() + "' --out fig06.svg");
  REQUIRE(r.code == 0);
  const auto svg = plap::io::read_file(kWork / "fig06.svg");
  // Box [-0.2, 0.2] x [-0.15, 0.15] on a 560 px plot area with a 40 px margin.
  const double mx = 40.0 + (1.0 / 15.0 + 0.2) / 0.4 * 560.0;
  const double my = 600.0 - (-1.0 / 25.0 + 0.15) / 0.3 * 560.0;
  CHECK(svg.find("cx=\"" + plap::io::format_number(mx, 9) + "\"") != std::string::npos);
  int ending_at_sink = 0, seeds = 0;
  for (const auto& pl : polylines(svg)) {
    if (pl.cls != "seed") continue;
    ++seeds;
    if (std::hypot(pl.pts.back()[0] - mx, pl.pts.back()[1] - my) < 1.0) ++ending_at_sink;
  }
  CHECK(seeds > 0);
  CHECK(ending_at_sink >= 10);
}

TEST_CASE("portrait with an empty seed file and no overlays") {
  fs::create_directories(kWork);
  plap::io::write_file(kWork / "empty.seeds", "# no seeds\n");
  const auto r = run("portrait --N 2 --p 3 --alpha -6 --eps 1 --seed-file empty.seeds --no-special --out empty.svg");
  REQUIRE(r.code == 0);
  const auto svg = plap::io::read_file(kWork / "empty.svg");
  CHECK(svg.find("<polyline") == std::string::npos);
  CHECK(svg.find("<circle") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  const auto again = run("portrait --N 2 --p 3 --alpha -6 --eps 1 --seed-file empty.seeds --no-special --out empty2.svg");
  REQUIRE(again.code == 0);
  CHECK(plap::io::read_file(kWork / "empty2.svg") == svg);
}
