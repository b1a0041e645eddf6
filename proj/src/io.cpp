#include "plap/io.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace plap::io {

using nlohmann::json;

std::string format_number(double v, int digits) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // also folds -0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

namespace {

void dump_into(std::ostringstream& os, const json& j, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    os << '\n' << std::string(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) { os << "{}"; return; }
      os << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',';
        first = false;
        newline(depth + 1);
        os << json(it.key()).dump() << (indent < 0 ? ":" : ": ");
        dump_into(os, it.value(), indent, depth + 1);
      }
      newline(depth);
      os << '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) { os << "[]"; return; }
      os << '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) os << ',';
        first = false;
        newline(depth + 1);
        dump_into(os, v, indent, depth + 1);
      }
      newline(depth);
      os << ']';
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      os << (std::isfinite(v) ? format_number(v, 17) : "null");
      return;
    }
    default:
      os << j.dump();
  }
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec_json(const Vec2& v) { return json::array({v[0], v[1]}); }

}  // namespace

std::string dump_json(const json& j, int indent) {
  std::ostringstream os;
  dump_into(os, j, indent, 0);
  os << '\n';
  return os.str();
}

std::string trajectory_csv(const Trajectory& tr) {
  std::string out = "tau,y,Y,r,w,dw\n";
  for (const auto& s : tr.samples) {
    const auto w = to_profile(s, tr.params);
    out += format_number(s.tau, 12) + ',' + format_number(s.y, 12) + ',' + format_number(s.Y, 12) + ',' +
           format_number(w.r, 12) + ',' + format_number(w.w, 12) + ',' + format_number(w.dw, 12) + '\n';
  }
  return out;
}

std::string events_csv(const Trajectory& tr) {
  std::string out = "kind,tau,y,Y\n";
  for (const auto& e : tr.events) {
    out += std::string(to_string(e.kind)) + ',' + format_number(e.tau, 12) + ',' + format_number(e.y, 12) +
           ',' + format_number(e.Y, 12) + '\n';
  }
  return out;
}

std::filesystem::path events_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".events.csv");
  return p;
}

std::filesystem::path manifest_path(const std::filesystem::path& out) {
  auto p = out;
  p.replace_extension(".manifest.json");
  return p;
}

json params_json(const ProblemParams& params) {
  return {{"N", params.N}, {"p", params.p}, {"alpha", params.alpha}, {"eps", params.eps}};
}

json constants_json(const ProblemParams& params, const DerivedConstants& c) {
  return {
      {"params", params_json(params)},
      {"gamma", c.gamma},
      {"eta", c.eta},
      {"p_prime", c.p_prime},
      {"beta", c.beta},
      {"alpha_star", c.alpha_star},
      {"alpha_p", c.alpha_p},
      {"alpha_1", c.alpha_1},
      {"alpha_2", optional_number(c.alpha_2)},
      {"ell", optional_number(c.ell)},
      {"nu_alpha", optional_number(c.nu_alpha)},
      {"discriminant", optional_number(c.discriminant)},
      {"C_U", c.C_U},
      {"present",
       {{"alpha_2", c.alpha_2.has_value()},
        {"ell", c.ell.has_value()},
        {"nu_alpha", c.nu_alpha.has_value()},
        {"discriminant", c.discriminant.has_value()}}},
  };
}

json stationary_json(const StationaryPointInfo& s) {
  json eig = json::array();
  for (const auto& l : s.eigenvalues) eig.push_back({{"re", number_or_null(l.real())}, {"im", number_or_null(l.imag())}});
  json j = {{"name", s.name},
            {"location", vec_json(s.location)},
            {"eigenvalues", eig},
            {"local_type", std::string(to_string(s.local_type))},
            {"residual", s.residual}};
  if (s.eigenvectors) j["eigenvectors"] = {vec_json((*s.eigenvectors)[0]), vec_json((*s.eigenvectors)[1])};
  return j;
}

json alpha_c_json(int N, double p, const AlphaCResult& r) {
  return {{"schema_version", kReportSchemaVersion},
          {"N", N},
          {"p", p},
          {"alpha_c", r.value},
          {"bracket", {r.lo, r.hi}},
          {"phi_lo", r.phi_lo},
          {"phi_hi", r.phi_hi},
          {"evaluations", r.evaluations},
          {"closed_form", r.closed_form}};
}

json report_json(const RegimeReport& report) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["params"] = params_json(report.params);
  j["constants"] = constants_json(report.params, report.constants);
  j["theorem_tag"] = report.theorem_tag;
  j["stationary_points"] = json::array();
  for (const auto& s : report.stationary_points) j["stationary_points"].push_back(stationary_json(s));
  j["trajectories"] = json::array();
  for (const auto& d : report.digests) {
    j["trajectories"].push_back({{"kind", std::string(to_string(d.kind))},
                                 {"label_start", std::string(to_string(d.label_start))},
                                 {"label_end", std::string(to_string(d.label_end))},
                                 {"zero_count", d.zero_count},
                                 {"termination", std::string(to_string(d.termination))},
                                 {"tau_min", d.tau_min},
                                 {"tau_max", d.tau_max}});
  }
  j["cycles"] = json::array();
  for (const auto& c : report.cycles) {
    j["cycles"].push_back({{"source", c.source},
                           {"around_origin", c.around_origin},
                           {"section_y", c.section_y},
                           {"fixed_point", c.fixed_point},
                           {"return_gap", c.return_gap},
                           {"period_tau", c.period_tau},
                           {"stability", std::string(to_string(c.stability))},
                           {"floquet_mean", c.floquet_mean}});
  }
  j["cycle_distance"] = optional_number(report.cycle_distance);
  j["phi_value"] = optional_number(report.phi_value);
  j["alpha_c_bracket"] = report.alpha_c_bracket ? json::array({(*report.alpha_c_bracket)[0], (*report.alpha_c_bracket)[1]})
                                                : json(nullptr);
  j["checks"] = json::array();
  for (const auto& c : report.checks) {
    j["checks"].push_back({{"clause", c.clause},
                           {"source_theorem", c.source_theorem},
                           {"status", std::string(to_string(c.status))},
                           {"detail", c.detail}});
  }
  j["notes"] = report.notes;
  return j;
}

namespace {

struct Frame {
  double width = 640.0, height = 640.0, margin = 40.0;
  double y_min, y_max, Y_min, Y_max;

  [[nodiscard]] double px(double y) const { return margin + (y - y_min) / (y_max - y_min) * (width - 2 * margin); }
  [[nodiscard]] double py(double Y) const { return height - margin - (Y - Y_min) / (Y_max - Y_min) * (height - 2 * margin); }
  [[nodiscard]] bool inside(const Vec2& v) const {
    return v[0] >= y_min && v[0] <= y_max && v[1] >= Y_min && v[1] <= Y_max;
  }
};

std::string f9(double v) { return format_number(v, 9); }

std::string colour_of(const std::string& cls) {
  if (cls == "seed") return "#7f7f7f";
  if (cls == "T_r") return "#d62728";
  if (cls == "T_eps") return "#1f77b4";
  if (cls == "T_alpha") return "#2ca02c";
  return "#9467bd";
}

}  // namespace

std::string portrait_svg(const Portrait& pt) {
  if (!(pt.y_max > pt.y_min) || !(pt.Y_max > pt.Y_min)) throw IoError("portrait box is empty");
  const Frame fr{640.0, 640.0, 40.0, pt.y_min, pt.y_max, pt.Y_min, pt.Y_max};
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f9(fr.width) << "\" height=\"" << f9(fr.height)
     << "\" viewBox=\"0 0 " << f9(fr.width) << ' ' << f9(fr.height) << "\">\n";
  os << "<title>" << describe(pt.params) << "</title>\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << f9(fr.width) << "\" height=\"" << f9(fr.height) << "\" fill=\"white\"/>\n";
  os << "<rect x=\"" << f9(fr.margin) << "\" y=\"" << f9(fr.margin) << "\" width=\"" << f9(fr.width - 2 * fr.margin)
     << "\" height=\"" << f9(fr.height - 2 * fr.margin) << "\" fill=\"none\" stroke=\"black\"/>\n";
  if (pt.y_min < 0 && pt.y_max > 0) {
    os << "<line class=\"axis\" x1=\"" << f9(fr.px(0)) << "\" y1=\"" << f9(fr.py(pt.Y_min)) << "\" x2=\"" << f9(fr.px(0))
       << "\" y2=\"" << f9(fr.py(pt.Y_max)) << "\" stroke=\"#cccccc\"/>\n";
  }
  if (pt.Y_min < 0 && pt.Y_max > 0) {
    os << "<line class=\"axis\" x1=\"" << f9(fr.px(pt.y_min)) << "\" y1=\"" << f9(fr.py(0)) << "\" x2=\"" << f9(fr.px(pt.y_max))
       << "\" y2=\"" << f9(fr.py(0)) << "\" stroke=\"#cccccc\"/>\n";
  }

  for (const auto& c : pt.curves) {
    std::vector<std::vector<Vec2>> pieces(1);
    for (const auto& v : c.points) {
      if (!std::isfinite(v[0]) || !std::isfinite(v[1]) || !fr.inside(v)) {
        if (!pieces.back().empty()) pieces.emplace_back();
        continue;
      }
      const Vec2 q{fr.px(v[0]), fr.py(v[1])};
      // Skip points closer than a quarter pixel to the previous one.
      if (!pieces.back().empty() && std::hypot(q[0] - pieces.back().back()[0], q[1] - pieces.back().back()[1]) < 0.25)
        continue;
      pieces.back().push_back(q);
    }
    for (const auto& piece : pieces) {
      if (piece.size() < 2) continue;
      os << "<polyline class=\"" << c.css_class << "\" fill=\"none\" stroke=\"" << colour_of(c.css_class)
         << "\" stroke-width=\"" << (c.css_class == "seed" ? "0.8" : "1.6") << "\" points=\"";
      for (std::size_t i = 0; i < piece.size(); ++i) os << (i ? " " : "") << f9(piece[i][0]) << ',' << f9(piece[i][1]);
      os << "\"/>\n";
    }
  }

  for (const auto& s : pt.stationary_points) {
    if (!fr.inside(s.location)) continue;
    os << "<circle class=\"stationary\" cx=\"" << f9(fr.px(s.location[0])) << "\" cy=\"" << f9(fr.py(s.location[1]))
       << "\" r=\"4\" fill=\"black\"><title>" << s.name << ' ' << to_string(s.local_type) << "</title></circle>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) throw IoError("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw IoError("write failed: " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

OutputEntry describe_output(const std::filesystem::path& path, std::string_view content) {
  return {path.string(), sha256_hex(content), content.size()};
}

json manifest_json(const RunManifest& m) {
  json outs = json::array();
  for (const auto& o : m.outputs) outs.push_back({{"path", o.path}, {"sha256", o.sha256}, {"bytes", o.bytes}});
  return {{"command", m.command},
          {"params", m.params},
          {"config_hash", m.config_hash},
          {"tool_version", m.tool_version},
          {"outputs", outs},
          {"wall_time_s", m.wall_time_s}};
}

}  // namespace plap::io
