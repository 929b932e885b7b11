#include "walign/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "walign/errors.hpp"

namespace walign {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_input("cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  int lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t c = 0; c < fields.size(); ++c) numeric = numeric && parse_number(fields[c], row[c]);
    if (!numeric) {
      if (first) {
        table.header = fields;
        first = false;
        continue;
      }
      throw_input("'" + path + "' line " + std::to_string(lineno) + ": non-numeric field");
    }
    first = false;
    if (!table.rows.empty() && row.size() != table.rows.front().size()) {
      throw_input("'" + path + "' line " + std::to_string(lineno) + ": expected " +
                  std::to_string(table.rows.front().size()) + " fields, found " + std::to_string(row.size()));
    }
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw_input("'" + path + "' contains no data rows");
  if (!table.header.empty() && table.header.size() != table.rows.front().size()) {
    throw_input("'" + path + "': header has " + std::to_string(table.header.size()) + " fields but rows have " +
                std::to_string(table.rows.front().size()));
  }
  return table;
}

DiscreteMeasure read_measure_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  const bool weighted = !t.header.empty() && lower(t.header.back()) == "weight";
  if (!weighted) return new_measure(t.rows);
  if (t.rows.front().size() < 2) throw_input("'" + path + "': weight column without coordinates");
  std::vector<double> w;
  w.reserve(t.rows.size());
  for (auto& r : t.rows) {
    w.push_back(r.back());
    r.pop_back();
  }
  try {
    return new_measure(t.rows, w);
  } catch (const InputError& e) {
    throw InputError("'" + path + "': " + e.what());
  }
}

CostSpec parse_cost_spec(const std::string& spec) {
  const std::string s = lower(trim(spec));
  if (s == "sq-euclidean") return CostSpec::squared_euclidean();
  const auto colon = s.find(':');
  double v = 0.0;
  if (colon != std::string::npos && parse_number(s.substr(colon + 1), v)) {
    const std::string kind = s.substr(0, colon);
    if (kind == "power") return CostSpec::power_distance(v);
    if (kind == "inner") return CostSpec::inner_product(v);
  }
  throw_input("unrecognized cost spec '" + spec + "' (expected sq-euclidean, power:<p> or inner:<scale>)");
}

TransformFamily parse_family_spec(const std::string& spec, int in_dim, int out_dim) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw_input("unrecognized family spec '" + spec + "'");
  const std::string kind = lower(trim(spec.substr(0, colon)));
  const std::string arg = trim(spec.substr(colon + 1));
  if (kind == "rotations2d") {
    double l = 0.0;
    if (!parse_number(arg, l) || l < 1 || l != std::floor(l) || l > 1e6) {
      throw_input("rotations2d needs a positive integer grid size, got '" + arg + "'");
    }
    if (in_dim != 2 || out_dim != 2) throw_input("rotations2d needs two-dimensional measures");
    return rotation_grid(static_cast<int>(l));
  }
  if (kind == "matrices" || kind == "igw") {
    const CsvTable t = read_csv(arg);
    const std::size_t cells = static_cast<std::size_t>(in_dim) * out_dim;
    const std::size_t width = t.rows.front().size();
    if (kind == "igw") {
      if (width != cells) {
        throw_input("'" + arg + "': IGW rows need " + std::to_string(cells) + " entries (" + std::to_string(in_dim) +
                    "x" + std::to_string(out_dim) + "), found " + std::to_string(width));
      }
      std::vector<Matrix> mats;
      for (const auto& r : t.rows) {
        Matrix a(in_dim, out_dim);
        for (int u = 0; u < in_dim; ++u)
          for (int v = 0; v < out_dim; ++v) a(u, v) = r[static_cast<std::size_t>(u) * out_dim + v];
        mats.push_back(std::move(a));
      }
      return igw_family(mats);
    }
    if (width != cells && width != cells + 1) {
      throw_input("'" + arg + "': matrix rows need " + std::to_string(cells) + " entries (" + std::to_string(out_dim) +
                  "x" + std::to_string(in_dim) + ") plus an optional penalty, found " + std::to_string(width));
    }
    std::vector<TransformEntry> entries;
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
      const auto& r = t.rows[k];
      Matrix m(out_dim, in_dim);
      for (int u = 0; u < out_dim; ++u)
        for (int v = 0; v < in_dim; ++v) m(u, v) = r[static_cast<std::size_t>(u) * in_dim + v];
      entries.push_back({"m" + std::to_string(k), std::move(m), Vector::Zero(out_dim), width > cells ? r.back() : 0.0,
                         std::nullopt});
    }
    return TransformFamily(std::move(entries));
  }
  throw_input("unrecognized family spec '" + spec + "' (expected rotations2d:<l>, matrices:<path> or igw:<path>)");
}

std::vector<double> read_penalties(const std::string& path) {
  const CsvTable t = read_csv(path);
  std::vector<double> out;
  if (t.rows.size() == 1) return t.rows.front();
  for (const auto& r : t.rows) {
    if (r.size() != 1) throw_input("'" + path + "': expected one penalty per line");
    out.push_back(r.front());
  }
  return out;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_input("cannot write '" + path + "'");
  out << content;
  if (!out) throw_input("failed writing '" + path + "'");
}

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void dump(const nlohmann::json& j, int indent, int depth, std::string& out) {
  const auto pad = [&](int d) {
    if (indent > 0) out += '\n' + std::string(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case nlohmann::json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        pad(depth + 1);
        out += nlohmann::json(it.key()).dump();
        out += indent > 0 ? ": " : ":";
        dump(it.value(), indent, depth + 1, out);
      }
      pad(depth);
      out += '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Numeric arrays stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const nlohmann::json& e) { return e.is_number(); });
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat && indent > 0 ? ", " : ",";
        first = false;
        if (!flat) pad(depth + 1);
        dump(e, indent, depth + 1, out);
      }
      if (!flat) pad(depth);
      out += ']';
      return;
    }
    default:
      out += j.dump();
  }
}

nlohmann::json angle_or_null(const TransformEntry& e) {
  return e.angle ? nlohmann::json(*e.angle) : nlohmann::json(nullptr);
}

}  // namespace

std::string dump_json(const nlohmann::json& value, int indent) {
  std::string out;
  dump(value, indent, 0, out);
  out += '\n';
  return out;
}

nlohmann::json report_json(const AlignmentReport& r, const TransformFamily& family) {
  nlohmann::json j;
  j["value"] = r.value;
  j["thetaStar"] = {{"index", r.theta_star}, {"label", r.theta_label}, {"angle", angle_or_null(family[r.theta_star])}};
  j["iCurve"] = r.i_curve;
  j["gapCurve"] = r.gap_curve;
  j["psi"] = r.dual.psi;
  j["planNnz"] = r.plan.nnz();
  j["timingsMs"] = {{"dual", r.dual_ms},
                    {"extract", r.theta_ms},
                    {"certificates", r.certificate_ms},
                    {"total", r.dual_ms + r.theta_ms + r.certificate_ms}};
  j["kStar"] = r.k_star;
  j["perTheta"] = r.per_theta;
  j["gCurve"] = r.g_curve;
  j["bruteForceValue"] = r.brute_force_value;
  j["maxGapIdentityDefect"] = r.max_identity_defect;
  j["thetaMass"] = r.dual.theta_mass;
  j["certifiedGap"] = r.dual.certified_gap;
  j["method"] = r.dual.method;
  j["slackWitness"] = {{"holds", r.extraction.slack_witness},
                       {"index", r.extraction.witness},
                       {"defect", r.extraction.witness_defect}};
  j["warnings"] = r.warnings;
  return j;
}

std::string plan_csv(const TransportPlan& plan) {
  std::string out;
  for (int i = 0; i < plan.rows; ++i) {
    for (int j = 0; j < plan.cols; ++j) {
      if (j) out += ',';
      out += format_double(plan(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string potentials_csv(const PotentialPair& pot) {
  std::string out = "side,index,value\n";
  for (std::size_t i = 0; i < pot.phi.size(); ++i) out += "phi," + std::to_string(i) + "," + format_double(pot.phi[i]) + "\n";
  for (std::size_t j = 0; j < pot.psi.size(); ++j) out += "psi," + std::to_string(j) + "," + format_double(pot.psi[j]) + "\n";
  return out;
}

std::string curve_csv(const AlignmentReport& r, const TransformFamily& family) {
  std::string out = "k,label,angle,I,objective,delta,g\n";
  for (int k = 0; k < family.size(); ++k) {
    out += std::to_string(k) + "," + family[k].label + "," + (family[k].angle ? format_double(*family[k].angle) : "") +
           "," + format_double(r.i_curve[k]) + "," + format_double(r.per_theta[k]) + "," + format_double(r.gap_curve[k]) +
           "," + format_double(r.g_curve[k]) + "\n";
  }
  return out;
}

std::string svg_scatter(const DiscreteMeasure& targets, const DiscreteMeasure& pushed) {
  if (targets.dim() != pushed.dim()) throw_input("scatter needs point sets of the same dimension");
  if (targets.dim() > 2) throw_input("scatter plots need one- or two-dimensional points");
  const bool flat = targets.dim() == 1;
  auto coord = [&](const DiscreteMeasure& m, int i, int a) { return flat && a == 1 ? 0.0 : m.points()(a, i); };
  double lo[2] = {kInf, kInf}, hi[2] = {-kInf, -kInf};
  for (const DiscreteMeasure* m : {&targets, &pushed})
    for (int i = 0; i < m->size(); ++i)
      for (int a = 0; a < 2; ++a) lo[a] = std::min(lo[a], coord(*m, i, a)), hi[a] = std::max(hi[a], coord(*m, i, a));
  constexpr double size = 800.0, margin = 0.05 * size;
  const double span = std::max({hi[0] - lo[0], hi[1] - lo[1], 1e-12});
  const double scale = (size - 2 * margin) / span;
  auto px = [&](double v, int a) {
    const double centered = (v - 0.5 * (lo[a] + hi[a])) * scale;
    return a == 0 ? size / 2 + centered : size / 2 - centered;
  };
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\"0 0 800 800\">\n";
  out += "<rect width=\"800\" height=\"800\" fill=\"white\"/>\n";
  char buf[160];
  out += "<g fill=\"none\" stroke=\"#1f4fbf\" stroke-width=\"1.2\">\n";
  for (int j = 0; j < targets.size(); ++j) {
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"4\"/>\n", px(coord(targets, j, 0), 0),
                  px(coord(targets, j, 1), 1));
    out += buf;
  }
  out += "</g>\n<g fill=\"#d0281e\" stroke=\"none\">\n";
  for (int i = 0; i < pushed.size(); ++i) {
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\"/>\n", px(coord(pushed, i, 0), 0),
                  px(coord(pushed, i, 1), 1));
    out += buf;
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace walign
