#include "goursat/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "goursat/analysis.hpp"
#include "goursat/noise.hpp"
#include "goursat/oracle.hpp"
#include "goursat/version.hpp"

namespace goursat::io {

namespace fs = std::filesystem;
using nlohmann::json;

// --- small string helpers -----------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (trim(s.substr(pos)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw std::runtime_error(what + ": not a number: '" + s + "'");
}

long long parse_ll(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (trim(s.substr(pos)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw std::runtime_error(what + ": not an integer: '" + s + "'");
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(s, &pos);
    if (trim(s.substr(pos)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw std::runtime_error(what + ": not an unsigned integer: '" + s + "'");
}

std::vector<double> parse_double_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  if (trim(s).empty()) return out;
  for (const auto& item : split(s, ',')) out.push_back(parse_double(trim(item), what));
  return out;
}

std::array<double, 2> parse_point(const std::string& s, const std::string& what) {
  const auto t = trim(s);
  if (t.size() < 5 || t.front() != '(' || t.back() != ')')
    throw std::runtime_error(what + ": expected (x,t), got '" + s + "'");
  const auto inner = t.substr(1, t.size() - 2);
  const auto parts = split(inner, ',');
  if (parts.size() != 2) throw std::runtime_error(what + ": expected (x,t), got '" + s + "'");
  return {parse_double(trim(parts[0]), what), parse_double(trim(parts[1]), what)};
}

std::vector<std::array<double, 2>> parse_point_list(const std::string& s,
                                                    const std::string& what) {
  std::vector<std::array<double, 2>> out;
  if (trim(s).empty()) return out;
  for (const auto& item : split(s, ';'))
    if (!trim(item).empty()) out.push_back(parse_point(item, what));
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ", ";
    out += format_double(v[k]);
  }
  return out;
}

std::string join_points(const std::vector<std::array<double, 2>>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += "; ";
    out += "(" + format_double(v[k][0]) + "," + format_double(v[k][1]) + ")";
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// --- config parsing ------------------------------------------------------------

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto where = "config line " + std::to_string(lineno);
    auto text = line;
    if (const auto hash = text.find('#'); hash != std::string::npos) text.resize(hash);
    text = trim(text);
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw std::runtime_error(where + ": unterminated section header");
      section = trim(text.substr(1, text.size() - 2));
      if (section != "grid" && section != "source" && section != "noise" && section != "bc" &&
          section != "run")
        throw std::runtime_error(where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw std::runtime_error(where + ": expected key = value");
    const auto key = trim(text.substr(0, eq));
    const auto value = trim(text.substr(eq + 1));
    const auto ctx = where + " (" + section + "." + key + ")";

    if (section == "grid") {
      if (key == "x_f")
        cfg.x_f = parse_double(value, ctx);
      else if (key == "t_f")
        cfg.t_f = parse_double(value, ctx);
      else if (key == "n_x")
        cfg.n_x = parse_ll(value, ctx);
      else if (key == "n_t")
        cfg.n_t = parse_ll(value, ctx);
      else
        throw std::runtime_error(ctx + ": unknown key");
    } else if (section == "source") {
      if (key == "name")
        cfg.source = value;
      else if (key == "alpha")
        cfg.alpha = parse_double(value, ctx);
      else if (key == "beta")
        cfg.beta = parse_double(value, ctx);
      else if (key == "k")
        cfg.k = parse_double(value, ctx);
      else if (key == "y1")
        cfg.y1 = parse_double(value, ctx);
      else
        throw std::runtime_error(ctx + ": unknown key");
    } else if (section == "noise") {
      if (key == "sigma")
        cfg.sigma = parse_double(value, ctx);
      else if (key == "seed")
        cfg.seed = parse_u64(value, ctx);
      else
        throw std::runtime_error(ctx + ": unknown key");
    } else if (section == "bc") {
      if (key == "kind")
        cfg.bc = value;
      else if (key == "value")
        cfg.bc_value = parse_double(value, ctx);
      else if (key == "c1")
        cfg.c1 = parse_double(value, ctx);
      else if (key == "c2")
        cfg.c2 = parse_double(value, ctx);
      else if (key == "alpha")
        cfg.bc_alpha = parse_double(value, ctx);
      else if (key == "f_file")
        cfg.bc_f_file = value;
      else if (key == "g_file")
        cfg.bc_g_file = value;
      else
        throw std::runtime_error(ctx + ": unknown key");
    } else if (section == "run") {
      if (key == "trials")
        cfg.trials = parse_ll(value, ctx);
      else if (key == "guard")
        cfg.guard = parse_double(value, ctx);
      else if (key == "record")
        cfg.record = value;
      else if (key == "slices_x")
        cfg.slices_x = parse_double_list(value, ctx);
      else if (key == "slices_t")
        cfg.slices_t = parse_double_list(value, ctx);
      else if (key == "points")
        cfg.points = parse_point_list(value, ctx);
      else if (key == "mask_level")
        cfg.mask_level = trim(value).empty() ? std::numeric_limits<double>::quiet_NaN()
                                             : parse_double(value, ctx);
      else if (key == "threads")
        cfg.threads = static_cast<int>(parse_ll(value, ctx));
      else if (key == "out")
        cfg.out = value;
      else
        throw std::runtime_error(ctx + ": unknown key");
    } else {
      throw std::runtime_error(where + ": key outside of any section");
    }
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse_config(in);
}

std::string emit_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "[grid]\n";
  out << "x_f = " << format_double(cfg.x_f) << "\n";
  out << "t_f = " << format_double(cfg.t_f) << "\n";
  out << "n_x = " << cfg.n_x << "\n";
  out << "n_t = " << cfg.n_t << "\n";
  out << "\n[source]\n";
  out << "name = " << cfg.source << "\n";
  out << "alpha = " << format_double(cfg.alpha) << "\n";
  out << "beta = " << format_double(cfg.beta) << "\n";
  out << "k = " << format_double(cfg.k) << "\n";
  out << "y1 = " << format_double(cfg.y1) << "\n";
  out << "\n[noise]\n";
  out << "sigma = " << format_double(cfg.sigma) << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "\n[bc]\n";
  out << "kind = " << cfg.bc << "\n";
  out << "value = " << format_double(cfg.bc_value) << "\n";
  out << "c1 = " << format_double(cfg.c1) << "\n";
  out << "c2 = " << format_double(cfg.c2) << "\n";
  out << "alpha = " << format_double(cfg.bc_alpha) << "\n";
  out << "f_file = " << cfg.bc_f_file << "\n";
  out << "g_file = " << cfg.bc_g_file << "\n";
  out << "\n[run]\n";
  out << "trials = " << cfg.trials << "\n";
  out << "guard = " << format_double(cfg.guard) << "\n";
  out << "record = " << cfg.record << "\n";
  out << "slices_x = " << join_doubles(cfg.slices_x) << "\n";
  out << "slices_t = " << join_doubles(cfg.slices_t) << "\n";
  out << "points = " << join_points(cfg.points) << "\n";
  out << "mask_level = " << (std::isnan(cfg.mask_level) ? "" : format_double(cfg.mask_level))
      << "\n";
  out << "threads = " << cfg.threads << "\n";
  out << "out = " << cfg.out << "\n";
  return out.str();
}

std::string emit_config_compact(const RunConfig& cfg) {
  std::string text = emit_config(cfg);
  std::string out;
  std::string section;
  for (const auto& raw : split(text, '\n')) {
    const auto line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const auto eq = line.find('=');
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (!out.empty()) out += ";";
    out += section + "." + key + "=" + value;
  }
  return out;
}

// --- CLI flag values -------------------------------------------------------------

void apply_grid_flag(RunConfig& cfg, const std::string& value) {
  const auto parts = split(value, 'x');
  if (parts.size() == 1) {
    cfg.n_x = cfg.n_t = parse_ll(trim(parts[0]), "--grid");
  } else if (parts.size() == 2) {
    cfg.n_x = parse_ll(trim(parts[0]), "--grid");
    cfg.n_t = parse_ll(trim(parts[1]), "--grid");
  } else {
    throw std::runtime_error("--grid: expected N or NXxNT");
  }
}

void apply_domain_flag(RunConfig& cfg, const std::string& value) {
  const auto parts = split(value, 'x');
  if (parts.size() == 1) {
    cfg.x_f = cfg.t_f = parse_double(trim(parts[0]), "--domain");
  } else if (parts.size() == 2) {
    cfg.x_f = parse_double(trim(parts[0]), "--domain");
    cfg.t_f = parse_double(trim(parts[1]), "--domain");
  } else {
    throw std::runtime_error("--domain: expected X or XFxTF");
  }
}

namespace {

// "name:key=value,key=value" -> (name, pairs)
std::pair<std::string, std::vector<std::pair<std::string, std::string>>> parse_tagged(
    const std::string& value, const std::string& what) {
  const auto colon = value.find(':');
  std::pair<std::string, std::vector<std::pair<std::string, std::string>>> out;
  out.first = trim(value.substr(0, colon));
  if (colon == std::string::npos) return out;
  for (const auto& item : split(value.substr(colon + 1), ',')) {
    if (trim(item).empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(what + ": expected key=value, got '" + item + "'");
    out.second.emplace_back(trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
  }
  return out;
}

}  // namespace

void apply_source_flag(RunConfig& cfg, const std::string& value) {
  auto [name, params] = parse_tagged(value, "--source");
  cfg.source = name;
  for (const auto& [key, v] : params) {
    if (key == "alpha")
      cfg.alpha = parse_double(v, "--source alpha");
    else if (key == "beta")
      cfg.beta = parse_double(v, "--source beta");
    else if (key == "k")
      cfg.k = parse_double(v, "--source k");
    else if (key == "y1")
      cfg.y1 = parse_double(v, "--source y1");
    else
      throw std::runtime_error("--source: unknown parameter '" + key + "'");
  }
}

void apply_bc_flag(RunConfig& cfg, const std::string& value) {
  const auto colon = value.find(':');
  const auto kind = trim(value.substr(0, colon));
  cfg.bc = kind;
  if (kind == "constant") {
    if (colon != std::string::npos)
      cfg.bc_value = parse_double(trim(value.substr(colon + 1)), "--bc constant");
    return;
  }
  auto [name, params] = parse_tagged(value, "--bc");
  for (const auto& [key, v] : params) {
    if (kind == "linear-exact") {
      if (key == "c1")
        cfg.c1 = parse_double(v, "--bc c1");
      else if (key == "c2")
        cfg.c2 = parse_double(v, "--bc c2");
      else if (key == "alpha")
        cfg.bc_alpha = parse_double(v, "--bc alpha");
      else
        throw std::runtime_error("--bc linear-exact: unknown parameter '" + key + "'");
    } else if (kind == "table") {
      if (key == "f")
        cfg.bc_f_file = v;
      else if (key == "g")
        cfg.bc_g_file = v;
      else
        throw std::runtime_error("--bc table: unknown parameter '" + key + "'");
    } else {
      throw std::runtime_error("--bc: unknown kind '" + kind + "'");
    }
  }
}

void apply_record_flag(RunConfig& cfg, const std::string& value) {
  const auto colon = value.find(':');
  const auto mode = trim(value.substr(0, colon));
  cfg.record = mode;
  if (mode == "full") return;
  if (mode == "slices") {
    cfg.slices_x.clear();
    cfg.slices_t.clear();
    if (colon == std::string::npos) throw std::runtime_error("--record slices: needs t=... or x=...");
    for (const auto& item : split(value.substr(colon + 1), ';')) {
      if (trim(item).empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("--record slices: expected t=... or x=...");
      const auto axis = trim(item.substr(0, eq));
      const auto list = parse_double_list(item.substr(eq + 1), "--record slices");
      if (axis == "t")
        cfg.slices_t.insert(cfg.slices_t.end(), list.begin(), list.end());
      else if (axis == "x")
        cfg.slices_x.insert(cfg.slices_x.end(), list.begin(), list.end());
      else
        throw std::runtime_error("--record slices: unknown axis '" + axis + "'");
    }
    return;
  }
  if (mode == "points") {
    // bare "points" keeps any list already configured (sheet adds the far
    // corner on its own)
    if (colon != std::string::npos)
      cfg.points = parse_point_list(value.substr(colon + 1), "--record points");
    return;
  }
  throw std::runtime_error("--record: unknown mode '" + mode + "'");
}

// --- typed views -------------------------------------------------------------------

GridSpec<double> make_grid(const RunConfig& cfg) {
  return build_grid(cfg.x_f, cfg.t_f, static_cast<Eigen::Index>(cfg.n_x),
                    static_cast<Eigen::Index>(cfg.n_t));
}

SourceSpec<double> make_source(const RunConfig& cfg) {
  if (cfg.source == "zero") return ZeroSource<double>{};
  if (cfg.source == "affine") return AffineSource<double>{cfg.alpha, cfg.beta};
  if (cfg.source == "quadratic") return QuadraticSource<double>{cfg.k};
  if (cfg.source == "cubic") return CubicSource<double>{cfg.k, cfg.y1};
  if (cfg.source == "sine-gordon") return SineGordonSource<double>{+1};
  if (cfg.source == "neg-sine-gordon") return SineGordonSource<double>{-1};
  if (cfg.source == "exponential") return ExponentialSource<double>{};
  throw std::runtime_error("unknown source '" + cfg.source + "'");
}

namespace {

Eigen::VectorXd read_number_file(const std::string& path, Eigen::Index expected) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open boundary file: " + path);
  std::vector<double> values;
  double v;
  while (in >> v) values.push_back(v);
  if (static_cast<Eigen::Index>(values.size()) != expected)
    throw std::runtime_error("boundary file " + path + ": expected " + std::to_string(expected) +
                             " values, found " + std::to_string(values.size()));
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

BoundaryData<double> make_boundary(const RunConfig& cfg, const GridSpec<double>& spec) {
  if (cfg.bc == "constant") return constant_boundary(spec, cfg.bc_value);
  if (cfg.bc == "linear-exact")
    return boundary_from_linear_exact(spec, LinearExactParams<double>{cfg.c1, cfg.c2, cfg.bc_alpha});
  if (cfg.bc == "table")
    return tabulated_boundary(spec, read_number_file(cfg.bc_f_file, spec.points_x()),
                              read_number_file(cfg.bc_g_file, spec.points_t()));
  throw std::runtime_error("unknown bc kind '" + cfg.bc + "'");
}

EnsembleSpec<double> make_ensemble_spec(const RunConfig& cfg) {
  EnsembleSpec<double> es;
  es.n_trials = cfg.trials;
  es.master_seed = cfg.seed;
  es.guard = cfg.guard;
  std::string record = cfg.record;
  if (record == "auto") {
    const long long points = (cfg.n_x + 1) * (cfg.n_t + 1);
    record = points <= 4'000'000 ? "full" : "slices";
  }
  if (record == "full" || record == "full-fields")
    es.record.mode = RecordMode::full_fields;
  else if (record == "slices")
    es.record.mode = RecordMode::slices;
  else if (record == "points")
    es.record.mode = RecordMode::points;
  else
    throw std::runtime_error("unknown record mode '" + cfg.record + "'");
  es.record.x_slices = cfg.slices_x;
  es.record.t_slices = cfg.slices_t;
  es.record.points = cfg.points;
  if (es.record.mode == RecordMode::slices && es.record.x_slices.empty() &&
      es.record.t_slices.empty())
    es.record.t_slices = {cfg.t_f};
  return es;
}

// --- CSV ---------------------------------------------------------------------------

void write_matrix_csv(const std::string& path, const std::vector<double>& xs,
                      const std::vector<double>& ts,
                      const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>& values,
                      const std::vector<std::string>& header_comments) {
  if (values.rows() != static_cast<Eigen::Index>(xs.size()) ||
      values.cols() != static_cast<Eigen::Index>(ts.size()))
    throw std::invalid_argument("write_matrix_csv: coordinate/value shape mismatch");
  std::string body;
  body.reserve(static_cast<std::size_t>(values.size()) * 20 + 256);
  for (const auto& c : header_comments) body += "# " + c + "\n";
  for (double t : ts) {
    body += ',';
    body += format_double(t);
  }
  body += '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    body += format_double(xs[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      body += ',';
      body += format_double(values(i, j));
    }
    body += '\n';
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << body;
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_field_csv(const std::string& path, const ScalarField<double>& field,
                     const std::vector<std::string>& header_comments) {
  std::vector<double> xs(static_cast<std::size_t>(field.spec.points_x()));
  std::vector<double> ts(static_cast<std::size_t>(field.spec.points_t()));
  for (Eigen::Index i = 0; i <= field.spec.n_x; ++i) xs[static_cast<std::size_t>(i)] = field.spec.x(i);
  for (Eigen::Index j = 0; j <= field.spec.n_t; ++j) ts[static_cast<std::size_t>(j)] = field.spec.t(j);
  write_matrix_csv(path, xs, ts, field.values, header_comments);
}

CsvMatrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  CsvMatrix out;
  std::string line;
  bool have_ts = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '#') {
      out.comments.push_back(trim(line.substr(1)));
      continue;
    }
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (!have_ts) {
      for (std::size_t k = 1; k < cells.size(); ++k)
        out.ts.push_back(parse_double(trim(cells[k]), path + ": t header"));
      have_ts = true;
      continue;
    }
    if (cells.size() != out.ts.size() + 1)
      throw std::runtime_error(path + ": ragged row with " + std::to_string(cells.size()) +
                               " cells");
    out.xs.push_back(parse_double(trim(cells[0]), path + ": x column"));
    std::vector<double> row;
    row.reserve(out.ts.size());
    for (std::size_t k = 1; k < cells.size(); ++k) {
      const auto cell = trim(cells[k]);
      row.push_back(cell == "nan" || cell == "-nan"
                        ? std::numeric_limits<double>::quiet_NaN()
                        : parse_double(cell, path + ": value"));
    }
    rows.push_back(std::move(row));
  }
  if (!have_ts || rows.empty()) throw std::runtime_error(path + ": no data rows");
  out.values.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(out.ts.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < out.ts.size(); ++j)
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return out;
}

ScalarField<double> read_field_csv(const std::string& path) {
  auto m = read_matrix_csv(path);
  if (m.xs.size() < 2 || m.ts.size() < 2 || m.xs.front() != 0.0 || m.ts.front() != 0.0)
    throw std::runtime_error(path + ": not a quarter-plane field");
  ScalarField<double> field;
  field.spec = build_grid(m.xs.back(), m.ts.back(), static_cast<Eigen::Index>(m.xs.size()) - 1,
                          static_cast<Eigen::Index>(m.ts.size()) - 1);
  field.values = std::move(m.values);
  return field;
}

// --- subcommands ---------------------------------------------------------------------

namespace {

std::vector<std::string> csv_header(const std::string& kind, const std::string& command,
                                    const RunConfig& cfg) {
  return {
      std::string("goursat ") + version_string + " " + kind,
      "command: " + command,
      "seed: " + std::to_string(cfg.seed),
      "grid: x_f=" + format_double(cfg.x_f) + " t_f=" + format_double(cfg.t_f) +
          " n_x=" + std::to_string(cfg.n_x) + " n_t=" + std::to_string(cfg.n_t),
      "config: " + emit_config_compact(cfg),
  };
}

json config_json(const RunConfig& cfg) {
  json j;
  j["grid"] = {{"x_f", cfg.x_f}, {"t_f", cfg.t_f}, {"n_x", cfg.n_x}, {"n_t", cfg.n_t}};
  j["source"] = {{"name", cfg.source}, {"alpha", cfg.alpha}, {"beta", cfg.beta}, {"k", cfg.k},
                 {"y1", cfg.y1}};
  j["noise"] = {{"sigma", cfg.sigma}, {"seed", cfg.seed}};
  j["bc"] = {{"kind", cfg.bc},       {"value", cfg.bc_value},   {"c1", cfg.c1},
             {"c2", cfg.c2},         {"alpha", cfg.bc_alpha},   {"f_file", cfg.bc_f_file},
             {"g_file", cfg.bc_g_file}};
  j["run"] = {{"trials", cfg.trials},     {"guard", cfg.guard},
              {"record", cfg.record},     {"slices_x", cfg.slices_x},
              {"slices_t", cfg.slices_t}, {"mask_level", cfg.mask_level},
              {"threads", cfg.threads},   {"out", cfg.out}};
  json pts = json::array();
  for (const auto& p : cfg.points) pts.push_back({p[0], p[1]});
  j["run"]["points"] = pts;
  return j;
}

json grid_json(const GridSpec<double>& spec) {
  return {{"x_f", spec.x_f}, {"t_f", spec.t_f}, {"n_x", spec.n_x},
          {"n_t", spec.n_t}, {"dx", spec.dx},   {"dt", spec.dt}};
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

double json_safe(double v) { return v; }  // nlohmann serializes NaN as null already

int run_ensemble_command(const RunConfig& cfg, std::ostream& log, const std::string& command) {
  const auto spec = make_grid(cfg);
  const auto src = make_source(cfg);
  const auto bc = make_boundary(cfg, spec);
  const auto es = make_ensemble_spec(cfg);

  const auto start = std::chrono::steady_clock::now();
  const auto stats = run_ensemble(spec, bc, src, cfg.sigma, es, cfg.threads);
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start)
          .count();

  fs::create_directories(cfg.out);
  json summary;
  summary["command"] = command;
  summary["version"] = version_string;
  summary["seed"] = cfg.seed;
  summary["config"] = config_json(cfg);
  summary["grid"] = grid_json(spec);
  summary["n_trials"] = stats.n_trials;
  summary["n_completed"] = stats.n_completed;
  summary["n_singular"] = stats.n_singular;
  summary["singular_trials"] = stats.singular_trials;
  summary["extrema_of_mean"] = {{"min", json_safe(stats.mean_min)},
                                {"max", json_safe(stats.mean_max)}};
  json files = json::object();

  if (stats.mean) {
    const auto mean_path = (fs::path(cfg.out) / "mean.csv").string();
    const auto sd_path = (fs::path(cfg.out) / "sd.csv").string();
    write_field_csv(mean_path, *stats.mean, csv_header("ensemble mean", command, cfg));
    write_field_csv(sd_path, *stats.sd, csv_header("ensemble sd", command, cfg));
    files["mean"] = "mean.csv";
    files["sd"] = "sd.csv";
    if (!std::isnan(cfg.mask_level)) {
      const auto mask = threshold_indicator(*stats.mean, cfg.mask_level);
      write_field_csv((fs::path(cfg.out) / "mask.csv").string(), mask,
                      csv_header("threshold mask of the mean", command, cfg));
      files["mask"] = "mask.csv";
      summary["mask_level"] = cfg.mask_level;
    }
  }

  json slices = json::array();
  for (std::size_t s = 0; s < stats.slices.size(); ++s) {
    const auto& sl = stats.slices[s];
    const std::string name =
        "slice_" + std::to_string(s) + "_" + std::string(1, sl.axis) + format_double(sl.coordinate) +
        ".csv";
    // columns: coordinate along the slice, mean, sd, count
    std::string body;
    for (const auto& c : csv_header("ensemble slice", command, cfg)) body += "# " + c + "\n";
    body += std::string("# slice: axis=") + sl.axis + " requested=" + format_double(sl.requested) +
            " snapped=" + format_double(sl.coordinate) +
            " snap_distance=" + format_double(sl.snap_distance) + "\n";
    body += sl.axis == 't' ? "x,mean,sd,count\n" : "t,mean,sd,count\n";
    for (Eigen::Index kk = 0; kk < sl.mean.size(); ++kk) {
      const double coord = sl.axis == 't' ? spec.x(kk) : spec.t(kk);
      body += format_double(coord) + "," + format_double(sl.mean[kk]) + "," +
              format_double(sl.sd[kk]) + "," + std::to_string(sl.counts[kk]) + "\n";
    }
    std::ofstream outf((fs::path(cfg.out) / name).string(), std::ios::binary);
    if (!outf) throw std::runtime_error("cannot open for writing: " + name);
    outf << body;
    slices.push_back({{"axis", std::string(1, sl.axis)},
                      {"requested", sl.requested},
                      {"coordinate", sl.coordinate},
                      {"index", sl.index},
                      {"snap_distance", sl.snap_distance},
                      {"file", name}});
  }
  summary["slices"] = slices;

  json points = json::array();
  for (const auto& p : stats.points) {
    points.push_back({{"x_requested", p.x_requested},
                      {"t_requested", p.t_requested},
                      {"x", p.x},
                      {"t", p.t},
                      {"i", p.index.i},
                      {"j", p.index.j},
                      {"snap_distance", p.snap_distance},
                      {"count", p.count},
                      {"mean", json_safe(p.mean)},
                      {"sd", p.sd},
                      {"ci95_halfwidth", p.ci95_halfwidth}});
  }
  summary["points"] = points;
  summary["files"] = files;

  write_json((fs::path(cfg.out) / "summary.json").string(), summary);
  log << command << ": " << stats.n_completed << "/" << stats.n_trials << " trials completed, "
      << stats.n_singular << " singular, " << ms << " ms; wrote " << cfg.out << "\n";
  return 0;
}

}  // namespace

int cmd_solve(const RunConfig& cfg, std::ostream& log) {
  const auto spec = make_grid(cfg);
  const auto src = make_source(cfg);
  const auto bc = make_boundary(cfg, spec);
  const NoiseConfig<double> noise{cfg.sigma, cfg.seed, 0};

  const auto start = std::chrono::steady_clock::now();
  const auto result = solve(spec, bc, src, noise, cfg.guard);
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start)
          .count();

  fs::create_directories(cfg.out);
  write_field_csv((fs::path(cfg.out) / "field.csv").string(), result.field,
                  csv_header("field", "solve", cfg));

  const auto [lo, hi] = finite_extrema(result.field.values);
  json summary;
  summary["command"] = "solve";
  summary["version"] = version_string;
  summary["seed"] = cfg.seed;
  summary["config"] = config_json(cfg);
  summary["grid"] = grid_json(spec);
  summary["status"] = result.status == SolveStatus::completed ? "completed" : "singular";
  summary["guard"] = cfg.guard;
  if (result.singular_site) {
    summary["singular_site"] = {{"i", result.singular_site->i},
                                {"j", result.singular_site->j},
                                {"x", spec.x(result.singular_site->i)},
                                {"t", spec.t(result.singular_site->j)}};
  } else {
    summary["singular_site"] = nullptr;
  }
  summary["extrema"] = {{"min", json_safe(lo)}, {"max", json_safe(hi)}};
  summary["far_corner"] = json_safe(result.field(spec.n_x, spec.n_t));
  summary["files"] = {{"field", "field.csv"}};
  write_json((fs::path(cfg.out) / "summary.json").string(), summary);

  log << "solve: " << (result.status == SolveStatus::completed ? "completed" : "singular") << ", "
      << ms << " ms; wrote " << cfg.out << "\n";
  return 0;
}

int cmd_ensemble(const RunConfig& cfg, std::ostream& log) {
  return run_ensemble_command(cfg, log, "ensemble");
}

int cmd_sheet(RunConfig cfg, std::ostream& log) {
  cfg.source = "zero";
  cfg.bc = "constant";
  cfg.bc_value = 0;
  // Always report the far corner.
  bool has_corner = false;
  for (const auto& p : cfg.points)
    if (p[0] == cfg.x_f && p[1] == cfg.t_f) has_corner = true;
  if (!has_corner) cfg.points.push_back({cfg.x_f, cfg.t_f});
  return run_ensemble_command(cfg, log, "sheet");
}

int cmd_exact(const ExactConfig& cfg, std::ostream& log) {
  if (cfg.n_x < 1 || cfg.n_t < 1) throw std::runtime_error("exact: need at least one cell per axis");
  if (!(cfg.x_max > cfg.x_min) || !(cfg.t_max > cfg.t_min))
    throw std::runtime_error("exact: empty rectangle");
  const double dx = (cfg.x_max - cfg.x_min) / static_cast<double>(cfg.n_x);
  const double dt = (cfg.t_max - cfg.t_min) / static_cast<double>(cfg.n_t);
  std::vector<double> xs(static_cast<std::size_t>(cfg.n_x + 1));
  std::vector<double> ts(static_cast<std::size_t>(cfg.n_t + 1));
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = cfg.x_min + static_cast<double>(i) * dx;
  for (std::size_t j = 0; j < ts.size(); ++j) ts[j] = cfg.t_min + static_cast<double>(j) * dt;

  Eigen::MatrixXd values(cfg.n_x + 1, cfg.n_t + 1);
  std::string detail;
  if (cfg.family == "linear-exact") {
    const LinearExactParams<double> p{cfg.c1, cfg.c2, cfg.alpha};
    for (Eigen::Index j = 0; j <= cfg.n_t; ++j)
      for (Eigen::Index i = 0; i <= cfg.n_x; ++i)
        values(i, j) = linear_exact(p, xs[static_cast<std::size_t>(i)],
                                    ts[static_cast<std::size_t>(j)]);
    detail = "c1=" + format_double(cfg.c1) + " c2=" + format_double(cfg.c2) +
             " alpha=" + format_double(cfg.alpha);
  } else if (cfg.family == "kink") {
    const KinkParams<double> p{cfg.u, cfg.x0, cfg.sign};
    for (Eigen::Index j = 0; j <= cfg.n_t; ++j)
      for (Eigen::Index i = 0; i <= cfg.n_x; ++i)
        values(i, j) = kink(p, xs[static_cast<std::size_t>(i)], ts[static_cast<std::size_t>(j)]);
    detail = "u=" + format_double(cfg.u) + " x0=" + format_double(cfg.x0) +
             " sign=" + std::to_string(cfg.sign);
  } else if (cfg.family == "breather") {
    const BreatherParams<double> p{cfg.omega};
    for (Eigen::Index j = 0; j <= cfg.n_t; ++j)
      for (Eigen::Index i = 0; i <= cfg.n_x; ++i)
        values(i, j) =
            breather(p, xs[static_cast<std::size_t>(i)], ts[static_cast<std::size_t>(j)]);
    detail = "omega=" + format_double(cfg.omega);
  } else {
    throw std::runtime_error("exact: unknown family '" + cfg.family + "'");
  }

  fs::create_directories(cfg.out);
  const std::vector<std::string> comments = {
      std::string("goursat ") + version_string + " exact table",
      "family: " + cfg.family + " " + detail,
      "rectangle: x=[" + format_double(cfg.x_min) + "," + format_double(cfg.x_max) + "] t=[" +
          format_double(cfg.t_min) + "," + format_double(cfg.t_max) + "]",
  };
  write_matrix_csv((fs::path(cfg.out) / "exact.csv").string(), xs, ts, values, comments);

  json summary;
  summary["command"] = "exact";
  summary["version"] = version_string;
  summary["family"] = cfg.family;
  summary["detail"] = detail;
  summary["files"] = {{"table", "exact.csv"}};
  write_json((fs::path(cfg.out) / "summary.json").string(), summary);
  log << "exact: wrote " << cfg.out << "/exact.csv\n";
  return 0;
}

int cmd_peaks(const PeaksConfig& cfg, std::ostream& log) {
  const auto m = read_matrix_csv(cfg.input);
  const auto& coords = cfg.axis == 't' ? m.ts : m.xs;
  std::size_t best = 0;
  for (std::size_t k = 1; k < coords.size(); ++k)
    if (std::abs(coords[k] - cfg.coordinate) < std::abs(coords[best] - cfg.coordinate)) best = k;

  Eigen::VectorXd slice;
  if (cfg.axis == 't')
    slice = m.values.col(static_cast<Eigen::Index>(best));
  else
    slice = m.values.row(static_cast<Eigen::Index>(best)).transpose();

  const std::span<const double> view(slice.data(), static_cast<std::size_t>(slice.size()));
  const double lo = *std::min_element(view.begin(), view.end());
  const double hi = *std::max_element(view.begin(), view.end());
  const double prominence = cfg.prominence_fraction * (hi - lo);
  const int count = count_peaks(view, prominence);

  json out;
  out["command"] = "peaks";
  out["axis"] = std::string(1, cfg.axis);
  out["requested"] = cfg.coordinate;
  out["coordinate"] = coords[best];
  out["index"] = best;
  out["slice_min"] = lo;
  out["slice_max"] = hi;
  out["prominence"] = prominence;
  out["prominence_fraction"] = cfg.prominence_fraction;
  out["count"] = count;
  log << out.dump(2) << "\n";
  return 0;
}

int cmd_validate(std::ostream& log, const ValidateOptions& opts) {
  int failures = 0;
  const auto report = [&](bool ok, const std::string& name, const std::string& detail) {
    if (!ok) ++failures;
    log << (ok ? "ok   - " : "FAIL - ") << name << ": " << detail << "\n";
  };

  // 1. Telescoping identity: zero drift, no noise, arbitrary boundary data.
  {
    const auto spec = build_grid(1.3, 0.9, Eigen::Index(37), Eigen::Index(29));
    const auto bc = sample_boundary(
        spec, [](double x) { return std::sin(3.0 * x) + 2.0; },
        [](double t) { return 2.0 + t * (0.3 - t); });
    const SourceSpec<double> zero = ZeroSource<double>{};
    const auto run = solve(spec, bc, zero, 0.0, nullptr);
    double worst = 0;
    for (Eigen::Index j = 0; j <= spec.n_t; ++j)
      for (Eigen::Index i = 0; i <= spec.n_x; ++i)
        worst = std::max(worst, std::abs(run.field(i, j) - (bc.f[i] + bc.g[j] - bc.corner())));
    report(worst <= 1e-12, "telescoping identity", "max deviation " + format_double(worst));
  }

  // 2. Fixed-point equivalence against the marching scheme.
  {
    const auto check_pair = [&](const std::string& name, const SourceSpec<double>& src,
                                double sigma, double bc_value, Eigen::Index n) {
      const auto spec = build_grid(5.0, 5.0, n, n);
      const auto bc = constant_boundary(spec, bc_value);
      const NoiseConfig<double> noise{sigma, 20240601, 0};
      const auto inc = sigma > 0 ? std::optional(sample_increments(spec, noise)) : std::nullopt;
      auto marched = solve(spec, bc, src, sigma, inc ? &*inc : nullptr);
      if (opts.perturb_marching) marched.field(spec.n_x / 2, spec.n_t / 2) += 1e-6;
      const auto fixed_point = picard_solve(spec, bc, src, sigma, inc ? &*inc : nullptr);
      const double sup = (marched.field.values - fixed_point.values).cwiseAbs().maxCoeff();
      report(sup <= 1e-8, name, "sup-norm difference " + format_double(sup));
    };
    check_pair("fixed-point equivalence (sine-gordon, deterministic)",
               SineGordonSource<double>{+1}, 0.0, 1.0, 50);
    check_pair("fixed-point equivalence (quadratic, shared noise)", QuadraticSource<double>{1.0},
               0.06, 0.1, 40);
  }

  // 3. Sheet covariance against min(x,y) * min(s,t).
  {
    const auto spec = build_grid(1.0, 1.0, Eigen::Index(50), Eigen::Index(50));
    const int trials = 2000;
    std::vector<double> at_p(trials), at_q(trials), at_corner(trials);
    const auto [ip, xp, dp] = snap_x(spec, 0.5);
    const auto [jp, tp, dtp] = snap_t(spec, 0.5);
    const auto [iq, xq, dq] = snap_x(spec, 1.0);
    const auto [jq, tq, dtq] = snap_t(spec, 0.75);
    for (int k = 0; k < trials; ++k) {
      const NoiseConfig<double> cfg{1.0, 77001, static_cast<std::uint64_t>(k)};
      const auto sheet = brownian_sheet(spec, cfg);
      at_p[static_cast<std::size_t>(k)] = sheet(ip, jp);
      at_q[static_cast<std::size_t>(k)] = sheet(iq, jq);
      at_corner[static_cast<std::size_t>(k)] = sheet(spec.n_x, spec.n_t);
    }
    const double cov = sheet_covariance<double>(at_p, at_q);
    const double var = sheet_covariance<double>(at_corner, at_corner);
    const bool ok_cov = std::abs(cov - 0.25) <= 0.025;
    const bool ok_var = std::abs(var - 1.0) <= 0.1;
    report(ok_cov && ok_var, "sheet covariance",
           "cov(0.5,0.5;1,0.75) = " + format_double(cov) + " (expect 0.25), var(1,1) = " +
               format_double(var) + " (expect 1)");
  }

  // 4. Deterministic convergence toward e^4 under grid refinement.
  {
    const LinearExactParams<double> p{1.0, 0.0, 1.0};
    const SourceSpec<double> src = AffineSource<double>{1.0, 0.0};
    const double expected[] = {53.290, 53.936, 54.331, 54.464};
    const Eigen::Index ns[] = {100, 200, 500, 1000};
    bool ok = true;
    std::string detail;
    double prev = 0;
    for (int k = 0; k < 4; ++k) {
      const auto spec = build_grid(2.0, 2.0, ns[k], ns[k]);
      const auto bc = boundary_from_linear_exact(spec, p);
      const auto run = solve(spec, bc, src, 0.0, nullptr);
      const double v = run.field(spec.n_x, spec.n_t);
      ok = ok && std::abs(v - expected[k]) <= 0.005 && v > prev;
      prev = v;
      detail += (k ? ", " : "") + std::to_string(ns[k]) + ": " + format_double(v);
    }
    report(ok, "deterministic convergence toward e^4", detail + " (exact 54.598)");
  }

  log << (failures == 0 ? "validate: all checks passed\n"
                        : "validate: " + std::to_string(failures) + " check(s) failed\n");
  return failures;
}

}  // namespace goursat::io
