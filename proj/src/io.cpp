#include "qfilter/io.hpp"

#include <openssl/sha.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "qfilter/errors.hpp"

namespace qfilter::io {

namespace {

std::string fmt(double x) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", x);
  return buf.data();
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(where + ": missing key '" + key + "'");
  }
  return j.at(key);
}

std::string config_comment(const ensemble::SimulationConfig& config) {
  return "# config=" + config_to_json(config).dump() + "\n";
}

}  // namespace

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is 1-based and points just past the offending character.
    const std::size_t end = std::min(e.byte > 0 ? e.byte - 1 : 0, text.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                      ": malformed JSON: " + e.what());
  }
}

json load_json_file(const std::filesystem::path& path) {
  return parse_json(read_text(path), path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
  if (!out) throw ConfigError("write failed for " + path.string());
}

json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  throw ConfigError("expected a number or [re, im] pair, got " + j.dump());
}

json matrix_to_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(to_json(m(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXcd matrix_from_json(const json& j) {
  if (j.is_object()) {
    const cplx scale = j.contains("scale") ? complex_from_json(j.at("scale")) : cplx{1.0, 0.0};
    static const std::array<const char*, 5> names{"annihilation", "creation", "number", "identity",
                                                  "zero"};
    for (const char* name : names) {
      if (!j.contains(name)) continue;
      const int dim = j.at(name).get<int>();
      const std::string n = name;
      Operator op;
      if (n == "annihilation") {
        op = hilbert::annihilation(dim);
      } else if (n == "creation") {
        op = hilbert::creation(dim);
      } else if (n == "number") {
        op = hilbert::number_operator(dim);
      } else if (n == "identity") {
        op = hilbert::identity(dim);
      } else {
        if (dim < 1) throw InvalidDimension("dimension must be >= 1");
        op = Operator::Zero(dim, dim);
      }
      return scale * op;
    }
    throw ConfigError("unknown operator description " + j.dump());
  }
  if (!j.is_array()) throw ConfigError("matrix must be an array of rows, got " + j.dump());
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Eigen::MatrixXcd(0, 0);
  if (!j[0].is_array()) throw ConfigError("matrix rows must be arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ShapeError("ragged matrix: row " + std::to_string(i) + " has a different length");
    }
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = complex_from_json(row[static_cast<std::size_t>(k)]);
  }
  return m;
}

json config_to_json(const ensemble::SimulationConfig& c) {
  json j;
  j["dim"] = c.dim;
  j["n0"] = c.n0;
  j["gamma"] = c.gamma;
  j["r2"] = c.r2;
  j["theta"] = c.theta;
  j["dt"] = c.dt;
  j["t_final"] = c.t_final;
  j["n_traj"] = c.n_traj;
  j["seed"] = c.seed;
  j["filter_kind"] = ensemble::to_string(c.filter_kind);
  j["mode"] = ensemble::to_string(c.mode);
  j["records_path"] = c.records_path;
  j["output_points"] = c.output_points;
  return j;
}

ensemble::SimulationConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{"dim",     "n0",     "gamma",       "r2",
                                           "theta",   "dt",     "t_final",     "n_traj",
                                           "seed",    "filter_kind", "mode",   "records_path",
                                           "output_points"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  ensemble::SimulationConfig c;
  try {
    c.dim = j.value("dim", c.dim);
    c.n0 = j.value("n0", c.n0);
    c.gamma = j.value("gamma", c.gamma);
    c.r2 = j.value("r2", c.r2);
    c.theta = j.value("theta", c.theta);
    c.dt = j.value("dt", c.dt);
    c.t_final = j.value("t_final", c.t_final);
    c.n_traj = j.value("n_traj", c.n_traj);
    if (j.contains("seed")) {
      const json& s = j.at("seed");
      if (!s.is_number_unsigned()) {
        throw ConfigError("seed must be a non-negative 64-bit integer");
      }
      c.seed = s.get<std::uint64_t>();
    }
    if (j.contains("filter_kind")) c.filter_kind = ensemble::parse_filter_kind(j.at("filter_kind").get<std::string>());
    if (j.contains("mode")) c.mode = ensemble::parse_run_mode(j.at("mode").get<std::string>());
    c.records_path = j.value("records_path", c.records_path);
    c.output_points = j.value("output_points", c.output_points);
  } catch (const json::type_error& e) {
    throw ConfigError(std::string("config field has the wrong type: ") + e.what());
  }
  ensemble::validate(c);
  if (c.mode == ensemble::RunMode::filter_from_records && c.records_path.empty()) {
    throw ConfigError("mode filter-from-records needs records_path");
  }
  return c;
}

void apply_overrides(json& j, const std::vector<std::string>& overrides) {
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("override '" + item + "' is not of the form key=value");
    }
    const std::string key = item.substr(0, eq);
    const std::string text = item.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    j[key] = value;
  }
}

json measurement_to_json(const commute::MeasurementSpec& spec) {
  return json{{"F", matrix_to_json(spec.F)}, {"G", matrix_to_json(spec.G)}};
}

commute::MeasurementSpec measurement_from_json(const json& j) {
  commute::MeasurementSpec spec{matrix_from_json(require(j, "F", "measurement")),
                                matrix_from_json(require(j, "G", "measurement"))};
  commute::validate(spec);
  return spec;
}

json report_to_json(const commute::CommutativityReport& r) {
  json j;
  j["commutative"] = r.commutative;
  j["condition_F"] = r.condition_F;
  j["condition_GFstar"] = r.condition_GFstar;
  j["condition_GF"] = r.condition_GF;
  j["violation_norms"] = r.violation_norms;
  j["summed_GFstar"] = r.summed_GFstar;
  j["summed_GF"] = r.summed_GF;
  j["symplectic_norms"] = r.symplectic_norms;
  j["tolerance"] = r.tolerance;
  return j;
}

json slh_to_json(const network::SLHModel& model) {
  json L = json::array();
  for (const auto& l : model.L) L.push_back(matrix_to_json(l));
  return json{{"S", matrix_to_json(model.S)}, {"L", L}, {"H", matrix_to_json(model.H)}};
}

network::SLHModel slh_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("SLH component must be an object, got " + j.dump());
  if (j.contains("beam_splitter")) {
    const json& b = j.at("beam_splitter");
    return network::beam_splitter(require(b, "r", "beam_splitter").get<double>(),
                                  b.value("theta", 0.0), b.value("dim", 1));
  }
  if (j.contains("passthrough")) {
    const json& p = j.at("passthrough");
    return network::passthrough(p.value("channels", 1), p.value("dim", 1));
  }
  network::SLHModel model;
  model.S = matrix_from_json(require(j, "S", "SLH"));
  const json& L = require(j, "L", "SLH");
  if (!L.is_array()) throw ConfigError("SLH: L must be a list of operators");
  for (const auto& l : L) model.L.push_back(matrix_from_json(l));
  model.H = matrix_from_json(require(j, "H", "SLH"));
  network::validate(model);
  return model;
}

namespace {

network::SLHModel evaluate(const json& expr, const json& components, int depth) {
  if (depth > 64) throw ConfigError("composition expression nested too deeply");
  if (expr.is_string()) {
    const auto name = expr.get<std::string>();
    if (!components.is_object() || !components.contains(name)) {
      throw ConfigError("unknown component '" + name + "'");
    }
    return slh_from_json(components.at(name));
  }
  for (const char* op : {"series", "concatenate"}) {
    if (!expr.is_object() || !expr.contains(op)) continue;
    const json& args = expr.at(op);
    if (!args.is_array() || args.empty()) {
      throw ConfigError(std::string(op) + " needs a non-empty list of operands");
    }
    network::SLHModel acc = evaluate(args[0], components, depth + 1);
    for (std::size_t i = 1; i < args.size(); ++i) {
      const auto next = evaluate(args[i], components, depth + 1);
      acc = std::string(op) == "series" ? network::series(acc, next) : network::concatenate(acc, next);
    }
    return acc;
  }
  return slh_from_json(expr);
}

}  // namespace

network::SLHModel compose_from_json(const json& j) {
  const json components = j.is_object() && j.contains("components") ? j.at("components") : json::object();
  return evaluate(require(j, "expression", "slh-compose"), components, 0);
}

std::string ensemble_csv(const ensemble::EnsembleSummary& s) {
  std::string out = config_comment(s.config);
  out += "t,mean_N,stderr_N,analytic_N\n";
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    out += fmt(s.times[i]) + "," + fmt(s.mean_number[i]) + "," + fmt(s.stderr_number[i]) + "," +
           fmt(s.analytic_number[i]) + "\n";
  }
  return out;
}

std::string comparison_csv(const ensemble::ComparisonReport& r) {
  std::string out = config_comment(r.config);
  out += "t,mean_corrected,mean_kuramochi,analytic,z_corrected,z_kuramochi\n";
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    out += fmt(r.times[i]) + "," + fmt(r.mean_corrected[i]) + "," + fmt(r.mean_kuramochi[i]) + "," +
           fmt(r.analytic[i]) + "," + fmt(r.z_corrected[i]) + "," + fmt(r.z_kuramochi[i]) + "\n";
  }
  return out;
}

std::string records_csv(const ensemble::SimulationConfig& config,
                        const std::vector<filter::StepRecord>& records) {
  std::string out = config_comment(config);
  out += "t,dY1,dN\n";
  for (std::size_t k = 0; k < records.size(); ++k) {
    out += fmt(static_cast<double>(k + 1) * config.dt) + "," + fmt(records[k].dY1) + "," +
           std::to_string(records[k].dN) + "\n";
  }
  return out;
}

std::vector<filter::Record> read_records_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::vector<filter::Record> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("t,", 0) == 0) continue;
    double t = 0.0;
    double dy = 0.0;
    int dn = 0;
    char trailing = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%d%c", &t, &dy, &dn, &trailing) != 3) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected 't,dY1,dN' row, got '" + line + "'");
    }
    records.push_back({dy, dn});
  }
  return records;
}

std::string git_blob_sha1(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
  std::array<unsigned char, SHA_DIGEST_LENGTH> digest{};
  SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), digest.data());
  std::string hex;
  static constexpr char kDigits[] = "0123456789abcdef";
  for (const unsigned char b : digest) {
    hex += kDigits[b >> 4];
    hex += kDigits[b & 0xf];
  }
  return hex;
}

json ensemble_metadata(const ensemble::EnsembleSummary& s, const std::string& csv) {
  json hist = json::object();
  for (const auto& [jumps, count] : s.jump_histogram) hist[std::to_string(jumps)] = count;
  json j;
  j["config"] = config_to_json(s.config);
  j["content_sha1"] = git_blob_sha1(csv);
  j["leakage_max"] = s.leakage_max;
  j["jumps"] = {{"total", s.total_jumps}, {"histogram", hist}, {"coarse_steps", s.coarse_steps}};
  if (s.config.filter_kind == ensemble::FilterKind::kuramochi) {
    j["kuramochi_jump_rate_rule"] = "counts sampled at the physical rate r2 * <L^dag L>";
  }
  return j;
}

json comparison_metadata(const ensemble::ComparisonReport& r, const std::string& csv) {
  json j;
  j["config"] = config_to_json(r.config);
  j["content_sha1"] = git_blob_sha1(csv);
  j["evaluation_times"] = r.evaluation_times;
  j["max_abs_z_corrected"] = r.max_abs_z_corrected;
  j["max_abs_z_kuramochi"] = r.max_abs_z_kuramochi;
  j["kuramochi_jump_rate_rule"] = r.kuramochi_jump_rate_rule;
  return j;
}

}  // namespace qfilter::io
