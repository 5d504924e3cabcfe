#include "cpd/serialize.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "cpd/errors.hpp"

namespace cpd {
namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

// JSON has no literals for infinities or NaN; infinities become the strings
// "inf"/"-inf" and NaN becomes null.
json enc(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? json("inf") : json("-inf");
  return json(x);
}

double dec(const json& j, const char* what) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (j.is_string()) {
    const std::string& s = j.get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    fail(Errc::config, std::string(what) + ": unrecognized numeric string '" + s + "'");
  }
  if (!j.is_number()) fail(Errc::config, std::string(what) + ": expected a number");
  return j.get<double>();
}

json parse_json(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(Errc::config, std::string(what) + ": malformed JSON");
  if (!j.is_object()) fail(Errc::config, std::string(what) + ": expected a JSON object");
  return j;
}

const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double get_num(const json& j, const char* key, double dflt) {
  const json* v = find(j, key);
  return v ? dec(*v, key) : dflt;
}

double require_num(const json& j, const char* key, const char* what) {
  const json* v = find(j, key);
  if (!v) fail(Errc::config, std::string(what) + ": missing field '" + key + "'");
  return dec(*v, key);
}

void check_schema(const json& j, const char* what) {
  const json* v = find(j, "schema_version");
  if (!v) return;
  if (!v->is_number_integer() || v->get<int>() != kSchemaVersion)
    fail(Errc::config, std::string(what) + ": unsupported schema_version");
}

json arr(const std::vector<double>& xs) {
  json a = json::array();
  for (double x : xs) a.push_back(enc(x));
  return a;
}

std::vector<double> dec_arr(const json& j, const char* what) {
  if (!j.is_array()) fail(Errc::config, std::string(what) + ": expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(dec(v, what));
  return out;
}

json imap_to_json(const std::map<std::int64_t, double>& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[std::to_string(k)] = enc(v);
  return j;
}

std::map<std::int64_t, double> imap_from_json(const json& j, const char* what) {
  if (!j.is_object()) fail(Errc::config, std::string(what) + ": expected an object");
  std::map<std::int64_t, double> m;
  for (const auto& [key, val] : j.items()) {
    char* end = nullptr;
    long long k = std::strtoll(key.c_str(), &end, 10);
    if (end == key.c_str() || *end != '\0')
      fail(Errc::config, std::string(what) + ": bad atom index '" + key + "'");
    m[static_cast<std::int64_t>(k)] = dec(val, what);
  }
  return m;
}

json stepfn_to_json(const StepFn& f) {
  json j;
  j["ts"] = arr(f.ts);
  j["values"] = arr(f.values);
  j["jump_locations"] = arr(f.jump_locations);
  return j;
}

StepFn stepfn_from_json(const json& j, const char* what) {
  if (!j.is_object()) fail(Errc::config, std::string(what) + ": expected an object");
  StepFn f;
  if (const json* v = find(j, "ts")) f.ts = dec_arr(*v, what);
  if (const json* v = find(j, "values")) f.values = dec_arr(*v, what);
  if (const json* v = find(j, "jump_locations")) f.jump_locations = dec_arr(*v, what);
  if (f.ts.size() != f.values.size())
    fail(Errc::config, std::string(what) + ": ts/values length mismatch");
  return f;
}

json config_to_json(const SpectralConfig& c) {
  json j;
  j["th_h"] = c.th_h;
  j["th_eps"] = c.th_eps;
  j["th_H"] = c.th_H;
  j["th_Ht"] = c.th_Ht;
  j["c_h"] = c.c_h;
  j["c_eps"] = c.c_eps;
  j["c_H"] = c.c_H;
  j["c_Ht"] = c.c_Ht;
  j["kernel_u0"] = c.kernel_u0;
  j["oversample"] = c.oversample;
  j["kappa"] = c.kappa;
  j["atom_spacing"] = c.atom_spacing;
  j["gamma_hint"] = c.gamma_hint;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["regime"] = std::string(1, c.regime);
  j["isotonic_F"] = c.isotonic_F;
  return j;
}

SpectralConfig config_from_json(const json& j) {
  if (!j.is_object()) fail(Errc::config, "config: expected an object");
  SpectralConfig c;
  c.th_h = get_num(j, "th_h", c.th_h);
  c.th_eps = get_num(j, "th_eps", c.th_eps);
  c.th_H = get_num(j, "th_H", c.th_H);
  c.th_Ht = get_num(j, "th_Ht", c.th_Ht);
  c.c_h = get_num(j, "c_h", c.c_h);
  c.c_eps = get_num(j, "c_eps", c.c_eps);
  c.c_H = get_num(j, "c_H", c.c_H);
  c.c_Ht = get_num(j, "c_Ht", c.c_Ht);
  c.kernel_u0 = get_num(j, "kernel_u0", c.kernel_u0);
  c.oversample = get_num(j, "oversample", c.oversample);
  c.kappa = get_num(j, "kappa", c.kappa);
  c.atom_spacing = get_num(j, "atom_spacing", c.atom_spacing);
  c.gamma_hint = get_num(j, "gamma_hint", c.gamma_hint);
  c.alpha = get_num(j, "alpha", c.alpha);
  c.beta = get_num(j, "beta", c.beta);
  if (const json* v = find(j, "regime")) {
    if (!v->is_string()) fail(Errc::config, "config: regime must be a string");
    const std::string& s = v->get_ref<const std::string&>();
    if (s.size() != 1 || (s[0] != 'a' && s[0] != 'b'))
      fail(Errc::config, "config: regime must be 'a' or 'b'");
    c.regime = s[0];
  }
  if (const json* v = find(j, "isotonic_F")) {
    if (!v->is_boolean()) fail(Errc::config, "config: isotonic_F must be a boolean");
    c.isotonic_F = v->get<bool>();
  }
  validate_config(c);
  return c;
}

json schedule_to_json(const Schedule& s) {
  json j;
  j["h"] = s.h;
  j["eps_n"] = s.eps_n;
  j["H"] = s.H;
  j["Ht"] = s.Ht;
  j["window"] = s.window;
  return j;
}

Schedule schedule_from_json(const json& j) {
  Schedule s;
  s.h = get_num(j, "h", 0.0);
  s.eps_n = get_num(j, "eps_n", 0.0);
  s.H = get_num(j, "H", 0.0);
  s.Ht = get_num(j, "Ht", 0.0);
  if (const json* v = find(j, "window")) s.window = v->get<std::int64_t>();
  return s;
}

json values_to_json(const CovarianceValues& v) {
  json j;
  j["sigma2_lambda"] = enc(v.sigma2_lambda);
  j["sigma2_qj"] = imap_to_json(v.sigma2_qj);
  j["sigma2_pj"] = imap_to_json(v.sigma2_pj);
  j["sigma2_q"] = enc(v.sigma2_q);
  j["sigma2_p"] = enc(v.sigma2_p);
  json n = json::array();
  for (Eigen::Index r = 0; r < v.SigmaN.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < v.SigmaN.cols(); ++c) row.push_back(enc(v.SigmaN(r, c)));
    n.push_back(row);
  }
  j["SigmaN"] = n;
  json f = json::array();
  for (Eigen::Index r = 0; r < v.SigmaF.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < v.SigmaF.cols(); ++c) row.push_back(enc(v.SigmaF(r, c)));
    f.push_back(row);
  }
  j["SigmaF"] = f;
  return j;
}

Eigen::MatrixXd matrix_from_json(const json& j, const char* what) {
  if (!j.is_array()) fail(Errc::config, std::string(what) + ": expected an array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  if (rows > 0) {
    if (!j[0].is_array()) fail(Errc::config, std::string(what) + ": expected nested arrays");
    cols = j[0].size();
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      fail(Errc::config, std::string(what) + ": ragged matrix");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = dec(j[r][c], what);
  }
  return m;
}

CovarianceValues values_from_json(const json& j, const char* what) {
  if (!j.is_object()) fail(Errc::config, std::string(what) + ": expected an object");
  CovarianceValues v;
  v.sigma2_lambda = get_num(j, "sigma2_lambda", 0.0);
  if (const json* p = find(j, "sigma2_qj")) v.sigma2_qj = imap_from_json(*p, what);
  if (const json* p = find(j, "sigma2_pj")) v.sigma2_pj = imap_from_json(*p, what);
  v.sigma2_q = get_num(j, "sigma2_q", 0.0);
  v.sigma2_p = get_num(j, "sigma2_p", 0.0);
  if (const json* p = find(j, "SigmaN")) v.SigmaN = matrix_from_json(*p, what);
  if (const json* p = find(j, "SigmaF")) v.SigmaF = matrix_from_json(*p, what);
  return v;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void strip_cr(std::string& line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
    line.pop_back();
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  line.erase(0, i);
}

} // namespace

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(Errc::io, "read failed: " + path);
  return ss.str();
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::io, "cannot open " + tmp);
    out << content;
    out.flush();
    if (!out) fail(Errc::io, "write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) fail(Errc::io, "rename failed: " + path);
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string model_to_text(const ModelSpec& spec) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["gamma"] = spec.triple.gamma;
  j["lambda"] = spec.triple.lambda_;
  j["delta"] = spec.delta;
  j["atom_spacing"] = spec.triple.atom_spacing;
  json atoms = json::array();
  for (const auto& [k, q] : spec.triple.discrete_weights)
    atoms.push_back(json{{"j", k}, {"q", q}});
  j["atoms"] = atoms;
  if (!spec.triple.ac_density.empty()) {
    json ac;
    ac["grid_origin"] = spec.triple.ac_density.origin;
    ac["step"] = spec.triple.ac_density.step;
    ac["values"] = arr(spec.triple.ac_density.values);
    j["ac"] = ac;
  }
  return dump(j);
}

ModelSpec model_from_text(const std::string& text) {
  json j = parse_json(text, "model");
  check_schema(j, "model");
  ModelSpec spec;
  spec.triple.gamma = get_num(j, "gamma", 0.0);
  spec.triple.lambda_ = require_num(j, "lambda", "model");
  spec.delta = require_num(j, "delta", "model");
  spec.triple.atom_spacing = get_num(j, "atom_spacing", 1.0);
  if (const json* atoms = find(j, "atoms")) {
    if (!atoms->is_array()) fail(Errc::config, "model: atoms must be an array");
    for (const auto& a : *atoms) {
      if (!a.is_object()) fail(Errc::config, "model: atoms entries must be objects");
      const json* jj = find(a, "j");
      if (!jj || !jj->is_number_integer())
        fail(Errc::config, "model: atom index j must be an integer");
      std::int64_t k = jj->get<std::int64_t>();
      double q = require_num(a, "q", "model atom");
      if (!spec.triple.discrete_weights.emplace(k, q).second)
        fail(Errc::config, "model: duplicate atom index " + std::to_string(k));
    }
  }
  if (const json* ac = find(j, "ac")) {
    if (!ac->is_object()) fail(Errc::config, "model: ac must be an object");
    spec.triple.ac_density.origin = require_num(*ac, "grid_origin", "model ac");
    spec.triple.ac_density.step = require_num(*ac, "step", "model ac");
    if (const json* v = find(*ac, "values"))
      spec.triple.ac_density.values = dec_arr(*v, "model ac values");
    if (!spec.triple.ac_density.values.empty() && !(spec.triple.ac_density.step > 0.0))
      fail(Errc::config, "model: ac step must be positive");
  }
  if (!(spec.delta > 0.0)) fail(Errc::config, "model: delta must be positive");
  validate_triple(spec.triple);
  return spec;
}

ModelSpec load_model(const std::string& path) { return model_from_text(read_text(path)); }

void save_model(const ModelSpec& spec, const std::string& path) {
  write_text_atomic(path, model_to_text(spec));
}

SpectralConfig config_from_text(const std::string& text) {
  return config_from_json(parse_json(text, "config"));
}

std::string config_to_text(const SpectralConfig& config) {
  return dump(config_to_json(config));
}

EstimateJob load_estimate_job(const std::string& path) {
  json j = parse_json(read_text(path), "estimate config");
  check_schema(j, "estimate config");
  EstimateJob job;
  if (const json* c = find(j, "config")) job.config = config_from_json(*c);
  job.delta = get_num(j, "delta", 1.0);
  if (!(job.delta > 0.0)) fail(Errc::config, "estimate config: delta must be positive");
  if (const json* v = find(j, "ts")) {
    job.ts = dec_arr(*v, "estimate config ts");
  } else {
    for (double t : default_level_grid(job.config.atom_spacing))
      if (std::isfinite(t)) job.ts.push_back(t);
  }
  return job;
}

void save_estimate_job(const EstimateJob& job, const std::string& path) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["delta"] = job.delta;
  j["ts"] = arr(job.ts);
  j["config"] = config_to_json(job.config);
  write_text_atomic(path, dump(j));
}

void save_estimates(const EstimateSet& est, const std::string& path) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["lambda_hat"] = enc(est.lambda_hat);
  j["gamma_hat"] = enc(est.gamma_hat);
  j["q_hat"] = imap_to_json(est.q_hat);
  j["p_hat"] = imap_to_json(est.p_hat);
  j["q_total_hat"] = enc(est.q_total_hat);
  j["p_total_hat"] = enc(est.p_total_hat);
  j["N_hat"] = stepfn_to_json(est.N_hat);
  j["F_hat"] = stepfn_to_json(est.F_hat);
  json d;
  d["remainder_sup"] = enc(est.diagnostics.remainder_sup);
  d["kappa"] = enc(est.diagnostics.kappa);
  d["kappa_margin"] = enc(est.diagnostics.kappa_margin);
  d["min_abs_phi"] = enc(est.diagnostics.min_abs_phi);
  d["schedule"] = schedule_to_json(est.diagnostics.schedule);
  d["grid_points"] = est.diagnostics.grid_points;
  d["du"] = enc(est.diagnostics.du);
  d["sample_size"] = est.diagnostics.sample_size;
  d["delta"] = enc(est.diagnostics.delta);
  j["diagnostics"] = d;
  write_text_atomic(path, dump(j));
}

EstimateSet load_estimates(const std::string& path) {
  json j = parse_json(read_text(path), "estimates");
  check_schema(j, "estimates");
  EstimateSet est;
  est.lambda_hat = get_num(j, "lambda_hat", 0.0);
  est.gamma_hat = get_num(j, "gamma_hat", 0.0);
  if (const json* v = find(j, "q_hat")) est.q_hat = imap_from_json(*v, "estimates q_hat");
  if (const json* v = find(j, "p_hat")) est.p_hat = imap_from_json(*v, "estimates p_hat");
  est.q_total_hat = get_num(j, "q_total_hat", 0.0);
  est.p_total_hat = get_num(j, "p_total_hat", 0.0);
  if (const json* v = find(j, "N_hat")) est.N_hat = stepfn_from_json(*v, "estimates N_hat");
  if (const json* v = find(j, "F_hat")) est.F_hat = stepfn_from_json(*v, "estimates F_hat");
  if (const json* d = find(j, "diagnostics")) {
    if (!d->is_object()) fail(Errc::config, "estimates: diagnostics must be an object");
    est.diagnostics.remainder_sup = get_num(*d, "remainder_sup", 0.0);
    est.diagnostics.kappa = get_num(*d, "kappa", 0.0);
    est.diagnostics.kappa_margin = get_num(*d, "kappa_margin", 0.0);
    est.diagnostics.min_abs_phi = get_num(*d, "min_abs_phi", 0.0);
    if (const json* s = find(*d, "schedule"))
      est.diagnostics.schedule = schedule_from_json(*s);
    if (const json* v = find(*d, "grid_points"))
      est.diagnostics.grid_points = v->get<std::size_t>();
    est.diagnostics.du = get_num(*d, "du", 0.0);
    if (const json* v = find(*d, "sample_size"))
      est.diagnostics.sample_size = v->get<std::size_t>();
    est.diagnostics.delta = get_num(*d, "delta", 0.0);
  }
  return est;
}

void save_covariance_report(const CovarianceReport& report, const std::string& path) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["delta"] = report.delta;
  j["tol"] = report.tol;
  j["ts"] = arr(report.ts);
  j["exact"] = values_to_json(report.exact);
  j["first_order"] = values_to_json(report.first_order);
  write_text_atomic(path, dump(j));
}

CovarianceReport load_covariance_report(const std::string& path) {
  json j = parse_json(read_text(path), "covariance report");
  check_schema(j, "covariance report");
  CovarianceReport report;
  report.delta = get_num(j, "delta", 0.0);
  report.tol = get_num(j, "tol", 0.0);
  if (const json* v = find(j, "ts")) report.ts = dec_arr(*v, "covariance report ts");
  if (const json* v = find(j, "exact"))
    report.exact = values_from_json(*v, "covariance report exact");
  if (const json* v = find(j, "first_order"))
    report.first_order = values_from_json(*v, "covariance report first_order");
  const auto k = static_cast<Eigen::Index>(report.ts.size());
  if (report.exact.SigmaF.rows() != k || report.exact.SigmaF.cols() != k)
    fail(Errc::config, "covariance report: SigmaF shape does not match ts");
  return report;
}

void save_matrix_csv(const Eigen::MatrixXd& m, const std::vector<double>& ts,
                     const std::string& path) {
  if (m.rows() != static_cast<Eigen::Index>(ts.size()) || m.rows() != m.cols())
    fail(Errc::config, "matrix CSV: shape does not match evaluation points");
  std::string out = "t";
  for (double t : ts) {
    out += ',';
    out += format_double(t);
  }
  out += '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out += format_double(ts[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out += ',';
      out += format_double(m(r, c));
    }
    out += '\n';
  }
  write_text_atomic(path, out);
}

void save_increments(const IncrementSample& sample, const std::string& path) {
  std::string out = "z\n";
  for (double z : sample.values) {
    out += format_double(z);
    out += '\n';
  }
  write_text_atomic(path, out);
}

IncrementSample load_increments(const std::string& path, double delta) {
  if (!(delta > 0.0)) fail(Errc::config, "observation spacing must be positive");
  const std::string text = read_text(path);
  IncrementSample sample;
  sample.delta = delta;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string line =
        text.substr(pos, (nl == std::string::npos ? text.size() : nl) - pos);
    pos = (nl == std::string::npos) ? text.size() : nl + 1;
    strip_cr(line);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "z") fail(Errc::config, "increments CSV must start with header 'z'");
      header_seen = true;
      continue;
    }
    char* end = nullptr;
    double v = std::strtod(line.c_str(), &end);
    if (end == line.c_str() || *end != '\0')
      fail(Errc::config, "bad number in increments CSV: '" + line + "'");
    if (!std::isfinite(v)) fail(Errc::config, "non-finite increment in CSV");
    sample.values.push_back(v);
  }
  if (sample.values.empty()) fail(Errc::config, "empty increments file");
  return sample;
}

} // namespace cpd
