#include "cpd/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include "cpd/errors.hpp"
#include "cpd/stats.hpp"

namespace cpd {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ParsedTarget {
  enum class Kind { lambda, gamma, q_total, p_total, qj, pj, level_N, level_F };
  Kind kind = Kind::lambda;
  std::int64_t j = 0;
  double t = 0.0;
  std::string name;
};

ParsedTarget parse_target(const std::string& s) {
  ParsedTarget pt;
  pt.name = s;
  if (s == "lambda") {
    pt.kind = ParsedTarget::Kind::lambda;
    return pt;
  }
  if (s == "gamma") {
    pt.kind = ParsedTarget::Kind::gamma;
    return pt;
  }
  if (s == "q") {
    pt.kind = ParsedTarget::Kind::q_total;
    return pt;
  }
  if (s == "p") {
    pt.kind = ParsedTarget::Kind::p_total;
    return pt;
  }
  auto rest_int = [&](std::size_t off) {
    const char* begin = s.c_str() + off;
    char* end = nullptr;
    long long j = std::strtoll(begin, &end, 10);
    if (end == begin || *end != '\0')
      fail(Errc::config, "bad target '" + s + "': expected an integer index");
    if (j == 0) fail(Errc::config, "bad target '" + s + "': atom index 0 is excluded");
    return static_cast<std::int64_t>(j);
  };
  auto rest_num = [&](std::size_t off) {
    const char* begin = s.c_str() + off;
    char* end = nullptr;
    double t = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
      fail(Errc::config, "bad target '" + s + "': expected a number");
    if (std::isnan(t)) fail(Errc::config, "bad target '" + s + "': NaN level");
    return t;
  };
  if (s.rfind("qj:", 0) == 0) {
    pt.kind = ParsedTarget::Kind::qj;
    pt.j = rest_int(3);
    return pt;
  }
  if (s.rfind("pj:", 0) == 0) {
    pt.kind = ParsedTarget::Kind::pj;
    pt.j = rest_int(3);
    return pt;
  }
  if (s.rfind("N:", 0) == 0) {
    pt.kind = ParsedTarget::Kind::level_N;
    pt.t = rest_num(2);
    return pt;
  }
  if (s.rfind("F:", 0) == 0) {
    pt.kind = ParsedTarget::Kind::level_F;
    pt.t = rest_num(2);
    return pt;
  }
  fail(Errc::config, "unknown target '" + s + "'");
}

double target_truth(const ParsedTarget& pt, const LevyTriple& triple) {
  switch (pt.kind) {
    case ParsedTarget::Kind::lambda:
      return triple.lambda_;
    case ParsedTarget::Kind::gamma:
      return triple.gamma;
    case ParsedTarget::Kind::q_total: {
      double s = 0.0;
      for (const auto& [j, q] : triple.discrete_weights) s += q;
      return s;
    }
    case ParsedTarget::Kind::p_total:
      return triple.p_total();
    case ParsedTarget::Kind::qj: {
      auto it = triple.discrete_weights.find(pt.j);
      return it == triple.discrete_weights.end() ? 0.0 : it->second;
    }
    case ParsedTarget::Kind::pj: {
      auto it = triple.discrete_weights.find(pt.j);
      return it == triple.discrete_weights.end() ? 0.0 : it->second / triple.lambda_;
    }
    case ParsedTarget::Kind::level_N:
      return true_N(triple, pt.t);
    case ParsedTarget::Kind::level_F:
      return true_F(triple, pt.t);
  }
  return 0.0;
}

double target_oracle_variance(const ParsedTarget& pt, const LevyTriple& triple,
                              const LimitLawPair& laws, double delta) {
  WeightSpec w;
  switch (pt.kind) {
    case ParsedTarget::Kind::lambda:
      w = weight_intensity();
      w.pitch = triple.atom_spacing;
      break;
    case ParsedTarget::Kind::gamma:
      return kNaN;
    case ParsedTarget::Kind::q_total:
      w = weight_atom_window(triple);
      break;
    case ParsedTarget::Kind::p_total:
      w = weight_atom_window_rel(triple);
      break;
    case ParsedTarget::Kind::qj:
      w = weight_atom(triple, pt.j);
      break;
    case ParsedTarget::Kind::pj:
      w = weight_atom_rel(triple, pt.j);
      break;
    case ParsedTarget::Kind::level_N:
      w = weight_level(pt.t);
      w.pitch = triple.atom_spacing;
      break;
    case ParsedTarget::Kind::level_F:
      w = weight_level_rel(triple, pt.t);
      break;
  }
  return covariance_functional(w, w, laws, delta);
}

double target_estimate(const ParsedTarget& pt, const EstimateSet& est,
                       const std::vector<double>& eval_ts) {
  switch (pt.kind) {
    case ParsedTarget::Kind::lambda:
      return est.lambda_hat;
    case ParsedTarget::Kind::gamma:
      return est.gamma_hat;
    case ParsedTarget::Kind::q_total:
      return est.q_total_hat;
    case ParsedTarget::Kind::p_total:
      return est.p_total_hat;
    case ParsedTarget::Kind::qj:
      return est.q_hat.at(pt.j);
    case ParsedTarget::Kind::pj:
      return est.p_hat.at(pt.j);
    case ParsedTarget::Kind::level_N:
    case ParsedTarget::Kind::level_F: {
      auto it = std::lower_bound(eval_ts.begin(), eval_ts.end(), pt.t);
      std::size_t idx = static_cast<std::size_t>(it - eval_ts.begin());
      const StepFn& f = pt.kind == ParsedTarget::Kind::level_N ? est.N_hat : est.F_hat;
      return f.values.at(idx);
    }
  }
  return 0.0;
}

struct Outcome {
  bool refused = false;
  bool failed = false;
  bool cpd_error = false;
  Errc code = Errc::config;
  std::string message;
  std::vector<double> values;
  double sup_N = kNaN;
  double sup_F = kNaN;
};

void check_schema(const json& j, const char* what) {
  auto it = j.find("schema_version");
  if (it == j.end()) return;
  if (!it->is_number_integer() || it->get<int>() != 1)
    fail(Errc::config, std::string(what) + ": unsupported schema_version");
}

json enc(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? json("inf") : json("-inf");
  return json(x);
}

double dec(const json& j, const char* what) {
  if (j.is_null()) return kNaN;
  if (j.is_string()) {
    const std::string& s = j.get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    fail(Errc::config, std::string(what) + ": unrecognized numeric string '" + s + "'");
  }
  if (!j.is_number()) fail(Errc::config, std::string(what) + ": expected a number");
  return j.get<double>();
}

} // namespace

MCReport run_montecarlo(const ExperimentPlan& plan, unsigned threads) {
  validate_triple(plan.model.triple);
  validate_config(plan.config);
  if (!(plan.model.delta > 0.0)) fail(Errc::config, "plan: delta must be positive");
  if (plan.replicates < 1) fail(Errc::config, "plan: replicates must be at least 1");
  if (plan.sample_sizes.empty()) fail(Errc::config, "plan: no sample sizes");
  if (plan.targets.empty()) fail(Errc::config, "plan: no targets");
  if (!(plan.tol > 0.0)) fail(Errc::config, "plan: tol must be positive");

  const LevyTriple& triple = plan.model.triple;
  const double delta = plan.model.delta;
  const std::size_t M = plan.replicates;

  std::vector<ParsedTarget> targets;
  targets.reserve(plan.targets.size());
  for (const auto& s : plan.targets) targets.push_back(parse_target(s));

  // evaluation grid: plan points plus every step-estimate target level
  std::vector<double> eval_ts = plan.ts;
  for (double t : eval_ts)
    if (std::isnan(t)) fail(Errc::config, "plan: NaN evaluation point");
  bool want_N = false;
  bool want_F = false;
  for (const auto& pt : targets) {
    if (pt.kind == ParsedTarget::Kind::level_N) {
      eval_ts.push_back(pt.t);
      want_N = true;
    }
    if (pt.kind == ParsedTarget::Kind::level_F) {
      eval_ts.push_back(pt.t);
      want_F = true;
    }
  }
  std::sort(eval_ts.begin(), eval_ts.end());
  eval_ts.erase(std::unique(eval_ts.begin(), eval_ts.end()), eval_ts.end());

  for (const auto& pt : targets) {
    if (pt.kind != ParsedTarget::Kind::qj && pt.kind != ParsedTarget::Kind::pj) continue;
    for (std::size_t n : plan.sample_sizes) {
      Schedule sched = schedule_at(plan.config, n);
      if (std::llabs(pt.j) > sched.window)
        fail(Errc::config, "target '" + pt.name + "' outside the atom window at n=" +
                               std::to_string(n));
    }
  }

  LimitLawPair laws = limit_laws(triple, delta, plan.tol);
  laws.drift_shift = 0.0; // the covariance series lives in the zero-drift frame

  std::vector<double> truths(targets.size());
  std::vector<double> ovars(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    truths[i] = target_truth(targets[i], triple);
    ovars[i] = target_oracle_variance(targets[i], triple, laws, delta);
  }
  std::vector<double> truth_N, truth_F;
  if (want_N)
    for (double t : eval_ts) truth_N.push_back(true_N(triple, t));
  if (want_F)
    for (double t : eval_ts) truth_F.push_back(true_F(triple, t));

  const double zstar = normal_quantile(0.975);

  MCReport report;
  report.delta = delta;
  report.replicates = M;
  report.master_seed = plan.master_seed;

  for (std::size_t n : plan.sample_sizes) {
    const double sqrtn = std::sqrt(static_cast<double>(n));
    const double h_n = schedule_at(plan.config, n).h;

    std::vector<Outcome> slots(M);
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
      for (std::size_t r = cursor.fetch_add(1); r < M; r = cursor.fetch_add(1)) {
        Outcome& o = slots[r];
        try {
          std::uint64_t seed_r = stream_rng(plan.master_seed, r).next();
          IncrementSample sample = simulate(triple, delta, n, seed_r);
          EstimateSet est = estimate_all(sample, plan.config, eval_ts);
          o.values.resize(targets.size());
          for (std::size_t i = 0; i < targets.size(); ++i)
            o.values[i] = target_estimate(targets[i], est, eval_ts);
          if (want_N) {
            double sup = 0.0;
            for (std::size_t i = 0; i < eval_ts.size(); ++i)
              sup = std::max(sup, std::abs(est.N_hat.values[i] - truth_N[i]));
            o.sup_N = sqrtn * sup;
          }
          if (want_F) {
            double sup = 0.0;
            for (std::size_t i = 0; i < eval_ts.size(); ++i)
              sup = std::max(sup, std::abs(est.F_hat.values[i] - truth_F[i]));
            o.sup_F = sqrtn * sup;
          }
        } catch (const Error& e) {
          if (e.is_refusal()) {
            o.refused = true;
          } else {
            o.failed = true;
            o.cpd_error = true;
            o.code = e.code();
          }
          o.message = e.what();
        } catch (const std::exception& e) {
          o.failed = true;
          o.message = e.what();
        }
      }
    };

    unsigned T = threads == 0 ? 1 : threads;
    T = static_cast<unsigned>(std::min<std::size_t>(T, M));
    if (T <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(T);
      for (unsigned t = 0; t < T; ++t) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }

    std::size_t refusals = 0;
    for (std::size_t r = 0; r < M; ++r) {
      const Outcome& o = slots[r];
      if (o.failed) {
        if (o.cpd_error) throw Error(o.code, o.message);
        throw std::runtime_error(o.message);
      }
      if (o.refused) ++refusals;
    }
    if (static_cast<double>(refusals) > 0.2 * static_cast<double>(M))
      fail(Errc::refusal_rate, "more than 20% of replicates refused at n=" +
                                   std::to_string(n) + " (" + std::to_string(refusals) +
                                   "/" + std::to_string(M) + ")");

    for (std::size_t i = 0; i < targets.size(); ++i) {
      TargetResult tr;
      tr.target = targets[i].name;
      tr.n = n;
      tr.true_value = truths[i];
      tr.oracle_variance = ovars[i];
      tr.refusals = refusals;

      const bool is_gamma = targets[i].kind == ParsedTarget::Kind::gamma;
      const double scale = is_gamma ? sqrtn / h_n : sqrtn;

      std::vector<double> scaled;
      scaled.reserve(M);
      for (std::size_t r = 0; r < M; ++r) {
        if (slots[r].refused) continue;
        double err = slots[r].values[i] - truths[i];
        report.errors.push_back({r, tr.target, n, err});
        scaled.push_back(scale * err);
      }
      tr.count = scaled.size();

      KahanSum mean_acc;
      for (double x : scaled) mean_acc.add(x);
      tr.mean_scaled = tr.count > 0 ? mean_acc.value() / static_cast<double>(tr.count) : kNaN;
      if (tr.count >= 2) {
        KahanSum var_acc;
        for (double x : scaled) {
          double d = x - tr.mean_scaled;
          var_acc.add(d * d);
        }
        tr.var_scaled = var_acc.value() / static_cast<double>(tr.count - 1);
      } else {
        tr.var_scaled = kNaN;
      }

      const bool var_usable = std::isfinite(tr.oracle_variance) && tr.oracle_variance > 1e-14;
      if (var_usable && tr.count >= 2) {
        double sd = std::sqrt(tr.oracle_variance);
        std::vector<double> zs;
        zs.reserve(scaled.size());
        for (double x : scaled) zs.push_back(x / sd);
        std::sort(zs.begin(), zs.end());
        tr.ks_stat = ks_distance_sorted(zs, &normal_cdf);
        tr.ks_pvalue = ks_pvalue(tr.ks_stat, tr.count);
        tr.ks_degenerate = false;
      } else {
        tr.ks_stat = kNaN;
        tr.ks_pvalue = kNaN;
        tr.ks_degenerate = true;
      }
      if (var_usable && tr.count > 0) {
        double radius = zstar * std::sqrt(tr.oracle_variance);
        std::size_t covered = 0;
        for (double x : scaled)
          if (std::abs(x) <= radius) ++covered;
        tr.coverage95 = static_cast<double>(covered) / static_cast<double>(tr.count);
      } else {
        tr.coverage95 = kNaN;
      }
      report.results.push_back(std::move(tr));
    }

    if (want_N) {
      SupSamples ss;
      ss.family = "N";
      ss.n = n;
      for (std::size_t r = 0; r < M; ++r)
        if (!slots[r].refused) ss.values.push_back(slots[r].sup_N);
      report.sup_stats.push_back(std::move(ss));
    }
    if (want_F) {
      SupSamples ss;
      ss.family = "F";
      ss.n = n;
      for (std::size_t r = 0; r < M; ++r)
        if (!slots[r].refused) ss.values.push_back(slots[r].sup_F);
      report.sup_stats.push_back(std::move(ss));
    }
  }
  return report;
}

ExperimentPlan load_plan(const std::string& path) {
  json j = json::parse(read_text(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) fail(Errc::config, "plan: malformed JSON");
  check_schema(j, "plan");
  ExperimentPlan plan;

  auto it = j.find("model");
  if (it == j.end()) fail(Errc::config, "plan: missing model");
  plan.model = model_from_text(it->dump());

  it = j.find("sample_sizes");
  if (it == j.end() || !it->is_array() || it->empty())
    fail(Errc::config, "plan: sample_sizes must be a non-empty array");
  for (const auto& v : *it) {
    if (!v.is_number_integer() && !v.is_number_unsigned())
      fail(Errc::config, "plan: sample sizes must be integers");
    std::int64_t n = v.get<std::int64_t>();
    if (n < 1) fail(Errc::config, "plan: sample sizes must be positive");
    plan.sample_sizes.push_back(static_cast<std::size_t>(n));
  }

  if ((it = j.find("replicates")) != j.end()) {
    if (!it->is_number_integer() && !it->is_number_unsigned())
      fail(Errc::config, "plan: replicates must be an integer");
    std::int64_t m = it->get<std::int64_t>();
    if (m < 1) fail(Errc::config, "plan: replicates must be at least 1");
    plan.replicates = static_cast<std::size_t>(m);
  }
  if ((it = j.find("master_seed")) != j.end()) {
    if (!it->is_number_integer() && !it->is_number_unsigned())
      fail(Errc::config, "plan: master_seed must be an integer");
    plan.master_seed = it->get<std::uint64_t>();
  }
  if ((it = j.find("targets")) != j.end()) {
    if (!it->is_array()) fail(Errc::config, "plan: targets must be an array");
    for (const auto& v : *it) {
      if (!v.is_string()) fail(Errc::config, "plan: targets must be strings");
      plan.targets.push_back(v.get<std::string>());
      parse_target(plan.targets.back()); // fail fast on junk
    }
  }
  if ((it = j.find("ts")) != j.end()) {
    if (!it->is_array()) fail(Errc::config, "plan: ts must be an array");
    for (const auto& v : *it) plan.ts.push_back(dec(v, "plan ts"));
  }
  if ((it = j.find("config")) != j.end()) plan.config = config_from_text(it->dump());
  if ((it = j.find("tol")) != j.end()) plan.tol = dec(*it, "plan tol");
  return plan;
}

void save_plan(const ExperimentPlan& plan, const std::string& path) {
  json j;
  j["schema_version"] = 1;
  j["model"] = json::parse(model_to_text(plan.model));
  j["sample_sizes"] = plan.sample_sizes;
  j["replicates"] = plan.replicates;
  j["master_seed"] = plan.master_seed;
  j["targets"] = plan.targets;
  json ts = json::array();
  for (double t : plan.ts) ts.push_back(enc(t));
  j["ts"] = ts;
  j["config"] = json::parse(config_to_text(plan.config));
  j["tol"] = plan.tol;
  write_text_atomic(path, j.dump(2) + "\n");
}

void save_mc_report(const MCReport& report, const std::string& path) {
  json j;
  j["schema_version"] = 1;
  j["delta"] = report.delta;
  j["replicates"] = report.replicates;
  j["master_seed"] = report.master_seed;
  json results = json::array();
  for (const auto& tr : report.results) {
    json r;
    r["target"] = tr.target;
    r["n"] = tr.n;
    r["true_value"] = enc(tr.true_value);
    r["oracle_variance"] = enc(tr.oracle_variance);
    r["mean_scaled"] = enc(tr.mean_scaled);
    r["var_scaled"] = enc(tr.var_scaled);
    r["ks_stat"] = enc(tr.ks_stat);
    r["ks_pvalue"] = enc(tr.ks_pvalue);
    r["ks_degenerate"] = tr.ks_degenerate;
    r["refusals"] = tr.refusals;
    r["count"] = tr.count;
    r["coverage95"] = enc(tr.coverage95);
    results.push_back(r);
  }
  j["results"] = results;
  json sup = json::array();
  for (const auto& ss : report.sup_stats) {
    json s;
    s["family"] = ss.family;
    s["n"] = ss.n;
    json vals = json::array();
    for (double v : ss.values) vals.push_back(enc(v));
    s["values"] = vals;
    sup.push_back(s);
  }
  j["sup_stats"] = sup;
  write_text_atomic(path, j.dump(2) + "\n");
}

void save_errors_csv(const MCReport& report, const std::string& path) {
  std::string out = "replicate,target,n,error\n";
  for (const auto& row : report.errors) {
    out += std::to_string(row.replicate);
    out += ',';
    out += row.target;
    out += ',';
    out += std::to_string(row.n);
    out += ',';
    out += format_double(row.error);
    out += '\n';
  }
  write_text_atomic(path, out);
}

BandReport build_bands(const EstimateSet& est, const CovarianceReport& report, double level) {
  if (!(level > 0.0 && level < 1.0)) fail(Errc::config, "band level must be in (0,1)");
  const std::size_t n = est.diagnostics.sample_size;
  if (n == 0) fail(Errc::config, "estimates carry no sample size");
  if (report.exact.SigmaF.rows() != static_cast<Eigen::Index>(report.ts.size()) ||
      report.exact.SigmaF.rows() != report.exact.SigmaF.cols())
    fail(Errc::config, "covariance report: SigmaF shape does not match ts");

  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < report.ts.size(); ++i)
    if (std::isfinite(report.ts[i])) keep.push_back(i);
  if (keep.empty()) fail(Errc::config, "covariance report has no finite evaluation points");

  BandReport bands;
  bands.level = level;
  bands.n = n;

  const double z = normal_quantile(0.5 + level / 2.0);
  const double sqrtn = std::sqrt(static_cast<double>(n));
  double max_pointwise = 0.0;
  for (std::size_t i : keep) {
    double t = report.ts[i];
    double tol = 1e-12 * std::max(1.0, std::abs(t));
    double value = kNaN;
    bool found = false;
    for (std::size_t k = 0; k < est.F_hat.ts.size(); ++k) {
      if (std::abs(est.F_hat.ts[k] - t) <= tol) {
        value = est.F_hat.values[k];
        found = true;
        break;
      }
    }
    if (!found)
      fail(Errc::config, "estimates do not cover evaluation point t=" + format_double(t));
    double var = std::max(0.0, report.exact.SigmaF(static_cast<Eigen::Index>(i),
                                                   static_cast<Eigen::Index>(i)));
    double radius = z * std::sqrt(var) / sqrtn;
    max_pointwise = std::max(max_pointwise, radius);
    bands.ts.push_back(t);
    bands.center.push_back(value);
    bands.pointwise_lo.push_back(value - radius);
    bands.pointwise_hi.push_back(value + radius);
  }

  const auto k = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd S(k, k);
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index c = 0; c < k; ++c)
      S(r, c) = report.exact.SigmaF(static_cast<Eigen::Index>(keep[r]),
                                    static_cast<Eigen::Index>(keep[c]));

  if (S.cwiseAbs().maxCoeff() == 0.0) {
    bands.sup_radius = 0.0; // degenerate limit: zero-width bands
  } else {
    Eigen::MatrixXd jittered = S + 1e-10 * Eigen::MatrixXd::Identity(k, k);
    Eigen::LLT<Eigen::MatrixXd> llt(jittered);
    if (llt.info() != Eigen::Success)
      fail(Errc::not_psd, "limiting covariance not factorizable with jitter");
    Eigen::MatrixXd L = llt.matrixL();

    constexpr std::size_t kDraws = 10000;
    Rng64 rng(0x62616e6473656564ull); // fixed seed keeps the band deterministic
    Eigen::VectorXd g(k);
    std::vector<double> sups;
    sups.reserve(kDraws);
    for (std::size_t d = 0; d < kDraws; ++d) {
      for (Eigen::Index i = 0; i < k; ++i) g(i) = rng.normal();
      sups.push_back((L * g).cwiseAbs().maxCoeff());
    }
    std::sort(sups.begin(), sups.end());
    auto idx = static_cast<std::size_t>(
        std::ceil(level * static_cast<double>(kDraws)));
    idx = std::min(std::max<std::size_t>(idx, 1), kDraws) - 1;
    bands.sup_radius = std::max(sups[idx] / sqrtn, max_pointwise);
  }
  for (std::size_t i = 0; i < bands.ts.size(); ++i) {
    bands.sup_lo.push_back(bands.center[i] - bands.sup_radius);
    bands.sup_hi.push_back(bands.center[i] + bands.sup_radius);
  }
  return bands;
}

void save_bands_csv(const BandReport& bands, const std::string& path) {
  std::string out = "t,center,pointwise_lo,pointwise_hi,sup_lo,sup_hi\n";
  for (std::size_t i = 0; i < bands.ts.size(); ++i) {
    out += format_double(bands.ts[i]);
    out += ',';
    out += format_double(bands.center[i]);
    out += ',';
    out += format_double(bands.pointwise_lo[i]);
    out += ',';
    out += format_double(bands.pointwise_hi[i]);
    out += ',';
    out += format_double(bands.sup_lo[i]);
    out += ',';
    out += format_double(bands.sup_hi[i]);
    out += '\n';
  }
  write_text_atomic(path, out);
}

std::vector<ComponentDecision> component_tests(const EstimateSet& est,
                                               const CovarianceReport& report, double level) {
  if (!(level > 0.0 && level < 1.0)) fail(Errc::config, "test level must be in (0,1)");
  const std::size_t n = est.diagnostics.sample_size;
  if (n == 0) fail(Errc::config, "estimates carry no sample size");
  const double sqrtn = std::sqrt(static_cast<double>(n));
  const double alpha = 1.0 - level;

  auto one_test = [&](const char* name, double deviation, double sigma2) {
    ComponentDecision d;
    d.hypothesis = name;
    if (sigma2 < 1e-14) {
      // degenerate null: only an exactly-zero statistic is interpretable
      if (deviation == 0.0) {
        d.statistic = 0.0;
        d.p_value = 1.0;
        d.reject = false;
        return d;
      }
      fail(Errc::division_by_near_zero,
           std::string("limiting variance for '") + name + "' is numerically zero");
    }
    d.statistic = sqrtn * deviation / std::sqrt(sigma2);
    d.p_value = std::erfc(std::abs(d.statistic) / std::sqrt(2.0));
    d.reject = d.p_value < alpha;
    return d;
  };

  std::vector<ComponentDecision> out;
  out.push_back(one_test("q=0", est.q_total_hat, report.exact.sigma2_q));
  out.push_back(one_test("p=1", est.p_total_hat - 1.0, report.exact.sigma2_p));
  return out;
}

} // namespace cpd
