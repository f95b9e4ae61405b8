#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "gram_spectra/bounds.hpp"
#include "gram_spectra/covest.hpp"
#include "gram_spectra/errors.hpp"
#include "gram_spectra/gramsolve.hpp"
#include "gram_spectra/ridge.hpp"

#ifndef GRAM_SPECTRA_VERSION
#define GRAM_SPECTRA_VERSION "0.0.0"
#endif

namespace gram_spectra::cli {

namespace {

using nlohmann::json;

const std::vector<std::string> kEvals = {"min-sv-negative", "min-sv-normalized", "max-sv",
                                         "dongarra-tail",   "expected-log-kappa", "gd-upper",
                                         "gd-worstcase-lower", "smallball",      "ridge-upper"};

const std::map<std::string, std::vector<ParamSpec>>& schema_table() {
  using K = ParamKind;
  static const std::map<std::string, std::vector<ParamSpec>> table = {
      {"moments",
       {{"n", K::integer, nullptr, "rows"},
        {"p", K::integer, nullptr, "columns"},
        {"statistic", K::text, "kappa", "kappa|sqrt_n_over_smin|smax_over_sqrt_n|log_kappa|inv_cov_error|cov_error"},
        {"r", K::real, 1.0, "moment order"},
        {"trials", K::integer, 1000, "Monte Carlo trials"},
        {"cov", K::text, "identity", "identity|scaled:c|diag:a,b,..|ar1:rho"},
        {"law", K::text, "gaussian", "gaussian|counterexample"}}},
      {"sweep",
       {{"n", K::integer, nullptr, "rows"},
        {"gamma_grid", K::real_list, nullptr, "comma-separated p/n ratios"},
        {"statistic", K::text, "kappa", "statistic name"},
        {"r", K::real, 1.0, "moment order"},
        {"trials", K::integer, 200, "trials per grid point"},
        {"cov", K::text, "identity", "covariance model"},
        {"law", K::text, "gaussian", "gaussian|counterexample"}}},
      {"bounds",
       {{"eval", K::text, nullptr,
         "min-sv-negative|min-sv-normalized|max-sv|dongarra-tail|expected-log-kappa|gd-upper|gd-worstcase-lower|"
         "smallball|ridge-upper"},
        {"n", K::integer, nullptr, "rows"},
        {"p", K::integer, nullptr, "columns"},
        {"r", K::real, 2.0, "moment order"},
        {"K", K::real, bounds::kDefaultK, "negative-moment constant K > 21e"},
        {"t", K::real, nullptr, "tail threshold"},
        {"C", K::real, bounds::kDefaultTailC, "tail or small-ball constant"},
        {"c", K::real, nullptr, "small-ball exponent constant"},
        {"kappa", K::real, nullptr, "condition number"},
        {"epsilon", K::real, nullptr, "accuracy"},
        {"L", K::real, nullptr, "largest eigenvalue"},
        {"mu", K::real, nullptr, "smallest nonzero eigenvalue"},
        {"lambda_tilde", K::real, nullptr, "scaled ridge penalty"},
        {"b_frob_sq", K::real, nullptr, "squared Frobenius norm of B"},
        {"trace_sigma_eps", K::real, nullptr, "trace of the noise covariance"}}},
      {"ridge",
       {{"n", K::integer, nullptr, "rows"},
        {"p", K::integer, nullptr, "columns"},
        {"q", K::integer, 1, "responses"},
        {"lambda", K::real, 1.0, "unscaled penalty"},
        {"cov", K::text, "identity", "design covariance model"},
        {"b_spec", K::text, "fixed:1", "fixed:<b0>|random:<alpha>"},
        {"design_trials", K::integer, 100, "outer design draws"},
        {"noise", K::text, "identity", "noise covariance model (q×q)"}}},
      {"covest",
       {{"grid", K::pair_list, nullptr, "comma-separated n x p pairs, e.g. 100x10,400x40"},
        {"r", K::real, 2.0, "moment order"},
        {"trials", K::integer, 2000, "trials per grid point"},
        {"law", K::text, "gaussian", "gaussian|counterexample"}}},
      {"gd",
       {{"n", K::integer, nullptr, "rows"},
        {"gamma_grid", K::real_list, nullptr, "comma-separated p/n ratios"},
        {"epsilon", K::real, 1e-6, "relative gap tolerance"},
        {"trials", K::integer, 100, "instances per grid point"},
        {"solver", K::text, "gd", "gd|cg"},
        {"init", K::text, "random", "random|worstcase"},
        {"max_iter", K::integer, 1000000, "censoring cap"},
        {"b_mode", K::text, "random_in_range", "random_in_range|from_regression"}}},
      {"counterexample",
       {{"n", K::integer, 3, "rows"},
        {"p", K::integer, 3, "columns"},
        {"statistic", K::text, "sqrt_n_over_smin", "sqrt_n_over_smin|kappa|inv_cov_error"},
        {"trials", K::integer, 1000000, "trials"},
        {"law", K::text, "counterexample", "counterexample, or gaussian as a control"}}},
      {"inv-chisq",
       {{"n", K::integer, 30, "rows"}, {"p", K::integer, 10, "columns"}, {"trials", K::integer, 2000, "trials"}}},
  };
  return table;
}

std::string default_format(const std::string& subcommand) { return subcommand == "bounds" ? "json" : "csv"; }

std::string flag_name(const std::string& key) {
  std::string out = key;
  for (char& c : out) {
    if (c == '_') c = '-';
  }
  return out;
}

std::string kind_name(ParamKind kind) {
  switch (kind) {
    case ParamKind::integer: return "a non-negative integer";
    case ParamKind::real: return "a number";
    case ParamKind::text: return "a string";
    case ParamKind::real_list: return "a list of numbers";
    case ParamKind::pair_list: return "a list of [n, p] pairs";
  }
  return "";
}

bool matches_kind(ParamKind kind, const json& v) {
  switch (kind) {
    case ParamKind::integer: return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    case ParamKind::real: return v.is_number();
    case ParamKind::text: return v.is_string();
    case ParamKind::real_list:
      if (!v.is_array()) return false;
      for (const auto& x : v) {
        if (!x.is_number()) return false;
      }
      return true;
    case ParamKind::pair_list:
      if (!v.is_array()) return false;
      for (const auto& x : v) {
        if (!x.is_array() || x.size() != 2 || !matches_kind(ParamKind::integer, x[0]) ||
            !matches_kind(ParamKind::integer, x[1])) {
          return false;
        }
      }
      return true;
  }
  return false;
}

const ParamSpec* find_param(const std::vector<ParamSpec>& specs, const std::string& key) {
  for (const auto& s : specs) {
    if (s.key == key) return &s;
  }
  return nullptr;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw ValidationError(what + ": expected a non-negative integer, got '" + text + "'");
  }
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw ValidationError(what + ": integer out of range: '" + text + "'");
  }
}

double parse_real(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (text.empty() || used != text.size()) throw ValidationError(what + ": expected a number, got '" + text + "'");
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

// Shortest text that round-trips the double.
std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::size_t size_param(const json& params, const char* key) { return params.at(key).get<std::size_t>(); }
double real_param(const json& params, const char* key) { return params.at(key).get<double>(); }
std::string text_param(const json& params, const char* key) { return params.at(key).get<std::string>(); }

// Tabular output shared by the CSV and JSON writers.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;  // one json scalar per column
  std::vector<json> extras;            // extra JSON-only fields per row (object or null)
};

std::string cell(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) return num(v.get<double>());
  return "nan";
}

// Scalars that may be non-finite are carried as strings tagged for JSON conversion.
json real_cell(double v) { return std::isfinite(v) ? json(v) : json(num(v)); }

json json_value(const json& v) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "-inf" || s == "nan") return nullptr;
  }
  return v;
}

std::string header_line(const ExperimentConfig& config) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "# gram_spectra %s config_hash=%016llx seed=%llu", version().c_str(),
                static_cast<unsigned long long>(config_hash(config)), static_cast<unsigned long long>(config.seed));
  return buf;
}

json meta(const ExperimentConfig& config) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(config)));
  return {{"tool", "gram_spectra"},
          {"version", version()},
          {"subcommand", config.subcommand},
          {"config_hash", hash},
          {"seed", config.seed}};
}

std::string render_table(const ExperimentConfig& config, const Table& table) {
  std::ostringstream os;
  if (config.format == "csv") {
    os << header_line(config) << '\n';
    for (std::size_t c = 0; c < table.columns.size(); ++c) os << (c ? "," : "") << table.columns[c];
    os << '\n';
    for (const auto& row : table.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << cell(row[c]);
      os << '\n';
    }
    return os.str();
  }
  json rows = json::array();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    json obj = json::object();
    for (std::size_t c = 0; c < table.columns.size(); ++c) obj[table.columns[c]] = json_value(table.rows[r][c]);
    if (r < table.extras.size() && table.extras[r].is_object()) {
      for (const auto& [k, v] : table.extras[r].items()) obj[k] = v;
    }
    rows.push_back(obj);
  }
  json doc = {{"meta", meta(config)}, {"rows", rows}};
  return doc.dump(2) + "\n";
}

const std::vector<std::string> kMomentColumns = {"n",    "p",      "gamma",      "statistic",     "r", "trials",
                                                 "mean", "stderr", "max_sample", "overflow_count"};

std::vector<json> moment_row(std::size_t n, std::size_t p, double gamma, const mc::MomentEstimate& e) {
  return {n, p, gamma, e.statistic_name, e.r, e.trials, real_cell(e.mean), real_cell(e.std_error),
          real_cell(e.max_sample), e.overflow_count};
}

json running_means_json(const mc::MomentEstimate& e) {
  return {{"running_means", e.to_json().at("running_means")}, {"reliable", e.reliable}};
}

ensembles::DesignSpec design(std::size_t n, std::size_t p, const std::string& cov, const std::string& law) {
  ensembles::DesignSpec spec;
  spec.n = n;
  spec.p = p;
  spec.law = ensembles::parse_entry_law(law);
  if (p == 0) throw ValidationError("p must be >= 1");
  spec.covariance = ensembles::CovarianceModel::parse(cov, p);
  spec.validate();
  return spec;
}

RunResult run_moments(const ExperimentConfig& c) {
  const json& prm = c.parameters;
  const auto spec = design(size_param(prm, "n"), size_param(prm, "p"), text_param(prm, "cov"), text_param(prm, "law"));
  const auto est = mc::estimate_moment(spec, mc::parse_statistic(text_param(prm, "statistic")), real_param(prm, "r"),
                                       size_param(prm, "trials"), c.seed, c.workers);
  Table t{kMomentColumns, {moment_row(spec.n, spec.p, spec.gamma(), est)}, {running_means_json(est)}};
  RunResult out;
  out.content = render_table(c, t);
  out.exit_code = (!est.reliable && spec.law == ensembles::EntryLaw::gaussian) ? kExitNumerical : kExitOk;
  out.summary = "moments: " + est.statistic_name + "^" + num(est.r) + " mean=" + num(est.mean) +
                " stderr=" + num(est.std_error) + " overflow=" + std::to_string(est.overflow_count);
  return out;
}

RunResult run_sweep(const ExperimentConfig& c) {
  const json& prm = c.parameters;
  const std::size_t n = size_param(prm, "n");
  const auto law = ensembles::parse_entry_law(text_param(prm, "law"));
  const auto rows = mc::sweep_gamma(n, prm.at("gamma_grid").get<std::vector<double>>(),
                                    mc::parse_statistic(text_param(prm, "statistic")), real_param(prm, "r"),
                                    size_param(prm, "trials"), c.seed, c.workers, text_param(prm, "cov"), law);
  Table t{kMomentColumns, {}, {}};
  bool reliable = true;
  for (const auto& row : rows) {
    t.rows.push_back(moment_row(row.n, row.p, row.gamma, row.estimate));
    t.extras.push_back(running_means_json(row.estimate));
    reliable = reliable && row.estimate.reliable;
  }
  RunResult out;
  out.content = render_table(c, t);
  out.exit_code = (!reliable && law == ensembles::EntryLaw::gaussian) ? kExitNumerical : kExitOk;
  out.summary = "sweep: " + std::to_string(rows.size()) + " grid points" + (reliable ? "" : ", overflow above 1%");
  return out;
}

double need(const json& prm, const char* key, const std::string& eval) {
  if (prm.at(key).is_null()) throw ValidationError("missing required field '" + std::string(key) + "' for eval " + eval);
  return prm.at(key).get<double>();
}

RunResult run_bounds(const ExperimentConfig& c) {
  const json& prm = c.parameters;
  const std::string eval = text_param(prm, "eval");
  auto dim = [&](const char* key) {
    const double v = need(prm, key, eval);
    return static_cast<std::size_t>(v);
  };
  bounds::BoundReport rep;
  if (eval == "min-sv-negative") {
    rep = bounds::min_sv_negative_moment_bound(dim("n"), dim("p"), real_param(prm, "r"), real_param(prm, "K"));
  } else if (eval == "min-sv-normalized") {
    rep = bounds::min_sv_normalized_moment_bound(dim("n"), dim("p"), real_param(prm, "r"), real_param(prm, "K"));
  } else if (eval == "max-sv") {
    rep = bounds::max_sv_moment_bound(dim("n"), dim("p"), real_param(prm, "r"));
  } else if (eval == "dongarra-tail") {
    rep = bounds::dongarra_kappa_tail(dim("n"), dim("p"), need(prm, "t", eval), real_param(prm, "C"));
  } else if (eval == "expected-log-kappa") {
    rep.value = bounds::expected_log_kappa_bound(dim("n"), dim("p"));
  } else if (eval == "gd-upper") {
    rep.value = bounds::gd_iteration_upper(need(prm, "kappa", eval), need(prm, "epsilon", eval));
  } else if (eval == "gd-worstcase-lower") {
    rep.value = static_cast<double>(
        bounds::gd_worstcase_lower(need(prm, "L", eval), need(prm, "mu", eval), need(prm, "epsilon", eval)));
  } else if (eval == "smallball") {
    rep.value = bounds::rv_smallball_bound(dim("n"), dim("p"), need(prm, "epsilon", eval), real_param(prm, "C"),
                                           need(prm, "c", eval));
  } else if (eval == "ridge-upper") {
    const auto r = bounds::ridge_risk_upper(need(prm, "lambda_tilde", eval), need(prm, "b_frob_sq", eval), dim("p"),
                                            need(prm, "trace_sigma_eps", eval), dim("n"), need(prm, "L", eval),
                                            need(prm, "mu", eval));
    rep.value = r.bias_bound + r.variance_bound;
    rep.constants = {{"bias_bound", r.bias_bound}, {"variance_bound", r.variance_bound}};
  } else {
    std::string known;
    for (const auto& e : kEvals) known += (known.empty() ? "" : "|") + e;
    throw ValidationError("unknown eval '" + eval + "' (expected " + known + ")");
  }
  RunResult out;
  if (c.format == "json") {
    json doc = rep.to_json();
    doc["eval"] = eval;
    doc["meta"] = meta(c);
    out.content = doc.dump(2) + "\n";
  } else {
    Table t{{"eval", "name", "value"}, {}, {}};
    t.rows.push_back({eval, "value", real_cell(rep.value)});
    t.rows.push_back({eval, "valid", rep.valid ? 1 : 0});
    for (const auto& [k, v] : rep.constants) t.rows.push_back({eval, k, real_cell(v)});
    out.content = render_table(c, t);
  }
  out.summary = "bounds " + eval + ": value=" + num(rep.value) + (rep.valid ? "" : " (invalid: " + rep.reason + ")");
  return out;
}

RunResult run_ridge(const ExperimentConfig& c) {
  const json& prm = c.parameters;
  const std::size_t n = size_param(prm, "n");
  const std::size_t p = size_param(prm, "p");
  const std::size_t q = size_param(prm, "q");
  if (p == 0 || q == 0) throw ValidationError("ridge: p and q must be >= 1");
  const double lambda = real_param(prm, "lambda");
  const auto cov = ensembles::CovarianceModel::parse(text_param(prm, "cov"), p);
  const auto noise = ensembles::CovarianceModel::parse(text_param(prm, "noise"), q);
  const auto b_spec = ridge::BSpec::parse(text_param(prm, "b_spec"));
  const auto m = ridge::mean_risk_experiment(n, p, q, lambda, cov, b_spec, size_param(prm, "design_trials"), 0,
                                             c.seed, noise, c.workers);
  Table t{{"n", "p", "q", "lambda", "lambda_tilde", "bias", "variance", "total", "bias_upper", "variance_upper"},
          {{n, p, q, lambda, m.lambda_tilde, real_cell(m.mean_bias), real_cell(m.mean_variance),
            real_cell(m.mean_risk), real_cell(m.mean_bias_upper), real_cell(m.mean_variance_upper)}},
          {json{{"stderr", number_or_null(m.std_error)},
                {"design_trials", m.design_trials},
                {"mean_b_frob_sq", number_or_null(m.mean_b_frob_sq)}}}};
  RunResult out;
  out.content = render_table(c, t);
  out.summary = "ridge: mean risk=" + num(m.mean_risk) + " stderr=" + num(m.std_error);
  return out;
}

RunResult run_covest(const ExperimentConfig& c) {
  const json& prm = c.parameters;
  std::vector<std::pair<std::size_t, std::size_t>> grid;
  for (const auto& pair : prm.at("grid")) grid.emplace_back(pair[0].get<std::size_t>(), pair[1].get<std::size_t>());
  const auto law = ensembles::parse_entry_law(text_param(prm, "law"));
  const auto rows = covest::rate_experiment(grid, real_param(prm, "r"), size_param(prm, "trials"), c.seed, law,
                                            c.workers);
  Table t{{"n", "p", "r", "trials", "forward_norm_moment", "forward_ratio", "inverse_norm_moment", "inverse_ratio",
           "overflow_count"},
          {},
          {}};
  bool overflow = false;
  std::size_t violations = 0;
  for (const auto& row : rows) {
    t.rows.push_back({row.n, row.p, row.r, row.trials, real_cell(row.forward_norm_moment), real_cell(row.forward_ratio),
                      real_cell(row.inverse_norm_moment), real_cell(row.inverse_ratio), row.overflow_count});
    t.extras.push_back({{"valid", row.valid},
                        {"rate_denominator", number_or_null(row.rate_denominator)},
                        {"forward_ratio_stderr", number_or_null(row.forward_ratio_stderr)},
                        {"inverse_ratio_stderr", number_or_null(row.inverse_ratio_stderr)},
                        {"resolvent_violations", row.resolvent_violations}});
    if (row.valid && 100 * row.overflow_count > row.trials) overflow = true;
    violations += row.resolvent_violations;
  }
  RunResult out;
  out.content = render_table(c, t);
  out.exit_code = (overflow && law == ensembles::EntryLaw::gaussian) ? kExitNumerical : kExitOk;
  out.summary = "covest: " + std::to_string(rows.size()) + " grid points, resolvent violations=" +
                std::to_string(violations);
  return out;
}

RunResult run_gd(const ExperimentConfig& c) {
  const json& prm = c.parameters;
  gramsolve::ComplexityOptions opt;
  opt.solver = gramsolve::parse_solver(text_param(prm, "solver"));
  opt.init = gramsolve::parse_init(text_param(prm, "init"));
  opt.b_mode = gramsolve::parse_b_mode(text_param(prm, "b_mode"));
  opt.max_iter = prm.at("max_iter").get<std::int64_t>();
  opt.workers = c.workers;
  const auto rows = gramsolve::complexity_experiment(size_param(prm, "n"),
                                                     prm.at("gamma_grid").get<std::vector<double>>(),
                                                     real_param(prm, "epsilon"), size_param(prm, "trials"), c.seed, opt);
  Table t{{"n", "p", "gamma", "solver", "init", "epsilon", "trials", "mean_T", "stderr_T", "mean_upper_bound",
           "mean_lower_bound", "censored_fraction"},
          {},
          {}};
  double censored = 0.0;
  for (const auto& row : rows) {
    t.rows.push_back({row.n, row.p, row.gamma, gramsolve::to_string(row.solver), gramsolve::to_string(row.init),
                      row.epsilon, row.trials, real_cell(row.mean_T), real_cell(row.stderr_T),
                      real_cell(row.mean_upper_bound), real_cell(row.mean_lower_bound), row.censored_fraction});
    t.extras.push_back({{"upper_violations", row.upper_violations},
                        {"lower_violations", row.lower_violations},
                        {"t_values", row.t_values}});
    censored = std::max(censored, row.censored_fraction);
  }
  RunResult out;
  out.content = render_table(c, t);
  out.exit_code = (censored > 0.0 && !c.allow_censored) ? kExitNumerical : kExitOk;
  out.summary = "gd: " + std::to_string(rows.size()) + " grid points, max censored fraction=" + num(censored);
  if (out.exit_code == kExitNumerical) out.summary += " (rerun with --allow-censored to accept)";
  return out;
}

RunResult run_counterexample(const ExperimentConfig& c) {
  const json& prm = c.parameters;
  const auto spec = design(size_param(prm, "n"), size_param(prm, "p"), "identity", text_param(prm, "law"));
  const auto est = mc::divergence_diagnostic(spec, mc::parse_statistic(text_param(prm, "statistic")),
                                             size_param(prm, "trials"), c.seed, c.workers);
  Table t{{"n", "p", "law", "statistic", "checkpoint", "running_mean", "stderr"}, {}, {}};
  for (const auto& cp : est.running_means) {
    t.rows.push_back({spec.n, spec.p, ensembles::to_string(spec.law), est.statistic_name, cp.trials,
                      real_cell(cp.mean), real_cell(cp.std_error)});
    t.extras.push_back({{"max_sample", number_or_null(est.max_sample)}, {"overflow_count", est.overflow_count}});
  }
  RunResult out;
  out.content = render_table(c, t);
  const double first = est.running_means.empty() ? 0.0 : est.running_means.front().mean;
  out.summary = "counterexample: running mean " + num(first) + " -> " + num(est.mean) +
                ", max_sample=" + num(est.max_sample) + ", overflow=" + std::to_string(est.overflow_count);
  return out;
}

RunResult run_inv_chisq(const ExperimentConfig& c) {
  const json& prm = c.parameters;
  const std::size_t n = size_param(prm, "n");
  const std::size_t p = size_param(prm, "p");
  const std::size_t trials = size_param(prm, "trials");
  const auto ks = mc::inv_chisq_check(n, p, trials, c.seed, c.workers);
  Table t{{"n", "p", "trials", "dof", "ks_statistic", "critical_value_1pct", "passes"},
          {{n, p, trials, ks.dof, ks.ks_statistic, ks.critical_value_1pct, ks.passes()}},
          {}};
  RunResult out;
  out.content = render_table(c, t);
  out.summary = "inv-chisq: KS=" + num(ks.ks_statistic) + " critical=" + num(ks.critical_value_1pct) +
                (ks.passes() ? " pass" : " fail");
  return out;
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ValidationError("cannot open '" + tmp.string() + "' for writing");
    f << content;
    f.flush();
    if (!f) throw NumericalError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ValidationError("cannot move results into '" + path + "'");
  }
}

}  // namespace

std::string version() { return GRAM_SPECTRA_VERSION; }

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"moments", "sweep", "bounds",         "ridge",
                                                 "covest",  "gd",    "counterexample", "inv-chisq"};
  return names;
}

const std::vector<ParamSpec>& schema(const std::string& subcommand) {
  const auto& table = schema_table();
  const auto it = table.find(subcommand);
  if (it == table.end()) throw ValidationError("unknown subcommand '" + subcommand + "'");
  return it->second;
}

json ExperimentConfig::to_json() const {
  json j = {{"schema_version", kSchemaVersion},
            {"subcommand", subcommand},
            {"parameters", parameters},
            {"seed", seed},
            {"format", format},
            {"workers", workers},
            {"allow_censored", allow_censored}};
  if (!output_path.empty()) j["output"] = output_path;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config: top level must be a JSON object");
  static const std::vector<std::string> allowed = {"schema_version", "subcommand", "parameters",    "seed",
                                                   "format",         "workers",    "allow_censored", "output"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError("config: unknown field '" + key + "'");
    }
  }
  if (!j.contains("schema_version")) throw ValidationError("config: missing required field 'schema_version'");
  if (!j.at("schema_version").is_number_integer() || j.at("schema_version").get<int>() != kSchemaVersion) {
    throw ValidationError("config: field 'schema_version' must be " + std::to_string(kSchemaVersion));
  }
  if (!j.contains("subcommand") || !j.at("subcommand").is_string()) {
    throw ValidationError("config: missing required field 'subcommand'");
  }
  ExperimentConfig c;
  c.subcommand = j.at("subcommand").get<std::string>();
  const auto& specs = schema(c.subcommand);
  if (j.contains("parameters")) {
    const json& prm = j.at("parameters");
    if (!prm.is_object()) throw ValidationError("config: field 'parameters' must be an object");
    for (const auto& [key, value] : prm.items()) {
      const ParamSpec* spec = find_param(specs, key);
      if (!spec) throw ValidationError("config: unknown parameter '" + key + "' for " + c.subcommand);
      if (!value.is_null() && !matches_kind(spec->kind, value)) {
        throw ValidationError("config: parameter '" + key + "' must be " + kind_name(spec->kind));
      }
      c.parameters[key] = value;
    }
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ValidationError("config: field 'seed' must be a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("format")) {
    if (!j.at("format").is_string()) throw ValidationError("config: field 'format' must be a string");
    c.format = j.at("format").get<std::string>();
  }
  if (j.contains("workers")) {
    if (!j.at("workers").is_number_unsigned()) throw ValidationError("config: field 'workers' must be >= 0");
    c.workers = j.at("workers").get<unsigned>();
  }
  if (j.contains("allow_censored")) {
    if (!j.at("allow_censored").is_boolean()) throw ValidationError("config: field 'allow_censored' must be a boolean");
    c.allow_censored = j.at("allow_censored").get<bool>();
  }
  if (j.contains("output")) {
    if (!j.at("output").is_string()) throw ValidationError("config: field 'output' must be a string");
    c.output_path = j.at("output").get<std::string>();
  }
  return c;
}

ExperimentConfig normalized(ExperimentConfig config) {
  const auto& specs = schema(config.subcommand);
  if (!config.parameters.is_object()) throw ValidationError("parameters must be an object");
  for (const auto& [key, value] : config.parameters.items()) {
    const ParamSpec* spec = find_param(specs, key);
    if (!spec) throw ValidationError("unknown parameter '" + key + "' for " + config.subcommand);
    if (!value.is_null() && !matches_kind(spec->kind, value)) {
      throw ValidationError("parameter '" + key + "' must be " + kind_name(spec->kind));
    }
  }
  json filled = json::object();
  for (const auto& spec : specs) {
    json v = config.parameters.contains(spec.key) ? config.parameters.at(spec.key) : spec.fallback;
    const bool optional_for_bounds = config.subcommand == "bounds" && spec.key != "eval";
    if (v.is_null() && !optional_for_bounds) throw ValidationError("missing required field '" + spec.key + "'");
    filled[spec.key] = v;
  }
  config.parameters = filled;
  if (config.format.empty()) config.format = default_format(config.subcommand);
  if (config.format != "csv" && config.format != "json") {
    throw ValidationError("format must be csv or json, got '" + config.format + "'");
  }
  return config;
}

ExperimentConfig default_config(const std::string& subcommand) {
  ExperimentConfig c;
  c.subcommand = subcommand;
  for (const auto& spec : schema(subcommand)) c.parameters[spec.key] = spec.fallback;
  c.format = default_format(subcommand);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ValidationError("config: malformed JSON in '" + path + "': " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

json parse_param_value(const ParamSpec& spec, const std::string& text) {
  const std::string what = "--" + flag_name(spec.key);
  switch (spec.kind) {
    case ParamKind::integer: return parse_u64(text, what);
    case ParamKind::real: return parse_real(text, what);
    case ParamKind::text: return text;
    case ParamKind::real_list: {
      json out = json::array();
      for (const auto& item : split(text, ',')) out.push_back(parse_real(item, what));
      return out;
    }
    case ParamKind::pair_list: {
      json out = json::array();
      for (const auto& item : split(text, ',')) {
        const auto sep = item.find_first_of("x:");
        if (sep == std::string::npos) throw ValidationError(what + ": expected NxP pairs, got '" + item + "'");
        out.push_back(json::array({parse_u64(item.substr(0, sep), what), parse_u64(item.substr(sep + 1), what)}));
      }
      return out;
    }
  }
  return nullptr;
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  const json canonical = {{"schema_version", kSchemaVersion},
                          {"subcommand", config.subcommand},
                          {"parameters", config.parameters},
                          {"seed", config.seed},
                          {"format", config.format}};
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RunResult execute(const ExperimentConfig& config) {
  const std::string& s = config.subcommand;
  if (s == "moments") return run_moments(config);
  if (s == "sweep") return run_sweep(config);
  if (s == "bounds") return run_bounds(config);
  if (s == "ridge") return run_ridge(config);
  if (s == "covest") return run_covest(config);
  if (s == "gd") return run_gd(config);
  if (s == "counterexample") return run_counterexample(config);
  if (s == "inv-chisq") return run_inv_chisq(config);
  throw ValidationError("unknown subcommand '" + s + "'");
}

int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const ExperimentConfig c = normalized(config);
    const RunResult result = execute(c);
    if (c.output_path.empty()) {
      out << result.content;
      out.flush();
      err << result.summary << '\n';
    } else {
      write_atomic(c.output_path, result.content);
      err << result.summary << " -> " << c.output_path << '\n';
    }
    return result.exit_code;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Moment bounds and Monte Carlo experiments for extreme singular values of random matrices",
               "gram_spectra"};
  app.set_version_flag("--version", version());
  app.require_subcommand(0, 1);

  std::string config_path;
  std::string seed_text;
  std::string workers_text;
  std::string out_path;
  std::string format;
  bool allow_censored = false;
  bool dump_config = false;
  app.add_option("--config", config_path, "JSON config file (flags override its values)");
  auto* seed_opt = app.add_option("--seed", seed_text, "master seed (also GRAM_SPECTRA_SEED)");
  auto* workers_opt = app.add_option("--workers", workers_text, "worker threads, 0 = all cores (results unaffected)");
  auto* out_opt = app.add_option("--out", out_path, "output file, written atomically (default stdout)");
  auto* format_opt = app.add_option("--format", format, "csv or json");
  auto* censor_opt = app.add_flag("--allow-censored", allow_censored, "exit 0 even when gd runs hit --max-iter");
  app.add_flag("--dump-config", dump_config, "print the effective config as JSON and exit");

  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, std::map<std::string, CLI::Option*>> options;
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : subcommands()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->fallthrough();
    subs[name] = sub;
    for (const auto& spec : schema(name)) {
      options[name][spec.key] = sub->add_option("--" + flag_name(spec.key), values[name][spec.key], spec.help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    std::string chosen;
    for (const auto& [name, sub] : subs) {
      if (sub->parsed()) chosen = name;
    }
    ExperimentConfig config;
    if (!config_path.empty()) {
      config = load_config(config_path);
      if (!chosen.empty() && chosen != config.subcommand) {
        throw ValidationError("subcommand '" + chosen + "' does not match config subcommand '" + config.subcommand + "'");
      }
    } else if (chosen.empty()) {
      throw ValidationError("a subcommand or --config is required (see --help)");
    } else {
      config.subcommand = chosen;
    }
    if (const char* env = std::getenv("GRAM_SPECTRA_SEED"); env && *env) {
      config.seed = parse_u64(env, "GRAM_SPECTRA_SEED");
    }
    if (seed_opt->count()) config.seed = parse_u64(seed_text, "--seed");
    if (workers_opt->count()) config.workers = static_cast<unsigned>(parse_u64(workers_text, "--workers"));
    if (out_opt->count()) config.output_path = out_path;
    if (format_opt->count()) config.format = format;
    if (censor_opt->count()) config.allow_censored = allow_censored;
    if (!chosen.empty()) {
      for (const auto& spec : schema(chosen)) {
        if (options[chosen][spec.key]->count()) {
          config.parameters[spec.key] = parse_param_value(spec, values[chosen][spec.key]);
        }
      }
    }
    if (dump_config) {
      out << normalized(config).to_json().dump(2) << '\n';
      return kExitOk;
    }
    return run(config, out, err);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace gram_spectra::cli
