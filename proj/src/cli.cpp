#include "thinlaw/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "thinlaw/format.hpp"
#include "thinlaw/functionals.hpp"

namespace thinlaw::cli {

const char* experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::large_numbers:
      return "large-numbers";
    case ExperimentKind::thin_numbers:
      return "thin-numbers";
    case ExperimentKind::thin_processes:
      return "thin-processes";
    case ExperimentKind::verify_properties:
      return "verify-properties";
  }
  return "unknown";
}

ExperimentKind experiment_from_name(const std::string& name) {
  if (name == "large-numbers") return ExperimentKind::large_numbers;
  if (name == "thin-numbers") return ExperimentKind::thin_numbers;
  if (name == "thin-processes") return ExperimentKind::thin_processes;
  if (name == "verify-properties") return ExperimentKind::verify_properties;
  throw ConfigError("experiment: unknown value '" + name + "'");
}

void KeyValues::set(const std::string& key, const std::string& value) {
  if (find(key)) throw ConfigError("duplicate key '" + key + "'");
  items_.emplace_back(key, value);
}

void KeyValues::override_with(const KeyValues& stronger) {
  for (const auto& [key, value] : stronger.items_) {
    bool replaced = false;
    for (auto& item : items_) {
      if (item.first == key) {
        item.second = value;
        replaced = true;
        break;
      }
    }
    if (!replaced) items_.emplace_back(key, value);
  }
}

const std::string* KeyValues::find(const std::string& key) const {
  for (const auto& item : items_)
    if (item.first == key) return &item.second;
  return nullptr;
}

namespace {

using nlohmann::json;

std::string json_scalar_to_string(const json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_unsigned()) return format_u64(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  throw ConfigError("config: unsupported value type for key '" + key + "'");
}

KeyValues parse_json_config(const std::string& text) {
  std::set<std::string> seen;
  std::string duplicate;
  auto watch_keys = [&](int depth, json::parse_event_t event, json& parsed) {
    if (event == json::parse_event_t::key && depth == 1) {
      const auto k = parsed.get<std::string>();
      if (!seen.insert(k).second && duplicate.empty()) duplicate = k;
    }
    return true;
  };
  json doc;
  try {
    doc = json::parse(text, watch_keys);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!duplicate.empty()) throw ConfigError("duplicate key '" + duplicate + "'");
  if (!doc.is_object()) throw ConfigError("config: JSON root must be an object");

  KeyValues kv;
  for (const auto& [key, value] : doc.items()) {
    if (value.is_array()) {
      std::string joined;
      for (const auto& item : value) {
        if (!joined.empty()) joined += ',';
        joined += json_scalar_to_string(item, key);
      }
      kv.set(key, joined);
    } else {
      kv.set(key, json_scalar_to_string(value, key));
    }
  }
  return kv;
}

KeyValues parse_flat_config(const std::string& text) {
  KeyValues kv;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string token;
    while (tokens >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos || eq == 0)
        throw ConfigError("config: expected key=value, got '" + token + "'");
      kv.set(token.substr(0, eq), token.substr(eq + 1));
    }
  }
  return kv;
}

std::uint64_t parse_u64(const std::string& text, const std::string& key) {
  try {
    std::size_t used = 0;
    if (text.empty() || text[0] == '-') throw std::invalid_argument("negative");
    const std::uint64_t v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an unsigned integer, got '" + text + "'");
  }
}

double parse_real(const std::string& text, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

IntegerDistribution parse_dist(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (kind == "deterministic") return IntegerDistribution::deterministic(parse_u64(args, "dist"));
    if (kind == "bernoulli") return IntegerDistribution::bernoulli(parse_real(args, "dist"));
    if (kind == "poisson") return IntegerDistribution::poisson(parse_real(args, "dist"));
    if (kind == "binomial") {
      const auto parts = split(args, ',');
      if (parts.size() != 2) throw ConfigError("dist: binomial needs M,P");
      return IntegerDistribution::binomial(parse_u64(parts[0], "dist"),
                                           parse_real(parts[1], "dist"));
    }
    if (kind == "finitepmf") {
      std::vector<double> weights;
      for (const auto& w : split(args, ',')) weights.push_back(parse_real(w, "dist"));
      return IntegerDistribution::finite_pmf(std::move(weights));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("dist: ") + e.what());
  }
  throw ConfigError("dist: unknown kind '" + kind + "'");
}

ProcessSpec parse_spec(const std::string& text, const Window& window) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (kind == "poisson")
      return ProcessSpec::poisson_process(
          IntensityMeasure::constant_density(parse_real(args, "spec"), window));
    if (kind == "fixed-atoms") {
      std::vector<Point> points;
      for (const auto& group : split(args, ';')) {
        const auto coords = split(group, ',');
        if (int(coords.size()) != window.dim)
          throw ConfigError("spec: fixed-atoms point needs one coordinate per axis");
        Point x{};
        for (std::size_t a = 0; a < coords.size(); ++a) x[a] = parse_real(coords[a], "spec");
        points.push_back(x);
      }
      return ProcessSpec::fixed_atoms(std::move(points), window);
    }
    if (kind == "binomial") {
      const std::array<int, 3> res{4, window.dim >= 2 ? 4 : 1, window.dim >= 3 ? 4 : 1};
      return ProcessSpec::binomial_process(
          parse_u64(args, "spec"), Grid::constant(window, res, 1.0 / window.volume()));
    }
    if (kind == "neyman-scott") {
      const auto parts = split(args, ',');
      if (parts.size() != 3) throw ConfigError("spec: neyman-scott needs KAPPA,C,R");
      return ProcessSpec::neyman_scott(parse_real(parts[0], "spec"),
                                       parse_real(parts[1], "spec"),
                                       parse_real(parts[2], "spec"), window);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("spec: ") + e.what());
  }
  throw ConfigError("spec: unknown kind '" + kind + "'");
}

const std::set<std::string>& applicable_keys(ExperimentKind kind) {
  static const std::set<std::string> thin_numbers{"experiment", "dist",    "n",
                                                  "samples",    "seed",    "out", "mode"};
  static const std::set<std::string> large_numbers{"experiment", "dist", "n",
                                                   "samples",    "seed", "out"};
  static const std::set<std::string> thin_processes{
      "experiment", "spec", "dim", "n",         "samples",
      "seed",       "out",  "regions", "dict",  "dump-pattern"};
  static const std::set<std::string> verify{"experiment", "samples", "seed", "out"};
  switch (kind) {
    case ExperimentKind::thin_numbers:
      return thin_numbers;
    case ExperimentKind::large_numbers:
      return large_numbers;
    case ExperimentKind::thin_processes:
      return thin_processes;
    case ExperimentKind::verify_properties:
      return verify;
  }
  return verify;
}

const std::set<std::string>& all_known_keys() {
  static const std::set<std::string> known{"experiment", "dist",    "spec", "dim",
                                           "n",          "samples", "seed", "out",
                                           "mode",       "regions", "dict", "dump-pattern"};
  return known;
}

std::vector<std::uint64_t> default_n_list(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::thin_numbers:
      return {1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024};
    case ExperimentKind::large_numbers:
      return {10, 100, 1000};
    case ExperimentKind::thin_processes:
      return {1, 2, 4, 8, 16, 32};
    case ExperimentKind::verify_properties:
      return {};
  }
  return {};
}

}  // namespace

ExperimentConfig build_config(const KeyValues& keys) {
  {
    std::vector<std::string> missing;
    if (!keys.find("experiment")) missing.push_back("experiment");
    if (!keys.find("seed")) missing.push_back("seed");
    if (!missing.empty()) {
      std::string msg = "missing required key";
      if (missing.size() > 1) msg += "s";
      msg += ":";
      for (const auto& m : missing) msg += " '" + m + "'";
      throw ConfigError(msg);
    }
  }
  for (const auto& [key, value] : keys.items())
    if (!all_known_keys().count(key)) throw ConfigError("unknown key '" + key + "'");

  ExperimentConfig config;
  config.experiment = experiment_from_name(*keys.find("experiment"));

  for (const auto& [key, value] : keys.items())
    if (!applicable_keys(config.experiment).count(key))
      throw ConfigError("key '" + key + "' does not apply to experiment '" +
                        experiment_name(config.experiment) + "'");

  config.seed = parse_u64(*keys.find("seed"), "seed");

  if (const auto* dim = keys.find("dim")) {
    const std::uint64_t d = parse_u64(*dim, "dim");
    if (d < 1 || d > 3) throw ConfigError("dim: must be 1, 2, or 3");
    config.dim = int(d);
  }
  const Window window = Window::unit(config.dim);

  if (const auto* dist = keys.find("dist")) config.dist = parse_dist(*dist);
  if (const auto* spec = keys.find("spec")) config.process = parse_spec(*spec, window);

  if (const auto* n = keys.find("n")) {
    for (const auto& item : split(*n, ','))
      config.n_list.push_back(parse_u64(item, "n"));
    if (config.n_list.empty()) throw ConfigError("n: must be a non-empty ascending list");
    for (std::size_t i = 0; i < config.n_list.size(); ++i) {
      if (config.n_list[i] == 0) throw ConfigError("n: entries must be >= 1");
      if (i > 0 && config.n_list[i] <= config.n_list[i - 1])
        throw ConfigError("n: must be strictly ascending");
    }
  } else {
    config.n_list = default_n_list(config.experiment);
  }

  if (const auto* samples = keys.find("samples")) {
    config.samples = parse_u64(*samples, "samples");
    if (config.samples < 2) throw ConfigError("samples: must be >= 2");
  }

  switch (config.experiment) {
    case ExperimentKind::thin_numbers:
    case ExperimentKind::large_numbers:
      if (!config.dist)
        throw ConfigError("missing required key 'dist' for experiment '" +
                          std::string(experiment_name(config.experiment)) + "'");
      break;
    case ExperimentKind::thin_processes:
      if (!config.process)
        throw ConfigError("missing required key 'spec' for experiment 'thin-processes'");
      break;
    case ExperimentKind::verify_properties:
      break;
  }

  if (const auto* mode = keys.find("mode")) {
    if (*mode == "exact")
      config.mode = CurveMode::exact;
    else if (*mode == "mc")
      config.mode = CurveMode::mc;
    else
      throw ConfigError("mode: expected 'exact' or 'mc', got '" + *mode + "'");
    if (config.mode == CurveMode::exact && !config.dist->finite_support())
      throw ConfigError("mode: exact mode requires a finite-support dist");
  } else if (config.experiment == ExperimentKind::thin_numbers) {
    config.mode = config.dist->finite_support() ? CurveMode::exact : CurveMode::mc;
  }

  if (const auto* regions = keys.find("regions")) {
    config.region_ids = split(*regions, ',');
    const auto catalog = standard_regions(window);
    for (const auto& id : config.region_ids)
      if (std::none_of(catalog.begin(), catalog.end(),
                       [&](const auto& r) { return r.id == id; }))
        throw ConfigError("regions: unknown region id '" + id + "'");
  }
  if (const auto* dict = keys.find("dict")) {
    config.dict_ids = split(*dict, ',');
    const auto catalog = standard_dictionary(window);
    for (const auto& id : config.dict_ids)
      if (std::none_of(catalog.begin(), catalog.end(),
                       [&](const auto& f) { return f.id == id; }))
        throw ConfigError("dict: unknown test function id '" + id + "'");
  }
  if (const auto* dump = keys.find("dump-pattern")) config.dump_pattern = *dump;

  config.out = keys.find("out") ? *keys.find("out") : experiment_name(config.experiment);
  return config;
}

KeyValues parse_key_values(const std::string& text) {
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (c == '{') return parse_json_config(text);
    break;
  }
  return parse_flat_config(text);
}

ExperimentConfig parse_config(const std::string& text) {
  return build_config(parse_key_values(text));
}

namespace {

// Summary rules, keyed by metric name. Statistical rows compare |value-target|
// against 3 (soft) and 5 (hard) standard errors; limit-gap rows are judged at
// the final n plus a trend rule; exact rows must match to 1e-9; one-sided rows
// must stay below their bound.
enum class CheckLevel { pass, soft, hard };

struct CheckLine {
  CheckLevel level = CheckLevel::pass;
  std::string text;
};

struct Summary {
  std::vector<CheckLine> lines;
  int soft_fails = 0;
  int hard_fails = 0;
};

bool starts_with(const std::string& s, const char* prefix) { return s.rfind(prefix, 0) == 0; }

bool is_final_n_metric(const std::string& m) {
  return starts_with(m, "laplace_gap") || starts_with(m, "apgfl_gap_") ||
         m == "apgfl_max_gap" || starts_with(m, "count_tv_") || starts_with(m, "void_gap_") ||
         m == "tv_poisson";
}

bool has_mc_trend_rule(const std::string& m) {
  return m == "apgfl_max_gap" || m == "tv_poisson";
}

bool is_one_sided(const std::string& m) {
  return starts_with(m, "apgf_expansion_") || starts_with(m, "monotone_");
}

void add_check(Summary& summary, CheckLevel level, std::string text) {
  if (level == CheckLevel::soft) ++summary.soft_fails;
  if (level == CheckLevel::hard) ++summary.hard_fails;
  const char* tag = level == CheckLevel::pass ? "[PASS]" : level == CheckLevel::soft
                                                               ? "[SOFT-FAIL]"
                                                               : "[FAIL]";
  summary.lines.push_back({level, std::string(tag) + " " + std::move(text)});
}

void check_sigma(Summary& summary, const ConvergencePoint& row, const std::string& where) {
  const double gap = std::abs(row.value - row.target);
  const double se = row.std_error.value_or(0.0);
  CheckLevel level = CheckLevel::pass;
  if (se == 0.0) {
    if (gap > 1e-12) level = CheckLevel::hard;
  } else if (gap > 5.0 * se) {
    level = CheckLevel::hard;
  } else if (gap > 3.0 * se) {
    level = CheckLevel::soft;
  }
  add_check(summary, level,
            where + " " + row.metric + ": |value-target|=" + format_double(gap) +
                " stderr=" + format_double(se));
}

Summary summarize(const std::string& experiment, const std::vector<ConvergencePoint>& rows) {
  Summary summary;

  std::vector<std::string> metric_order;
  for (const auto& row : rows)
    if (std::find(metric_order.begin(), metric_order.end(), row.metric) == metric_order.end())
      metric_order.push_back(row.metric);

  for (const auto& metric : metric_order) {
    std::vector<const ConvergencePoint*> group;
    for (const auto& row : rows)
      if (row.metric == metric) group.push_back(&row);

    const bool exact_row = !group.front()->std_error.has_value();

    if (is_one_sided(metric)) {
      for (const auto* row : group) {
        const CheckLevel level =
            row->value <= row->target + 1e-12 ? CheckLevel::pass : CheckLevel::hard;
        add_check(summary, level,
                  "n=" + format_u64(row->n) + " " + metric + ": value=" +
                      format_double(row->value) + " bound=" + format_double(row->target));
      }
      continue;
    }

    if (exact_row && !is_final_n_metric(metric)) {
      // Exact identity rows.
      for (const auto* row : group) {
        const double gap = std::abs(row->value - row->target);
        add_check(summary, gap <= 1e-9 ? CheckLevel::pass : CheckLevel::hard,
                  "n=" + format_u64(row->n) + " " + metric +
                      ": |value-target|=" + format_double(gap) + " (exact rule)");
      }
      continue;
    }

    if (is_final_n_metric(metric)) {
      if (metric == "tv_poisson" && exact_row) {
        // Exact distance curves carry no noise scale; the check is the trend.
        bool ok = true;
        for (std::size_t i = 1; i < group.size(); ++i)
          if (group[i]->value > group[i - 1]->value + 1e-12) ok = false;
        add_check(summary, ok ? CheckLevel::pass : CheckLevel::hard,
                  metric + ": non-increasing over n (exact trend rule)");
        continue;
      }
      check_sigma(summary, *group.back(), "final n=" + format_u64(group.back()->n));
      if (has_mc_trend_rule(metric) && group.size() > 1) {
        bool ok = true;
        for (std::size_t i = 1; i < group.size(); ++i) {
          const double slack = 2.0 * std::hypot(group[i]->std_error.value_or(0.0),
                                                group[i - 1]->std_error.value_or(0.0));
          if (group[i]->value > group[i - 1]->value + slack) ok = false;
        }
        add_check(summary, ok ? CheckLevel::pass : CheckLevel::hard,
                  metric + ": non-increasing over n (2*stderr slack)");
      }
      continue;
    }

    // Per-n statistical rows.
    for (const auto* row : group)
      check_sigma(summary, *row, "n=" + format_u64(row->n));
  }

  (void)experiment;
  return summary;
}

std::vector<ConvergencePoint> run_thin_numbers(const ExperimentConfig& config,
                                               RngStream& master) {
  return thin_numbers_curve(*config.dist, config.n_list, config.mode, config.samples, master);
}

std::vector<ConvergencePoint> run_large_numbers(const ExperimentConfig& config,
                                                RngStream& master) {
  return large_numbers_check(*config.dist, config.n_list, config.samples, master);
}

std::vector<ConvergencePoint> run_thin_processes(const ExperimentConfig& config,
                                                 RngStream& master) {
  const Window window = Window::unit(config.dim);

  std::vector<NamedTestFunction> dict;
  for (auto& named : standard_dictionary(window))
    if (config.dict_ids.empty() ||
        std::find(config.dict_ids.begin(), config.dict_ids.end(), named.id) !=
            config.dict_ids.end())
      dict.push_back(std::move(named));

  std::vector<NamedRegion> regions;
  for (auto& named : standard_regions(window))
    if (config.region_ids.empty() ||
        std::find(config.region_ids.begin(), config.region_ids.end(), named.id) !=
            config.region_ids.end())
      regions.push_back(std::move(named));

  if (!config.dump_pattern.empty()) {
    RngStream stream(master.derive("dump-pattern"));
    const PointPattern pattern = sample_process(*config.process, stream);
    std::ofstream out(config.dump_pattern, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + config.dump_pattern);
    write_pattern(out, pattern, window);
    if (!out.flush()) throw IoError("write failed: " + config.dump_pattern);
  }

  return thin_processes_curve(*config.process, config.n_list, dict, regions, config.samples,
                              master)
      .points;
}

void append_estimate_gap(std::vector<ConvergencePoint>& rows, const std::string& metric,
                         const Estimate& est, double target) {
  rows.push_back({1, metric, std::abs(est.value - target), 0.0, est.std_error});
}

std::vector<ConvergencePoint> run_verify_properties(const ExperimentConfig& config,
                                                    RngStream& master) {
  std::vector<ConvergencePoint> rows;
  const std::uint64_t N = config.samples;
  const std::uint64_t NP = std::min<std::uint64_t>(config.samples, 20000);

  const std::vector<IntegerDistribution> dists{
      IntegerDistribution::deterministic(3), IntegerDistribution::bernoulli(0.6),
      IntegerDistribution::poisson(2.5), IntegerDistribution::binomial(8, 0.4),
      IntegerDistribution::finite_pmf({0.2, 0.3, 0.1, 0.4})};

  // Integer thinning composes multiplicatively: thin(thin(x,q),p) vs thin(x,pq).
  {
    int index = 0;
    for (const auto& dist : {IntegerDistribution::binomial(6, 0.7),
                             IntegerDistribution::finite_pmf({0.1, 0.2, 0.3, 0.4})}) {
      RngStream ra(master.derive("thin-compose-a", index));
      RngStream rb(master.derive("thin-compose-b", index));
      ++index;
      EmpiricalPmf two_step, one_step;
      const double p = 0.6, q = 0.5;
      for (std::uint64_t i = 0; i < N; ++i) {
        two_step.add(thin_count(thin_count(dist.sample(ra), q, ra), p, ra));
        one_step.add(thin_count(dist.sample(rb), p * q, rb));
      }
      const double tv = tv_distance(two_step.to_pmf(), one_step.to_pmf());
      const auto bins = std::max(two_step.occupied_bins(), one_step.occupied_bins());
      rows.push_back({1, "thin_compose_tv_" + dist.name(), tv, 0.0,
                      std::sqrt(double(bins) / double(N))});
    }
  }

  // APGF thinning identity across the (dist, p, u) grid.
  {
    int index = 0;
    for (const auto& dist : dists) {
      for (double p : {0.1, 0.5, 0.9}) {
        RngStream rng(master.derive("apgf-thin", index++));
        std::vector<std::uint64_t> thinned(N);
        for (auto& x : thinned) x = thin_count(dist.sample(rng), p, rng);
        for (double u : {0.25, 0.5, 1.0, 1.5}) {
          const Estimate est = apgf_empirical(thinned, u);
          const std::string metric = "apgf_thin_" + dist.name() + "_p" + format_double(p) +
                                     "_u" + format_double(u);
          rows.push_back(
              {1, metric, std::abs(est.value - apgf_exact(dist, p * u)), 0.0, est.std_error});
        }
      }
    }
  }

  // APGF product rule for independent sums, exact through convolution.
  {
    const std::vector<std::pair<IntegerDistribution, IntegerDistribution>> pairs{
        {IntegerDistribution::bernoulli(0.6), IntegerDistribution::binomial(8, 0.4)},
        {IntegerDistribution::deterministic(3),
         IntegerDistribution::finite_pmf({0.2, 0.3, 0.1, 0.4})}};
    for (const auto& [a, b] : pairs) {
      const auto sum = IntegerDistribution::finite_pmf(convolve_pmf(a.pmf(), b.pmf()));
      for (double u : {0.25, 0.8, 1.5, 2.0}) {
        rows.push_back({1,
                        "apgf_product_" + a.name() + "_" + b.name() + "_u" + format_double(u),
                        apgf_exact(sum, u), apgf_exact(a, u) * apgf_exact(b, u), std::nullopt});
      }
    }
  }

  // First-order expansion stays within the second-factorial-moment bound.
  for (const auto& dist : dists) {
    const double bound_scale = factorial_moment(dist, 2) / 2.0;
    for (double u : {0.001, 0.01, 0.05, 0.1}) {
      rows.push_back({1, "apgf_expansion_" + dist.name() + "_u" + format_double(u),
                      std::abs(apgf_exact(dist, u) - (1.0 - dist.mean() * u)),
                      bound_scale * u * u, std::nullopt});
    }
  }

  // Poisson transform agrees with the point-mass Laplace transform.
  for (double u : {0.1, 0.7, 1.9}) {
    rows.push_back({1, "laplace_point_agree_u" + format_double(u),
                    apgf_exact(IntegerDistribution::poisson(2.0), u),
                    laplace_exact(PointMass{2.0}, u), std::nullopt});
  }

  const Window window = Window::unit(2);
  const auto poisson4 =
      ProcessSpec::poisson_process(IntensityMeasure::constant_density(4.0, window));
  const auto atoms3 = ProcessSpec::fixed_atoms(
      {make_point(0.1, 0.1), make_point(0.6, 0.2), make_point(0.6, 0.9)}, window);
  const auto binom6 =
      ProcessSpec::binomial_process(6, Grid::constant(window, {4, 4, 1}, 1.0));
  const auto cluster = ProcessSpec::neyman_scott(2.0, 3.0, 0.1, window);
  const auto regions = standard_regions(window);
  const Region r2 = regions[1].region;

  // Thinning distributes over superposition in count law.
  {
    RngStream ra(master.derive("pattern-distrib-a"));
    RngStream rb(master.derive("pattern-distrib-b"));
    EmpiricalPmf after, before;
    const double p = 0.4;
    for (std::uint64_t i = 0; i < NP; ++i) {
      auto merged = superpose(sample_process(poisson4, ra), sample_process(cluster, ra));
      after.add(count_in(thin_pattern(merged, p, ra), r2));
      before.add(count_in(superpose(thin_pattern(sample_process(poisson4, rb), p, rb),
                                    thin_pattern(sample_process(cluster, rb), p, rb)),
                          r2));
    }
    const auto bins = std::max(after.occupied_bins(), before.occupied_bins());
    rows.push_back({1, "pattern_distributivity_tv",
                    tv_distance(after.to_pmf(), before.to_pmf()), 0.0,
                    std::sqrt(double(bins) / double(NP))});
  }

  // Pattern thinning composes multiplicatively.
  {
    RngStream ra(master.derive("pattern-compose-a"));
    RngStream rb(master.derive("pattern-compose-b"));
    EmpiricalPmf two_step, one_step;
    const double p = 0.6, q = 0.5;
    for (std::uint64_t i = 0; i < NP; ++i) {
      two_step.add(count_in(
          thin_pattern(thin_pattern(sample_process(poisson4, ra), q, ra), p, ra), r2));
      one_step.add(count_in(thin_pattern(sample_process(poisson4, rb), p * q, rb), r2));
    }
    const auto bins = std::max(two_step.occupied_bins(), one_step.occupied_bins());
    rows.push_back({1, "pattern_compose_tv", tv_distance(two_step.to_pmf(), one_step.to_pmf()),
                    0.0, std::sqrt(double(bins) / double(NP))});
  }

  // The Poisson process is a fixed point of thinned superposition.
  for (std::uint64_t n : {2ull, 7ull}) {
    RngStream ra(master.derive("fixed-point-direct", n));
    RngStream rb(master.derive("fixed-point-thinned", n));
    EmpiricalPmf direct, thinned;
    for (std::uint64_t i = 0; i < NP; ++i) {
      direct.add(count_in(sample_process(poisson4, ra), r2));
      thinned.add(count_in(thinned_superposition_sample(poisson4, n, rb), r2));
    }
    const auto bins = std::max(direct.occupied_bins(), thinned.occupied_bins());
    rows.push_back({n, "poisson_fixed_point_n" + format_u64(n),
                    tv_distance(direct.to_pmf(), thinned.to_pmf()), 0.0,
                    std::sqrt(double(bins) / double(NP))});
  }

  // Mean counts match the declared intensity.
  {
    int index = 0;
    for (const auto& spec : {poisson4, atoms3, binom6, cluster}) {
      RngStream rng(master.derive("mean-count", index++));
      MeanAccumulator acc;
      for (std::uint64_t i = 0; i < NP; ++i)
        acc.add(double(count_in(sample_process(spec, rng), r2)));
      const Estimate est = acc.estimate();
      rows.push_back({1, "mean_count_" + spec.name() + "_R2", est.value,
                      measure_of(intensity_of_spec(spec), r2), est.std_error});
    }
  }

  // Scaled indicators bridge the functional to the count transform.
  {
    const auto u = TestFunction::scaled_indicator(0.6, r2);
    const double mean_r2 = measure_of(intensity_of_spec(poisson4), r2);
    rows.push_back({1, "count_bridge_poisson_R2", apgfl_exact(poisson4, u).value(),
                    apgf_exact(IntegerDistribution::poisson(mean_r2), 0.6), std::nullopt});
  }

  // Raising u pointwise can only shrink the product functional.
  {
    RngStream rng(master.derive("monotone"));
    double worst = -1.0;
    for (const auto& named : standard_dictionary(window)) {
      const auto smaller = scale_test(named.fn, 0.5);
      for (int i = 0; i < 100; ++i) {
        const auto pattern = sample_process(cluster, rng);
        worst = std::max(worst,
                         apgfl_on_pattern(pattern, named.fn) - apgfl_on_pattern(pattern, smaller));
      }
    }
    rows.push_back({1, "monotone_max_violation", worst, 0.0, std::nullopt});
  }

  // Functional thinning identity, one spot check per catalog spec.
  {
    const auto dict = standard_dictionary(window);
    const TestFunction& u = dict[1].fn;
    const double p = 0.5;
    const TestFunction pu = scale_test(u, p);
    int index = 0;
    for (const auto& spec : {poisson4, atoms3, binom6, cluster}) {
      RngStream rng(master.derive("apgfl-thin", index));
      std::vector<PointPattern> thinned(NP);
      for (auto& pat : thinned) pat = thin_pattern(sample_process(spec, rng), p, rng);
      const Estimate lhs = apgfl_empirical(thinned, u);
      const auto exact = apgfl_exact(spec, pu);
      if (exact) {
        append_estimate_gap(rows, "apgfl_thin_" + spec.name(), lhs, *exact);
      } else {
        RngStream ref_rng(master.derive("apgfl-thin-ref", index));
        std::vector<PointPattern> raw(NP);
        for (auto& pat : raw) pat = sample_process(spec, ref_rng);
        const Estimate rhs = apgfl_empirical(raw, pu);
        rows.push_back({1, "apgfl_thin_" + spec.name(), std::abs(lhs.value - rhs.value), 0.0,
                        std::hypot(lhs.std_error, rhs.std_error)});
      }
      ++index;
    }
  }

  // Functional superposition identity: the product of the parts.
  {
    RngStream ra(master.derive("apgfl-super-a"));
    RngStream rb(master.derive("apgfl-super-b"));
    RngStream rc(master.derive("apgfl-super-c"));
    RngStream rd(master.derive("apgfl-super-d"));
    std::vector<PointPattern> merged(NP), only_a(NP), only_b(NP);
    for (std::uint64_t i = 0; i < NP; ++i) {
      merged[i] = superpose(sample_process(poisson4, ra), sample_process(cluster, rb));
      only_a[i] = sample_process(poisson4, rc);
      only_b[i] = sample_process(cluster, rd);
    }
    const auto dict = standard_dictionary(window);
    const Estimate lhs = apgfl_empirical(merged, dict[3].fn);
    const Estimate ea = apgfl_empirical(only_a, dict[3].fn);
    const Estimate eb = apgfl_empirical(only_b, dict[3].fn);
    const double se = std::sqrt(lhs.std_error * lhs.std_error +
                                ea.value * ea.value * eb.std_error * eb.std_error +
                                eb.value * eb.value * ea.std_error * ea.std_error);
    rows.push_back(
        {1, "apgfl_superpose_product", std::abs(lhs.value - ea.value * eb.value), 0.0, se});
  }

  return rows;
}

void write_csv(const std::string& path, const std::string& experiment,
               const std::vector<ConvergencePoint>& rows, std::uint64_t seed) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "experiment,n,metric,target,value,stderr,seed\n";
  for (const auto& row : rows) {
    out << experiment << ',' << format_u64(row.n) << ',' << row.metric << ','
        << format_double(row.target) << ',' << format_double(row.value) << ','
        << (row.std_error ? format_double(*row.std_error) : "") << ',' << format_u64(seed)
        << '\n';
  }
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

void write_summary(const std::string& path, const std::string& experiment,
                   const Summary& summary, std::uint64_t seed) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "experiment: " << experiment << "\nseed: " << format_u64(seed) << "\n\n";
  for (const auto& line : summary.lines) out << line.text << '\n';
  out << "\nchecks: " << summary.lines.size() << " soft-failures: " << summary.soft_fails
      << " hard-failures: " << summary.hard_fails << '\n';
  out << "result: " << (summary.hard_fails > 0 ? "FAIL" : summary.soft_fails > 0 ? "SOFT-FAIL" : "PASS")
      << '\n';
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path);
  return buffer.str();
}

}  // namespace

int run(const ExperimentConfig& config) {
  RngStream master(config.seed);
  std::vector<ConvergencePoint> rows;
  switch (config.experiment) {
    case ExperimentKind::thin_numbers:
      rows = run_thin_numbers(config, master);
      break;
    case ExperimentKind::large_numbers:
      rows = run_large_numbers(config, master);
      break;
    case ExperimentKind::thin_processes:
      rows = run_thin_processes(config, master);
      break;
    case ExperimentKind::verify_properties:
      rows = run_verify_properties(config, master);
      break;
  }

  const std::string name = experiment_name(config.experiment);
  write_csv(config.out + ".csv", name, rows, config.seed);
  const Summary summary = summarize(name, rows);
  write_summary(config.out + ".summary.txt", name, summary, config.seed);
  return summary.hard_fails > 0 || summary.soft_fails > 0 ? 1 : 0;
}

int main_entry(int argc, const char* const* argv) {
  CLI::App app{"thinning and superposition experiment runner"};
  app.require_subcommand(1);

  struct SubArgs {
    CLI::App* cmd = nullptr;
    std::string config_path;
    std::string seed;
    std::string out;
  };
  std::vector<SubArgs> subs(4);
  const ExperimentKind kinds[4] = {ExperimentKind::large_numbers, ExperimentKind::thin_numbers,
                                   ExperimentKind::thin_processes,
                                   ExperimentKind::verify_properties};
  const char* blurbs[4] = {"sums of scaled variables against their limit",
                           "thinned sums against the Poisson limit",
                           "thinned superpositions of a point process",
                           "exact and sampled identity checks"};
  for (int i = 0; i < 4; ++i) {
    subs[i].cmd = app.add_subcommand(experiment_name(kinds[i]), blurbs[i]);
    subs[i].cmd->allow_extras();
    subs[i].cmd->add_option("--config", subs[i].config_path, "config file (key=value or JSON)");
    subs[i].cmd->add_option("--seed", subs[i].seed, "master seed (unsigned 64-bit)");
    subs[i].cmd->add_option("--out", subs[i].out, "output path prefix");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    int active = -1;
    for (int i = 0; i < 4; ++i)
      if (subs[i].cmd->parsed()) active = i;

    KeyValues merged;
    if (!subs[active].config_path.empty())
      merged = parse_key_values(read_file(subs[active].config_path));

    KeyValues from_cli;
    for (const auto& token : subs[active].cmd->remaining()) {
      const auto eq = token.find('=');
      if (eq == std::string::npos || eq == 0)
        throw ConfigError("expected key=value argument, got '" + token + "'");
      from_cli.set(token.substr(0, eq), token.substr(eq + 1));
    }
    if (const auto* exp = from_cli.find("experiment"))
      if (*exp != experiment_name(kinds[active]))
        throw ConfigError("experiment: '" + *exp + "' conflicts with subcommand '" +
                          experiment_name(kinds[active]) + "'");
    merged.override_with(from_cli);

    KeyValues from_flags;
    if (!subs[active].seed.empty()) {
      if (from_cli.find("seed")) throw ConfigError("seed given both as --seed and seed=");
      from_flags.set("seed", subs[active].seed);
    }
    if (!subs[active].out.empty()) {
      if (from_cli.find("out")) throw ConfigError("out given both as --out and out=");
      from_flags.set("out", subs[active].out);
    }
    merged.override_with(from_flags);

    KeyValues fixed;
    fixed.set("experiment", experiment_name(kinds[active]));
    merged.override_with(fixed);

    return run(build_config(merged));
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 3;
  }
}

}  // namespace thinlaw::cli
