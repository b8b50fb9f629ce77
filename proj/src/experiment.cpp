#include "dchoice/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "dchoice/allocation_io.hpp"
#include "dchoice/errors.hpp"
#include "dchoice/loadsolver.hpp"
#include "dchoice/random_stream.hpp"
#include "dchoice/spacings.hpp"

namespace dchoice {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::size_t as_count(const json& v, const std::string& path, bool allow_zero = false) {
  if (!v.is_number_integer() || v.get<long long>() < (allow_zero ? 0 : 1))
    throw ConfigError(path, allow_zero ? "expected a non-negative integer" : "expected a positive integer");
  return v.get<std::size_t>();
}

SigmaSpec as_sigma(const json& v, const std::string& path) {
  if (v.is_number()) return {SigmaSpec::Mode::absolute, v.get<double>()};
  if (!v.is_object() || v.size() != 1)
    throw ConfigError(path, "expected a number or one of {\"absolute\": x}, {\"fraction\": x}, {\"b\": x}");
  SigmaSpec s;
  const auto& [key, val] = *v.items().begin();
  if (key == "absolute") s.mode = SigmaSpec::Mode::absolute;
  else if (key == "fraction") s.mode = SigmaSpec::Mode::fraction;
  else if (key == "b") s.mode = SigmaSpec::Mode::b;
  else throw ConfigError(path, "unknown sigma rule '" + key + "'");
  if (!val.is_number() || !(val.get<double>() > 0.0)) throw ConfigError(path + "/" + key, "expected a positive number");
  s.value = val.get<double>();
  return s;
}

const char* kPointFields[] = {"kind", "n", "d", "r", "m", "k", "sigma", "allocation_file"};

bool is_point_field(const std::string& key) {
  return std::find(std::begin(kPointFields), std::end(kPointFields), key) != std::end(kPointFields);
}

// Expands one point object (fields possibly lists) into design points.
void expand_point(const json& fields, const std::string& base, std::vector<DesignPoint>& out) {
  std::vector<std::pair<std::string, std::vector<json>>> axes;
  for (const char* key : kPointFields) {
    if (!fields.contains(key)) continue;
    const json& v = fields.at(key);
    std::vector<json> vals;
    if (v.is_array()) {
      if (v.empty()) throw ConfigError(base + "/" + key, "empty list");
      for (const auto& e : v) vals.push_back(e);
    } else {
      vals.push_back(v);
    }
    axes.emplace_back(key, std::move(vals));
  }
  std::vector<std::size_t> idx(axes.size(), 0);
  for (;;) {
    DesignPoint p;
    bool has_n = false;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const std::string& key = axes[a].first;
      const json& v = axes[a].second[idx[a]];
      std::string path = base + "/" + key;
      if (axes[a].second.size() > 1) path += "/" + std::to_string(idx[a]);
      if (key == "kind") {
        if (!v.is_string()) throw ConfigError(path, "expected a design name");
        try {
          p.kind = parse_allocation_kind(v.get<std::string>());
        } catch (const std::invalid_argument& e) {
          throw ConfigError(path, e.what());
        }
      } else if (key == "n") {
        p.n = as_count(v, path);
        has_n = true;
      } else if (key == "d") {
        p.d = as_count(v, path);
      } else if (key == "r") {
        p.r = as_count(v, path);
      } else if (key == "m") {
        p.m = as_count(v, path);
      } else if (key == "k") {
        p.k = as_count(v, path);
      } else if (key == "sigma") {
        p.sigma = as_sigma(v, path);
      } else if (key == "allocation_file") {
        if (!v.is_string()) throw ConfigError(path, "expected a path");
        p.allocation_file = v.get<std::string>();
      }
    }
    if (!has_n && p.kind != AllocationKind::block_design && p.allocation_file.empty())
      throw ConfigError(base + "/n", "missing");
    if (p.kind == AllocationKind::custom && p.allocation_file.empty())
      throw ConfigError(base + "/allocation_file", "custom designs need an allocation file");
    out.push_back(p);
    // odometer over the list-valued fields, last field fastest
    std::size_t a = axes.size();
    while (a > 0 && ++idx[a - 1] == axes[a - 1].second.size()) idx[--a] = 0;
    if (a == 0) return;
  }
}

}  // namespace

double SigmaSpec::resolve(std::size_t n) const {
  double s = 0.0;
  switch (mode) {
    case Mode::absolute: s = value; break;
    case Mode::fraction: s = value * static_cast<double>(n); break;
    case Mode::b: s = sigma_from_b(n, value); break;
  }
  if (!(s > 0.0)) throw std::invalid_argument("sigma resolves to a non-positive value");
  return s;
}

json SigmaSpec::to_json() const {
  switch (mode) {
    case Mode::absolute: return {{"absolute", value}};
    case Mode::fraction: return {{"fraction", value}};
    case Mode::b: return {{"b", value}};
  }
  return {};
}

json DesignPoint::to_json() const {
  json j{{"kind", to_string(kind)}, {"d", d}, {"r", r}, {"sigma", sigma.to_json()}};
  if (n) j["n"] = n;
  if (kind == AllocationKind::single_choice) j["m"] = m;
  if (k) j["k"] = *k;
  if (!allocation_file.empty()) j["allocation_file"] = allocation_file;
  return j;
}

json ExperimentConfig::to_json() const {
  json pts = json::array();
  for (const auto& p : points) pts.push_back(p.to_json());
  return {{"points", pts}, {"trials", trials}, {"seed", master_seed}};
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("", "config must be a JSON object");
  ExperimentConfig cfg;
  for (const auto& [key, v] : j.items()) {
    if (is_point_field(key) || key == "points" || key == "trials" || key == "seed" || key == "threads" ||
        key == "outputs" || key == "limit_checks" || key == "$schema" || key == "description")
      continue;
    throw ConfigError("/" + key, "unknown field");
  }
  if (j.contains("trials")) cfg.trials = as_count(j["trials"], "/trials");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || (!j["seed"].is_number_unsigned() && j["seed"].get<long long>() < 0)) throw ConfigError("/seed", "expected a non-negative integer");
    cfg.master_seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("threads")) cfg.threads = as_count(j["threads"], "/threads", true);

  json defaults = json::object();
  for (const char* key : kPointFields)
    if (j.contains(key)) defaults[key] = j[key];
  if (j.contains("points")) {
    if (!j["points"].is_array()) throw ConfigError("/points", "expected an array");
    for (std::size_t i = 0; i < j["points"].size(); ++i) {
      const json& pj = j["points"][i];
      const std::string base = "/points/" + std::to_string(i);
      if (!pj.is_object()) throw ConfigError(base, "expected an object");
      json merged = defaults;
      for (const auto& [key, v] : pj.items()) {
        if (!is_point_field(key)) throw ConfigError(base + "/" + key, "unknown field");
        merged[key] = v;
      }
      expand_point(merged, base, cfg.points);
    }
  } else if (!defaults.empty()) {
    expand_point(defaults, "", cfg.points);
  }

  if (j.contains("outputs")) {
    if (!j["outputs"].is_array()) throw ConfigError("/outputs", "expected an array");
    for (std::size_t i = 0; i < j["outputs"].size(); ++i) {
      const json& o = j["outputs"][i];
      const std::string base = "/outputs/" + std::to_string(i);
      if (!o.is_object() || !o.contains("format") || !o.contains("path") || !o["format"].is_string() ||
          !o["path"].is_string())
        throw ConfigError(base, "expected {\"format\": \"csv\"|\"json\", \"path\": string}");
      OutputSpec spec{o["format"].get<std::string>(), o["path"].get<std::string>()};
      if (spec.format != "csv" && spec.format != "json") throw ConfigError(base + "/format", "expected csv or json");
      cfg.outputs.push_back(spec);
    }
  }

  if (j.contains("limit_checks")) {
    const json& lc = j["limit_checks"];
    if (!lc.is_object()) throw ConfigError("/limit_checks", "expected an object");
    auto list = [&](const char* key) -> const json* {
      if (!lc.contains(key)) return nullptr;
      if (!lc[key].is_array()) throw ConfigError(std::string("/limit_checks/") + key, "expected an array");
      return &lc[key];
    };
    auto num = [](const json& o, const char* key, const std::string& base, double& dst) {
      if (!o.contains(key)) return;
      if (!o[key].is_number()) throw ConfigError(base + "/" + key, "expected a number");
      dst = o[key].get<double>();
    };
    auto cnt = [](const json& o, const char* key, const std::string& base, std::size_t& dst) {
      if (o.contains(key)) dst = as_count(o[key], base + "/" + key);
    };
    if (const json* g = list("gumbel")) {
      cfg.limits.gumbel.clear();
      for (std::size_t i = 0; i < g->size(); ++i) {
        const std::string base = "/limit_checks/gumbel/" + std::to_string(i);
        GumbelCheckSpec s;
        cnt((*g)[i], "k", base, s.k);
        cnt((*g)[i], "d", base, s.d);
        cnt((*g)[i], "trials", base, s.trials);
        num((*g)[i], "threshold", base, s.threshold);
        if (s.d > s.k) throw ConfigError(base + "/d", "must not exceed k");
        cfg.limits.gumbel.push_back(s);
      }
    }
    if (const json* c = list("counts")) {
      cfg.limits.counts.clear();
      for (std::size_t i = 0; i < c->size(); ++i) {
        const std::string base = "/limit_checks/counts/" + std::to_string(i);
        CountCheckSpec s;
        std::size_t reg = 3;
        cnt((*c)[i], "regime", base, reg);
        if (reg < 1 || reg > 3) throw ConfigError(base + "/regime", "expected 1, 2 or 3");
        s.regime = static_cast<int>(reg);
        cnt((*c)[i], "k", base, s.k);
        cnt((*c)[i], "trials", base, s.trials);
        num((*c)[i], "alpha", base, s.alpha);
        num((*c)[i], "beta", base, s.beta);
        num((*c)[i], "rel_slack", base, s.rel_slack);
        if (s.alpha > s.beta) throw ConfigError(base + "/alpha", "must not exceed beta");
        cfg.limits.counts.push_back(s);
      }
    }
    if (const json* c = list("circular")) {
      cfg.limits.circular.clear();
      for (std::size_t i = 0; i < c->size(); ++i) {
        const std::string base = "/limit_checks/circular/" + std::to_string(i);
        CircularCheckSpec s;
        cnt((*c)[i], "k", base, s.k);
        cnt((*c)[i], "d", base, s.d);
        cnt((*c)[i], "trials", base, s.trials);
        if (s.d >= s.k) throw ConfigError(base + "/d", "must be below k");
        cfg.limits.circular.push_back(s);
      }
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path, std::string("parse error at byte ") + std::to_string(e.byte));
  }
  return parse_config(j);
}

Allocation build_allocation(const DesignPoint& p) {
  Allocation a;
  switch (p.kind) {
    case AllocationKind::single_choice: a = build_single_choice(p.n, p.m); break;
    case AllocationKind::clustering: a = build_clustering(p.n, p.d); break;
    case AllocationKind::cyclic: a = build_cyclic(p.n, p.d); break;
    case AllocationKind::block_design:
      a = build_block_design(p.d);
      if (p.n && p.n != a.n)
        throw std::invalid_argument("block design with d = " + std::to_string(p.d) + " has n = " + std::to_string(a.n));
      break;
    case AllocationKind::cyclic_xor: a = build_cyclic_xor(p.n, p.d, p.r); break;
    case AllocationKind::custom: a = load_allocation_file(p.allocation_file); break;
  }
  if (p.k && *p.k != a.k)
    throw std::invalid_argument("k = " + std::to_string(*p.k) + " but the design has k = " + std::to_string(a.k));
  return a;
}

ExperimentReport run_simulate(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.config = cfg;
  const RunOptions opt{cfg.threads};
  for (const auto& p : cfg.points) {
    const Allocation a = build_allocation(p);
    ResultRow row;
    row.point = p;
    row.n = a.n;
    row.k = a.k;
    row.sigma = p.sigma.resolve(a.n);
    const auto loads = simulate_max_loads(a, row.sigma, cfg.trials, cfg.master_seed, opt);
    row.p_sigma = summarize_stability(loads, cfg.master_seed);
    row.imbalance = summarize_imbalance(loads, a.n, row.sigma, cfg.master_seed);
    rep.rows.push_back(row);
  }
  return rep;
}

void write_csv(std::ostream& os, const ExperimentReport& rep) {
  os << "# dchoice " << kVersion << " config=" << rep.config.to_json().dump() << '\n';
  os << kCsvColumns << '\n';
  for (const auto& r : rep.rows) {
    os << to_string(r.point.kind) << ',' << r.n << ',' << r.k << ',' << r.point.d << ',' << r.point.r << ','
       << fmt(r.sigma) << ',' << r.p_sigma.trials << ',' << fmt(r.p_sigma.mean) << ',' << fmt(r.p_sigma.ci95_lo)
       << ',' << fmt(r.p_sigma.ci95_hi) << ',' << fmt(r.imbalance.mean) << ',' << fmt(r.imbalance.std_error) << ','
       << fmt(r.imbalance.q05) << ',' << fmt(r.imbalance.q50) << ',' << fmt(r.imbalance.q95) << ','
       << r.p_sigma.seed << '\n';
  }
}

json report_to_json(const ExperimentReport& rep, const std::string& timestamp) {
  json results = json::array();
  for (const auto& r : rep.rows) {
    results.push_back({{"point", r.point.to_json()},
                       {"n", r.n},
                       {"k", r.k},
                       {"sigma", r.sigma},
                       {"trials", r.p_sigma.trials},
                       {"seed", r.p_sigma.seed},
                       {"p_sigma",
                        {{"mean", r.p_sigma.mean},
                         {"stderr", r.p_sigma.std_error},
                         {"ci95_lo", r.p_sigma.ci95_lo},
                         {"ci95_hi", r.p_sigma.ci95_hi}}},
                       {"imbalance",
                        {{"mean", r.imbalance.mean},
                         {"stderr", r.imbalance.std_error},
                         {"ci95_lo", r.imbalance.ci95_lo},
                         {"ci95_hi", r.imbalance.ci95_hi},
                         {"q05", r.imbalance.q05},
                         {"q50", r.imbalance.q50},
                         {"q95", r.imbalance.q95}}}});
  }
  return {{"metadata", {{"tool", "dchoice"}, {"version", kVersion}, {"generated_at", timestamp}}},
          {"config", rep.config.to_json()},
          {"results", results}};
}

LimitCheckResult gumbel_limit_check(const GumbelCheckSpec& s, bool circle, std::uint64_t seed,
                                    const RunOptions& opt) {
  LimitCheckResult r;
  r.name = std::string("gumbel_") + (circle ? "circle" : "line") + " k=" + std::to_string(s.k) +
           " d=" + std::to_string(s.d);
  r.threshold = s.threshold;
  if (s.d >= s.k) {
    r.skipped = true;
    r.pass = true;
    r.note = "d = k: the statistic is the constant sigma, check skipped";
    return r;
  }
  const double kd = static_cast<double>(s.k);
  const double centre = std::log(kd) + (static_cast<double>(s.d) - 1.0) * std::log(std::log(kd)) -
                        std::lgamma(static_cast<double>(s.d));
  auto centred = parallel_map(
      s.trials,
      [&](std::size_t i) {
        RandomStream stream(seed, i);
        const auto sample = sample_uniform_spacings(s.k, 1.0, stream);
        const double M = circle ? max_d_spacing_circle(sample, s.d) : max_d_spacing_line(sample, s.d);
        return M * kd - centre;
      },
      opt);
  r.statistic = ks_distance(centred, gumbel_cdf);
  r.pass = r.statistic <= r.threshold;
  return r;
}

LimitCheckResult count_limit_check(const CountCheckSpec& s, std::uint64_t seed, const RunOptions& opt) {
  const double k = static_cast<double>(s.k);
  double lo = 0.0, hi = 0.0, expect = 0.0;
  switch (s.regime) {
    case 1:
      lo = s.alpha / k;
      hi = s.beta / k;
      expect = k * (std::exp(-s.alpha) - std::exp(-s.beta));
      break;
    case 2:
      lo = s.alpha / (k * k);
      hi = s.beta / (k * k);
      expect = s.beta - s.alpha;
      break;
    default:
      lo = (std::log(k) + s.alpha) / k;
      hi = (std::log(k) + s.beta) / k;
      expect = std::exp(-s.alpha) - std::exp(-s.beta);
      break;
  }
  if (lo < 0.0) throw std::invalid_argument("count check range starts below 0");
  auto counts = parallel_map(
      s.trials,
      [&](std::size_t i) {
        RandomStream stream(seed, i);
        const auto sample = sample_uniform_spacings(s.k, 1.0, stream);
        return static_cast<double>(count_spacings_in_range(sample, lo, hi));
      },
      opt);
  double mean = 0.0;
  for (double c : counts) mean += c;
  mean /= static_cast<double>(counts.size());
  double var = 0.0;
  for (double c : counts) var += (c - mean) * (c - mean);
  var /= std::max<double>(1.0, static_cast<double>(counts.size()) - 1.0);
  const double se = std::sqrt(var / static_cast<double>(counts.size()));
  LimitCheckResult r;
  r.name = "count_R" + std::to_string(s.regime) + " k=" + std::to_string(s.k) + " alpha=" + fmt(s.alpha) +
           " beta=" + fmt(s.beta);
  r.statistic = std::abs(mean - expect);
  r.threshold = 3.0 * se + s.rel_slack * expect;
  r.pass = r.statistic <= r.threshold;
  r.note = "mean " + fmt(mean) + ", variance " + fmt(var) + ", asymptotic mean " + fmt(expect);
  return r;
}

std::vector<LimitCheckResult> circular_limit_checks(const CircularCheckSpec& s, std::uint64_t seed,
                                                    const RunOptions& opt) {
  if (s.d >= s.k) throw std::invalid_argument("circular check needs d < k");
  // one pass stores line and circle maxima interleaved
  std::vector<double> line(s.trials), circ(s.trials);
  auto packed = parallel_map(
      2 * s.trials,
      [&](std::size_t j) {
        RandomStream stream(seed, j / 2);
        const auto sample = sample_uniform_spacings(s.k, 1.0, stream);
        return j % 2 ? max_d_spacing_circle(sample, s.d) : max_d_spacing_line(sample, s.d);
      },
      opt);
  for (std::size_t i = 0; i < s.trials; ++i) {
    line[i] = packed[2 * i];
    circ[i] = packed[2 * i + 1];
  }
  const double N = static_cast<double>(s.trials);
  const std::string tag = " k=" + std::to_string(s.k) + " d=" + std::to_string(s.d);
  std::vector<LimitCheckResult> out;
  std::size_t differ = 0;
  bool ordered = true;
  for (std::size_t i = 0; i < s.trials; ++i) {
    differ += circ[i] != line[i];
    ordered = ordered && circ[i] >= line[i];
  }
  const double pd = static_cast<double>(differ) / N;
  const double bound = static_cast<double>(s.d) / static_cast<double>(s.k);
  LimitCheckResult r1;
  r1.name = "circle_differs" + tag;
  r1.statistic = pd;
  r1.threshold = bound + 3.0 * std::sqrt(bound * (1.0 - bound) / N);
  r1.pass = ordered && pd <= r1.threshold;
  r1.note = ordered ? "" : "circle maximum below line maximum in some trial";
  out.push_back(r1);
  const double ratio = static_cast<double>(s.k) / static_cast<double>(s.k - s.d);
  for (double q : {0.5, 0.9}) {
    const double x = quantile(line, q);
    double pl = 0.0, pc = 0.0;
    for (std::size_t i = 0; i < s.trials; ++i) {
      pl += line[i] > x;
      pc += circ[i] > x;
    }
    pl /= N;
    pc /= N;
    const double se = std::sqrt(std::max(pc * (1.0 - pc), pl * (1.0 - pl)) / N);
    LimitCheckResult r;
    r.name = "tail_sandwich q=" + fmt(q) + tag;
    r.statistic = pc;
    r.threshold = ratio * pl + 3.0 * se;
    r.pass = pl <= pc && pc <= r.threshold;
    r.note = "P(M > x) = " + fmt(pl) + ", P(Mc > x) = " + fmt(pc);
    out.push_back(r);
  }
  return out;
}

std::vector<LimitCheckResult> run_limit_checks(const ExperimentConfig& cfg) {
  const RunOptions opt{cfg.threads};
  std::vector<LimitCheckResult> out;
  for (const auto& g : cfg.limits.gumbel) {
    out.push_back(gumbel_limit_check(g, false, cfg.master_seed, opt));
    out.push_back(gumbel_limit_check(g, true, cfg.master_seed, opt));
  }
  for (const auto& c : cfg.limits.counts) out.push_back(count_limit_check(c, cfg.master_seed, opt));
  for (const auto& c : cfg.limits.circular) {
    auto v = circular_limit_checks(c, cfg.master_seed, opt);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

json limit_checks_to_json(const std::vector<LimitCheckResult>& results) {
  json arr = json::array();
  for (const auto& r : results) {
    json j{{"name", r.name}, {"statistic", r.statistic}, {"threshold", r.threshold}, {"pass", r.pass}};
    if (r.skipped) j["skipped"] = true;
    if (!r.note.empty()) j["note"] = r.note;
    arr.push_back(j);
  }
  return arr;
}

json run_inspect(const Allocation& a) {
  json j;
  j["kind"] = to_string(a.kind);
  j["n"] = a.n;
  j["k"] = a.k;
  j["d"] = a.d;
  j["r"] = a.r;
  const auto violations = validate_regular_balanced(a);
  j["valid"] = violations.empty();
  j["violations"] = violations;
  if (!violations.empty()) return j;
  const auto m = to_matrices(a);
  j["matrix"] = {{"rows", m.n}, {"columns", m.columns()}};
  if (a.is_replica()) {
    j["overlap_sum"] = overlap_sum(a);
    j["expected_overlap_sum"] = (a.d - 1) * a.d * a.k;
    j["r_gap_radius"] = min_gap_radius(a);
  }
  const auto hall = hall_check(a);
  j["hall_check"] = {{"holds", hall.holds}, {"exhaustive", hall.exhaustive}, {"subsets_checked", hall.subsets_checked}};
  if (!hall.holds) j["hall_check"]["violating_set"] = hall.violating_set;
  json hist = json::object();
  for (const auto& [size, count] : pairwise_overlap_histogram(a)) hist[std::to_string(size)] = count;
  j["pairwise_overlap_histogram"] = hist;
  return j;
}

}  // namespace dchoice
