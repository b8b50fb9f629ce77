// dchoice: simulate load balancing of d-choice storage allocations.

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "dchoice/allocation_io.hpp"
#include "dchoice/errors.hpp"
#include "dchoice/exact_k3.hpp"
#include "dchoice/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Writes `text` to path, or stdout for "-" / empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw dchoice::InputError(path + ": cannot open for writing");
  out << text;
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> threads;
  std::string out;
  std::string format;
};

void add_common(CLI::App* app, Common& c, bool config_required) {
  auto* opt = app->add_option("--config", c.config, "JSON experiment config")->check(CLI::ExistingFile);
  if (config_required) opt->required();
  app->add_option("--seed", c.seed, "master seed (overrides config)");
  app->add_option("--trials", c.trials, "trials per point (overrides config)")->check(CLI::PositiveNumber);
  app->add_option("--threads", c.threads, "worker threads, 0 = all cores");
  app->add_option("--out", c.out, "output path, - for stdout (overrides config outputs)");
  app->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

dchoice::ExperimentConfig resolve(const Common& c, const char* default_format) {
  dchoice::ExperimentConfig cfg = c.config.empty() ? dchoice::ExperimentConfig{} : dchoice::load_config(c.config);
  if (c.seed) cfg.master_seed = *c.seed;
  if (c.trials) cfg.trials = *c.trials;
  if (c.threads) cfg.threads = *c.threads;
  if (!c.out.empty() || !c.format.empty() || cfg.outputs.empty()) {
    cfg.outputs = {{c.format.empty() ? default_format : c.format, c.out.empty() ? "-" : c.out}};
  }
  return cfg;
}

struct DesignFlags {
  std::string allocation;
  std::string kind = "cyclic";
  std::size_t n = 3;
  std::size_t d = 2;
  std::size_t r = 1;
  std::size_t m = 1;
};

void add_design(CLI::App* app, DesignFlags& f) {
  app->add_option("--allocation", f.allocation, "allocation JSON file")->check(CLI::ExistingFile);
  app->add_option("--kind", f.kind, "single_choice|clustering|cyclic|block_design|cyclic_xor");
  app->add_option("--n", f.n, "nodes");
  app->add_option("--d", f.d, "choices per object");
  app->add_option("--r", f.r, "XOR order");
  app->add_option("--m", f.m, "objects per node (single_choice)");
}

dchoice::Allocation design_from(const DesignFlags& f) {
  if (!f.allocation.empty()) return dchoice::load_allocation_file(f.allocation);
  dchoice::DesignPoint p;
  p.kind = dchoice::parse_allocation_kind(f.kind);
  p.n = p.kind == dchoice::AllocationKind::block_design ? 0 : f.n;
  p.d = f.d;
  p.r = f.r;
  p.m = f.m;
  return dchoice::build_allocation(p);
}

std::string limit_csv(const std::vector<dchoice::LimitCheckResult>& rs) {
  std::ostringstream os;
  os << "name,statistic,threshold,pass,skipped,note\n";
  for (const auto& r : rs) {
    char buf[80];
    std::snprintf(buf, sizeof buf, "%.12g,%.12g", r.statistic, r.threshold);
    os << r.name << ',' << buf << ',' << (r.pass ? "true" : "false") << ',' << (r.skipped ? "true" : "false") << ",\""
       << r.note << "\"\n";
  }
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Load balancing of redundant d-choice storage allocations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", dchoice::kVersion);

  Common sim, lim;
  auto* simulate = app.add_subcommand("simulate", "estimate P_Sigma and the imbalance factor per config point");
  add_common(simulate, sim, true);

  auto* limits = app.add_subcommand("limit-checks", "statistical checks of the spacing limit laws");
  add_common(limits, lim, false);

  DesignFlags ins_flags;
  std::string ins_format = "json", matrix_csv;
  auto* inspect = app.add_subcommand("inspect", "validate and summarise an allocation");
  add_design(inspect, ins_flags);
  inspect->add_option("--format", ins_format, "json or text")->check(CLI::IsMember({"json", "text"}));
  inspect->add_option("--matrix-csv", matrix_csv, "also write the routing matrix M as CSV");

  DesignFlags k3_flags;
  double k3_sigma = 3.0;
  auto* exact = app.add_subcommand("exact-k3", "exact P_Sigma for three objects on three nodes");
  add_design(exact, k3_flags);
  exact->add_option("--sigma", k3_sigma, "cumulative load")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*simulate) {
      const auto cfg = resolve(sim, "csv");
      const auto rep = dchoice::run_simulate(cfg);
      for (const auto& o : cfg.outputs) {
        if (o.format == "csv") {
          std::ostringstream os;
          dchoice::write_csv(os, rep);
          emit(o.path, os.str());
        } else {
          emit(o.path, dchoice::report_to_json(rep, utc_timestamp()).dump(2) + "\n");
        }
      }
    } else if (*limits) {
      auto cfg = resolve(lim, "csv");
      if (lim.trials) {
        for (auto& g : cfg.limits.gumbel) g.trials = *lim.trials;
        for (auto& c : cfg.limits.counts) c.trials = *lim.trials;
        for (auto& c : cfg.limits.circular) c.trials = *lim.trials;
      }
      const auto results = dchoice::run_limit_checks(cfg);
      for (const auto& o : cfg.outputs) {
        if (o.format == "csv") {
          emit(o.path, limit_csv(results));
        } else {
          nlohmann::json j{{"metadata", {{"tool", "dchoice"}, {"version", dchoice::kVersion}, {"generated_at", utc_timestamp()}}},
                           {"seed", cfg.master_seed},
                           {"checks", dchoice::limit_checks_to_json(results)}};
          emit(o.path, j.dump(2) + "\n");
        }
      }
    } else if (*inspect) {
      const auto a = design_from(ins_flags);
      const auto summary = dchoice::run_inspect(a);
      if (ins_format == "json") {
        std::cout << summary.dump(2) << "\n";
      } else {
        for (const auto& [key, v] : summary.items()) std::cout << key << ": " << v.dump() << "\n";
      }
      if (!matrix_csv.empty()) {
        std::ostringstream os;
        dchoice::write_matrix_csv(os, dchoice::to_matrices(a));
        emit(matrix_csv, os.str());
      }
    } else if (*exact) {
      const auto a = design_from(k3_flags);
      const auto reg = dchoice::exact_region_k3(a, k3_sigma);
      nlohmann::json j{{"sigma", k3_sigma}, {"p_sigma", reg.p_sigma}, {"vertices", reg.polygon}};
      std::cout << j.dump(2) << "\n";
    }
  } catch (const dchoice::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const dchoice::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return 0;
}
