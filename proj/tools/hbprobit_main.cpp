// hbprobit: hierarchical Bayes multinomial probit estimation of household
// brand choice with a tangible/intangible brand value decomposition.
//
// Subcommands: estimate, simulate, recover, report. Exit codes: 0 ok,
// 2 validation failure, 3 sampler failure, 4 recovery threshold failure.

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <sstream>
#include <thread>

#include "hbprobit/artifacts.hpp"
#include "hbprobit/brand_value.hpp"
#include "hbprobit/gibbs.hpp"
#include "hbprobit/panel.hpp"
#include "hbprobit/posterior.hpp"
#include "hbprobit/synth.hpp"

namespace fs = std::filesystem;
using namespace hbprobit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitSampler = 3;
constexpr int kExitThreshold = 4;

struct ThresholdFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string one_line(std::string s) {
  for (auto& c : s) {
    if (c == '\n') c = ';';
  }
  return s;
}

int worker_count() {
  if (const char* env = std::getenv("HBPROBIT_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return hex64(fnv1a64(ss.str()));
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write file: " + path.string());
  out << content;
}

void write_manifest(const fs::path& dir, const std::string& command,
                    std::uint64_t seed, const nlohmann::ordered_json& config,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
  nlohmann::ordered_json j;
  j["format"] = "hbprobit-manifest";
  j["version"] = 1;
  j["tool_version"] = kToolVersion;
  j["command"] = command;
  j["seed"] = seed;
  j["config"] = config;
  j["config_hash"] = hex64(fnv1a64(config.dump()));
  nlohmann::ordered_json ins = nlohmann::ordered_json::array();
  for (const auto& p : inputs) {
    ins.push_back({{"path", p}, {"fnv1a64", file_hash(p)}});
  }
  j["inputs"] = std::move(ins);
  j["outputs"] = outputs;
  write_text_file(dir / "manifest.json", j.dump(1) + "\n");
}

std::string geweke_text(const std::vector<GewekeEntry>& entries) {
  std::string out = "Geweke convergence diagnostic (|z| < 3 expected under "
                    "stationarity)\n";
  char buf[128];
  for (const auto& g : entries) {
    if (g.available) {
      std::snprintf(buf, sizeof(buf), "chain %d  %-20s  z = %8.3f\n", g.chain,
                    g.param.c_str(), g.z);
    } else {
      std::snprintf(buf, sizeof(buf), "chain %d  %-20s  unavailable\n", g.chain,
                    g.param.c_str());
    }
    out += buf;
  }
  return out;
}

void write_reports(const fs::path& dir, const ChainSummary& summary,
                   const std::string& format, std::vector<std::string>& outputs) {
  const ReportFormat fmt =
      format == "csv" ? ReportFormat::csv : ReportFormat::text;
  const std::string ext = format == "csv" ? ".csv" : ".txt";
  const auto emit = [&](const std::string& stem, const std::vector<SummaryRow>& rows,
                        std::string_view heading) {
    write_text_file(dir / (stem + ext), render_report(rows, fmt, heading));
    outputs.push_back(stem + ext);
  };
  emit("report_market_response", summary.market_response_rows,
       format == "csv" ? std::string_view{} : "Market Response Parameter");
  emit("report_attributes", summary.attribute_rows, {});
  emit("intercept_contrasts", summary.contrast_rows, {});
  write_text_file(dir / "diagnostics.txt", geweke_text(summary.geweke));
  outputs.push_back("diagnostics.txt");
}

struct EstimateArgs {
  std::string panel_path;
  std::string attrs_path;
  std::string out_dir = "hbprobit_out";
  McmcConfig mcmc;
  int n_chains = 1;
  std::string format = "text";
  int checkpoint_every = 0;
  bool quiet = false;
};

nlohmann::ordered_json estimate_config_json(const EstimateArgs& a) {
  return {{"panel", a.panel_path},        {"attrs", a.attrs_path},
          {"iters", a.mcmc.n_iterations}, {"burn", a.mcmc.n_burn_in},
          {"thin", a.mcmc.thin},          {"seed", a.mcmc.rng_seed},
          {"chains", a.n_chains},         {"hpd_level", a.mcmc.hpd_level},
          {"format", a.format},           {"checkpoint_every", a.checkpoint_every}};
}

int cmd_estimate(const EstimateArgs& args) {
  const PanelDataset data = read_panel_csv(args.panel_path);
  const BrandAttributeMatrix attrs = read_attributes_csv(args.attrs_path);

  {
    auto issues = validate_panel(data, attrs);
    const auto cfg_issues = args.mcmc.validate();
    issues.insert(issues.end(), cfg_issues.begin(), cfg_issues.end());
    if (args.n_chains < 1) issues.push_back("chains must be >= 1");
    if (!issues.empty()) {
      std::string msg;
      for (const auto& s : issues) msg += (msg.empty() ? "" : "; ") + s;
      throw std::invalid_argument(msg);
    }
  }

  const fs::path dir(args.out_dir);
  fs::create_directories(dir);

  const PriorConfig priors = PriorConfig::defaults(attrs.n_attributes());
  const int workers = worker_count();
  const int concurrent = std::min(args.n_chains, workers);
  const int threads_per_chain = std::max(1, workers / concurrent);

  std::vector<ChainDraws> chains(args.n_chains);
  std::vector<std::exception_ptr> errors(args.n_chains);
  std::atomic<int> next{0};
  std::mutex log_mutex;

  const auto run_one = [&](int c) {
    McmcConfig cfg = args.mcmc;
    if (args.checkpoint_every > 0) {
      cfg.checkpoint_every = args.checkpoint_every;
      cfg.checkpoint_path =
          (dir / ("checkpoint_chain" + std::to_string(c) + ".json")).string();
    }
    RunHooks hooks;
    if (!args.quiet) {
      hooks.progress = [&, c](int iter, double ssr) {
        std::lock_guard<std::mutex> lock(log_mutex);
        std::fprintf(stderr, "[chain %d] iteration %d/%d ssr %.6f\n", c, iter,
                     cfg.n_iterations, ssr);
      };
      hooks.warning = [&, c](const std::string& msg) {
        std::lock_guard<std::mutex> lock(log_mutex);
        std::fprintf(stderr, "[chain %d] warning: %s\n", c, msg.c_str());
      };
    }
    // Seed-splitting rule: chain c draws from root(seed).child(c).
    chains[c] = run_chain(data, attrs, priors, cfg,
                          RngKey::root(cfg.rng_seed).child(c),
                          EngineOptions{threads_per_chain}, hooks);
  };
  const auto worker = [&] {
    for (int c = next.fetch_add(1); c < args.n_chains; c = next.fetch_add(1)) {
      try {
        run_one(c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < concurrent; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }

  const ChainSummary summary = summarize_chains(chains, data, attrs);
  const ChainDraws merged = merge_chains(std::move(chains));
  const BrandValueDecomposition decomp = decompose_chain(merged, attrs);

  std::vector<std::string> outputs = {"chain_summary.json", "decomposition.csv",
                                      "household_map.csv"};
  write_chain_summary((dir / "chain_summary.json").string(), summary);
  write_decomposition_csv((dir / "decomposition.csv").string(), decomp,
                          data.household_ids());
  write_household_map_csv((dir / "household_map.csv").string(), data);
  write_reports(dir, summary, args.format, outputs);
  outputs.push_back("manifest.json");
  write_manifest(dir, "estimate", args.mcmc.rng_seed, estimate_config_json(args),
                 {args.panel_path, args.attrs_path}, outputs);

  if (!args.quiet) {
    std::printf("estimate: %d chain(s), %d draws, %d households, %d brands\n",
                args.n_chains, summary.n_draws, summary.n_households,
                summary.n_brands);
    for (const auto& name : outputs) {
      std::printf("wrote %s\n", (dir / name).string().c_str());
    }
  }
  return kExitOk;
}

struct SimulateArgs {
  std::string out_dir = "hbprobit_sim";
  std::uint64_t seed = 1;
  int households = 98;
  int brands = 6;
  int occasions = 40;
  std::string attrs_path;  // optional override of the built-in attributes
  double display_mean = 1.523;
  double price_mean = -4.331;
  std::vector<double> delta_mean;  // optional override, length R
  double het_sd = 0.5;
  double price_jitter = 0.35;
  double display_prob = 0.3;
};

int cmd_simulate(const SimulateArgs& args) {
  GeneratorSpec spec = GeneratorSpec::defaults();
  spec.seed = args.seed;
  spec.n_households = args.households;
  spec.n_occasions = args.occasions;
  spec.price_jitter = args.price_jitter;
  if (!args.attrs_path.empty()) {
    spec.attributes = read_attributes_csv(args.attrs_path);
    spec.n_brands = spec.attributes.n_brands();
  } else if (args.brands != 6) {
    throw std::invalid_argument(
        "brands != 6 requires --attrs with one row per brand");
  }
  const int j_count = spec.n_brands;
  const int r_count = spec.attributes.n_attributes();
  if (args.brands != j_count) {
    throw std::invalid_argument("brand count differs from attribute rows");
  }
  spec.truth.beta_mean << args.display_mean, args.price_mean;
  spec.truth.beta_cov = args.het_sd * args.het_sd * Eigen::Matrix2d::Identity();
  if (!args.delta_mean.empty()) {
    if (static_cast<int>(args.delta_mean.size()) != r_count) {
      throw std::invalid_argument("delta-mean needs " + std::to_string(r_count) +
                                  " values");
    }
    spec.truth.delta_mean = Eigen::Map<const Eigen::VectorXd>(
        args.delta_mean.data(), static_cast<Eigen::Index>(r_count));
  } else if (r_count != spec.truth.delta_mean.size()) {
    spec.truth.delta_mean = Eigen::VectorXd::Zero(r_count);
  }
  spec.truth.delta_cov =
      args.het_sd * args.het_sd * Eigen::MatrixXd::Identity(r_count, r_count);
  spec.truth.intangible_var = args.het_sd * args.het_sd;
  if (spec.price_levels.size() != j_count) {
    spec.price_levels = Eigen::VectorXd::LinSpaced(j_count, 275.0, 341.0);
  }
  spec.display_prob = Eigen::VectorXd::Constant(j_count, args.display_prob);

  const GeneratedPanel generated = generate_panel(spec, RngKey::root(spec.seed));

  const fs::path dir(args.out_dir);
  fs::create_directories(dir);
  write_panel_csv((dir / "panel.csv").string(), generated.panel);
  write_attributes_csv((dir / "attributes.csv").string(), spec.attributes);
  write_truth_json((dir / "truth.json").string(), generated.truth);
  write_household_map_csv((dir / "household_map.csv").string(), generated.panel);

  const nlohmann::ordered_json config = {
      {"seed", args.seed},
      {"households", args.households},
      {"brands", j_count},
      {"occasions", args.occasions},
      {"display_mean", args.display_mean},
      {"price_mean", args.price_mean},
      {"het_sd", args.het_sd},
      {"price_jitter", args.price_jitter},
      {"display_prob", args.display_prob}};
  std::vector<std::string> inputs;
  if (!args.attrs_path.empty()) inputs.push_back(args.attrs_path);
  write_manifest(dir, "simulate", args.seed, config, inputs,
                 {"panel.csv", "attributes.csv", "truth.json",
                  "household_map.csv", "manifest.json"});

  std::printf("simulate: %d households x %d occasions, %d brands\n",
              args.households, args.occasions, j_count);
  if (generated.tie_count > 0) {
    std::printf("note: %d utility ties broken to the lowest brand index\n",
                generated.tie_count);
  }
  std::printf("wrote %s\n", (dir / "panel.csv").string().c_str());
  std::printf("wrote %s\n", (dir / "truth.json").string().c_str());
  return kExitOk;
}

struct RecoverArgs {
  std::string truth_path;
  std::string chain_path;
  std::string out_path = "recovery_metrics.json";
  double hpd_level = 0.95;
  RecoveryThresholds thresholds;
};

int cmd_recover(const RecoverArgs& args) {
  const PanelTruth truth = read_truth_json(args.truth_path);
  const ChainSummary summary = read_chain_summary(args.chain_path);
  const RecoveryMetrics metrics =
      recovery_score(truth, summary.evidence, args.hpd_level);
  const auto checks = evaluate_thresholds(metrics, args.thresholds);
  write_metrics_json(args.out_path, metrics, checks);

  bool all_pass = true;
  for (const auto& c : checks) {
    std::printf("%s %s: value %.4f vs limit %.4f\n", c.pass ? "PASS" : "FAIL",
                c.name.c_str(), c.value, c.limit);
    all_pass = all_pass && c.pass;
  }
  std::printf("wrote %s\n", args.out_path.c_str());
  if (!all_pass) {
    throw ThresholdFailure("recovery thresholds violated, see " + args.out_path);
  }
  return kExitOk;
}

struct ReportArgs {
  std::string chain_path;
  std::string out_dir = "hbprobit_report";
  std::string format = "text";
};

int cmd_report(const ReportArgs& args) {
  const ChainSummary summary = read_chain_summary(args.chain_path);
  const fs::path dir(args.out_dir);
  fs::create_directories(dir);
  std::vector<std::string> outputs;
  write_reports(dir, summary, args.format, outputs);
  for (const auto& name : outputs) {
    std::printf("wrote %s\n", (dir / name).string().c_str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical Bayes multinomial probit for household brand "
               "choice, with tangible/intangible brand value decomposition"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Key-value config file; command-line flags win");

  EstimateArgs est;
  CLI::App* estimate = app.add_subcommand(
      "estimate", "Run the Gibbs sampler on a purchase panel");
  estimate->add_option("--panel", est.panel_path, "Panel CSV file")->required();
  estimate->add_option("--attrs", est.attrs_path, "Brand attribute CSV file")
      ->required();
  estimate->add_option("--out", est.out_dir, "Output directory");
  estimate->add_option("--iters", est.mcmc.n_iterations, "Total iterations");
  estimate->add_option("--burn", est.mcmc.n_burn_in, "Burn-in iterations");
  estimate->add_option("--thin", est.mcmc.thin, "Thinning interval");
  estimate->add_option("--seed", est.mcmc.rng_seed, "RNG seed");
  estimate->add_option("--chains", est.n_chains, "Number of chains");
  estimate->add_option("--hpd-level", est.mcmc.hpd_level, "HPD level in (0,1)");
  estimate->add_option("--format", est.format, "Report format")
      ->check(CLI::IsMember({"text", "csv"}));
  estimate->add_option("--checkpoint-every", est.checkpoint_every,
                       "Write a sampler checkpoint every N iterations");
  estimate->add_flag("--quiet", est.quiet, "Suppress progress output");

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Generate a synthetic panel with known ground truth");
  simulate->add_option("--out", sim.out_dir, "Output directory");
  simulate->add_option("--seed", sim.seed, "RNG seed");
  simulate->add_option("--households", sim.households, "Number of households");
  simulate->add_option("--brands", sim.brands, "Number of brands");
  simulate->add_option("--occasions", sim.occasions, "Occasions per household");
  simulate->add_option("--attrs", sim.attrs_path,
                       "Attribute CSV overriding the built-in synthetic rows");
  simulate->add_option("--display-mean", sim.display_mean,
                       "True population display coefficient");
  simulate->add_option("--price-mean", sim.price_mean,
                       "True population price coefficient");
  simulate->add_option("--delta-mean", sim.delta_mean,
                       "True engineering-parameter means (R values)");
  simulate->add_option("--het-sd", sim.het_sd, "Heterogeneity sd");
  simulate->add_option("--price-jitter", sim.price_jitter,
                       "Relative price jitter half-width");
  simulate->add_option("--display-prob", sim.display_prob,
                       "Display probability per brand");

  RecoverArgs rec;
  CLI::App* recover = app.add_subcommand(
      "recover", "Score a chain against generator ground truth");
  recover->add_option("--truth", rec.truth_path, "truth.json from simulate")
      ->required();
  recover->add_option("--chain", rec.chain_path, "chain_summary.json from estimate")
      ->required();
  recover->add_option("--out", rec.out_path, "Metrics output path");
  recover->add_option("--hpd-level", rec.hpd_level, "Credible interval level");
  recover->add_option("--max-mean-error", rec.thresholds.max_mean_abs_error,
                      "Max abs error for display/price population means");
  recover->add_option("--min-price-neg-share",
                      rec.thresholds.min_price_negative_share,
                      "Min share of households with negative price mean");
  recover->add_option("--min-coverage", rec.thresholds.min_coverage,
                      "Min tracked parameters covered by credible intervals");

  ReportArgs rep;
  CLI::App* report = app.add_subcommand(
      "report", "Re-render reports from a stored chain summary");
  report->add_option("--chain", rep.chain_path, "chain_summary.json")->required();
  report->add_option("--out", rep.out_dir, "Output directory");
  report->add_option("--format", rep.format, "Report format")
      ->check(CLI::IsMember({"text", "csv"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (estimate->parsed()) return cmd_estimate(est);
    if (simulate->parsed()) return cmd_simulate(sim);
    if (recover->parsed()) return cmd_recover(rec);
    if (report->parsed()) return cmd_report(rep);
  } catch (const ThresholdFailure& e) {
    std::fprintf(stderr, "error: threshold: %s\n", one_line(e.what()).c_str());
    return kExitThreshold;
  } catch (const SamplerError& e) {
    std::fprintf(stderr, "error: sampler: %s\n", one_line(e.what()).c_str());
    return kExitSampler;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: validation: %s\n", one_line(e.what()).c_str());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: internal: %s\n", one_line(e.what()).c_str());
    return kExitSampler;
  }
  return kExitOk;
}
