#include "hbprobit/artifacts.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json_util.hpp"

namespace hbprobit {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json rows_json(const std::vector<SummaryRow>& rows) {
  ordered_json out = ordered_json::array();
  for (const auto& r : rows) {
    out.push_back({{"label", r.label},
                   {"posterior_mean", r.posterior_mean},
                   {"sd", r.sd},
                   {"hpd", r.hpd_count},
                   {"pos", r.pos_count},
                   {"neg", r.neg_count}});
  }
  return out;
}

std::vector<SummaryRow> rows_from_json(const json& j) {
  std::vector<SummaryRow> rows;
  for (const auto& r : j) {
    SummaryRow row;
    row.label = r.at("label").get<std::string>();
    row.posterior_mean = r.at("posterior_mean").get<double>();
    row.sd = r.at("sd").get<double>();
    row.hpd_count = r.at("hpd").get<int>();
    row.pos_count = r.at("pos").get<int>();
    row.neg_count = r.at("neg").get<int>();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> doubles_from_json(const json& j) {
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(v.get<double>());
  return out;
}

}  // namespace

ChainDraws merge_chains(std::vector<ChainDraws> chains) {
  if (chains.empty()) throw std::invalid_argument("merge_chains: no chains");
  ChainDraws merged = std::move(chains.front());
  for (std::size_t c = 1; c < chains.size(); ++c) {
    if (chains[c].n_households != merged.n_households ||
        chains[c].n_brands != merged.n_brands ||
        chains[c].n_attributes != merged.n_attributes) {
      throw std::invalid_argument("merge_chains: chain dimensions differ");
    }
    for (auto& snap : chains[c].draws) merged.draws.push_back(std::move(snap));
  }
  return merged;
}

ChainSummary summarize_chains(const std::vector<ChainDraws>& chains,
                              const PanelDataset& data,
                              const BrandAttributeMatrix& attrs) {
  if (chains.empty()) throw std::invalid_argument("summarize_chains: no chains");

  std::vector<ChainDraws> copy = chains;
  ChainDraws merged = merge_chains(std::move(copy));
  if (attrs.n_brands() != merged.n_brands ||
      attrs.n_attributes() != merged.n_attributes ||
      data.n_households() != merged.n_households) {
    throw std::invalid_argument("summarize_chains: data/chain dimension mismatch");
  }

  ChainSummary s;
  s.config = chains.front().config;
  s.n_chains = static_cast<int>(chains.size());
  s.n_households = merged.n_households;
  s.n_brands = merged.n_brands;
  s.n_attributes = merged.n_attributes;
  s.n_draws = static_cast<int>(merged.draws.size());
  s.collinearity_warnings = chains.front().collinearity_warnings;
  s.household_ids = data.household_ids();

  const double level = s.config.hpd_level;
  s.market_response_rows =
      significance_table(merged, market_response_selectors(merged.n_brands), level);
  s.attribute_rows =
      significance_table(merged, attribute_selectors(merged.n_attributes), level);
  s.contrast_rows = significance_table(
      merged, intercept_contrast_selectors(merged.n_brands), level);

  s.evidence = extract_evidence(merged);

  s.household_beta_lo.resize(s.n_households, 2);
  s.household_beta_hi.resize(s.n_households, 2);
  std::vector<double> series(merged.draws.size());
  for (int h = 0; h < s.n_households; ++h) {
    for (int k = 0; k < 2; ++k) {
      for (std::size_t d = 0; d < merged.draws.size(); ++d) {
        series[d] = merged.draws[d].beta(h, k);
      }
      const auto [lo, hi] = hpd_interval(series, level);
      s.household_beta_lo(h, k) = lo;
      s.household_beta_hi(h, k) = hi;
    }
  }

  // Per-chain convergence diagnostics on the tracked population series.
  for (std::size_t c = 0; c < chains.size(); ++c) {
    const ChainEvidence ev = extract_evidence(chains[c]);
    const auto add = [&](const std::string& name, const std::vector<double>& x) {
      GewekeEntry entry;
      entry.param = name;
      entry.chain = static_cast<int>(c);
      try {
        entry.z = geweke_z(x);
      } catch (const std::exception&) {
        entry.available = false;
      }
      s.geweke.push_back(std::move(entry));
    };
    add("beta_mean:display", ev.display_mean_draws);
    add("beta_mean:price", ev.price_mean_draws);
    std::vector<double> col(ev.delta_mean_draws.rows());
    for (int r = 0; r < s.n_attributes; ++r) {
      for (Eigen::Index d = 0; d < ev.delta_mean_draws.rows(); ++d) {
        col[d] = ev.delta_mean_draws(d, r);
      }
      add("delta_mean:" + std::to_string(r), col);
    }
    for (int r = 0; r < s.n_attributes; ++r) {
      for (Eigen::Index d = 0; d < ev.delta_sd_draws.rows(); ++d) {
        col[d] = ev.delta_sd_draws(d, r);
      }
      add("delta_sd:" + std::to_string(r), col);
    }
    for (int k = 0; k < 2; ++k) {
      for (Eigen::Index d = 0; d < ev.beta_sd_draws.rows(); ++d) {
        col[d] = ev.beta_sd_draws(d, k);
      }
      add(std::string("beta_sd:") + (k == 0 ? "display" : "price"), col);
    }
    add("sigma_phi", ev.sigma_phi_draws);
  }
  return s;
}

void write_chain_summary(const std::string& path, const ChainSummary& s) {
  ordered_json j;
  j["format"] = "hbprobit-chain-summary";
  j["version"] = 1;
  j["tool_version"] = s.tool_version;
  j["config"] = {{"n_iterations", s.config.n_iterations},
                 {"n_burn_in", s.config.n_burn_in},
                 {"thin", s.config.thin},
                 {"rng_seed", s.config.rng_seed},
                 {"hpd_level", s.config.hpd_level},
                 {"n_chains", s.n_chains}};
  j["dims"] = {{"households", s.n_households},
               {"brands", s.n_brands},
               {"attributes", s.n_attributes},
               {"draws", s.n_draws}};
  j["collinearity_warnings"] = s.collinearity_warnings;
  j["household_ids"] = s.household_ids;
  j["market_response_rows"] = rows_json(s.market_response_rows);
  j["attribute_rows"] = rows_json(s.attribute_rows);
  j["contrast_rows"] = rows_json(s.contrast_rows);

  ordered_json pop;
  pop["display_mean"] = s.evidence.display_mean_draws;
  pop["price_mean"] = s.evidence.price_mean_draws;
  pop["delta_mean"] = detail::matrix_json(s.evidence.delta_mean_draws);
  pop["delta_sd"] = detail::matrix_json(s.evidence.delta_sd_draws);
  pop["beta_sd"] = detail::matrix_json(s.evidence.beta_sd_draws);
  pop["sigma_phi"] = s.evidence.sigma_phi_draws;
  j["population_draws"] = std::move(pop);

  ordered_json hh;
  hh["beta_mean"] = detail::matrix_json(s.evidence.household_beta_mean);
  hh["beta_hpd_lo"] = detail::matrix_json(s.household_beta_lo);
  hh["beta_hpd_hi"] = detail::matrix_json(s.household_beta_hi);
  hh["alpha_mean"] = detail::matrix_json(s.evidence.household_alpha_mean);
  hh["delta_mean"] = detail::matrix_json(s.evidence.household_delta_mean);
  j["household_posterior"] = std::move(hh);

  ordered_json gw = ordered_json::array();
  for (const auto& g : s.geweke) {
    gw.push_back({{"param", g.param},
                  {"chain", g.chain},
                  {"z", g.z},
                  {"available", g.available}});
  }
  j["geweke"] = std::move(gw);

  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << j.dump(1) << "\n";
}

ChainSummary read_chain_summary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  json j;
  in >> j;
  if (j.value("format", "") != "hbprobit-chain-summary") {
    throw std::invalid_argument("not a chain summary file: " + path);
  }

  ChainSummary s;
  s.tool_version = j.value("tool_version", "");
  const auto& cfg = j.at("config");
  s.config.n_iterations = cfg.at("n_iterations").get<int>();
  s.config.n_burn_in = cfg.at("n_burn_in").get<int>();
  s.config.thin = cfg.at("thin").get<int>();
  s.config.rng_seed = cfg.at("rng_seed").get<std::uint64_t>();
  s.config.hpd_level = cfg.at("hpd_level").get<double>();
  s.n_chains = cfg.at("n_chains").get<int>();
  const auto& dims = j.at("dims");
  s.n_households = dims.at("households").get<int>();
  s.n_brands = dims.at("brands").get<int>();
  s.n_attributes = dims.at("attributes").get<int>();
  s.n_draws = dims.at("draws").get<int>();
  s.collinearity_warnings = j.at("collinearity_warnings").get<int>();
  s.household_ids = j.at("household_ids").get<std::vector<std::string>>();
  s.market_response_rows = rows_from_json(j.at("market_response_rows"));
  s.attribute_rows = rows_from_json(j.at("attribute_rows"));
  s.contrast_rows = rows_from_json(j.at("contrast_rows"));

  const auto& pop = j.at("population_draws");
  s.evidence.n_households = s.n_households;
  s.evidence.n_brands = s.n_brands;
  s.evidence.n_attributes = s.n_attributes;
  s.evidence.display_mean_draws = doubles_from_json(pop.at("display_mean"));
  s.evidence.price_mean_draws = doubles_from_json(pop.at("price_mean"));
  s.evidence.delta_mean_draws = detail::matrix_from_json(pop.at("delta_mean"));
  s.evidence.delta_sd_draws = detail::matrix_from_json(pop.at("delta_sd"));
  s.evidence.beta_sd_draws = detail::matrix_from_json(pop.at("beta_sd"));
  s.evidence.sigma_phi_draws = doubles_from_json(pop.at("sigma_phi"));

  const auto& hh = j.at("household_posterior");
  s.evidence.household_beta_mean = detail::matrix_from_json(hh.at("beta_mean"));
  s.household_beta_lo = detail::matrix_from_json(hh.at("beta_hpd_lo"));
  s.household_beta_hi = detail::matrix_from_json(hh.at("beta_hpd_hi"));
  s.evidence.household_alpha_mean = detail::matrix_from_json(hh.at("alpha_mean"));
  s.evidence.household_delta_mean = detail::matrix_from_json(hh.at("delta_mean"));

  for (const auto& g : j.at("geweke")) {
    GewekeEntry entry;
    entry.param = g.at("param").get<std::string>();
    entry.chain = g.at("chain").get<int>();
    entry.z = g.at("z").get<double>();
    entry.available = g.at("available").get<bool>();
    s.geweke.push_back(std::move(entry));
  }
  return s;
}

void write_truth_json(const std::string& path, const PanelTruth& truth) {
  ordered_json j;
  j["format"] = "hbprobit-truth";
  j["version"] = 1;
  j["population"] = {{"beta_mean", detail::vector_json(truth.pop.beta_mean)},
                     {"beta_cov", detail::matrix_json(truth.pop.beta_cov)},
                     {"delta_mean", detail::vector_json(truth.pop.delta_mean)},
                     {"delta_cov", detail::matrix_json(truth.pop.delta_cov)},
                     {"intangible_var", truth.pop.intangible_var}};
  j["household"] = {{"alpha", detail::matrix_json(truth.alpha)},
                    {"beta", detail::matrix_json(truth.beta)},
                    {"delta", detail::matrix_json(truth.delta)},
                    {"intangible", detail::matrix_json(truth.intangible)}};
  j["attributes"] = detail::matrix_json(truth.attributes.values);
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << j.dump(1) << "\n";
}

PanelTruth read_truth_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  json j;
  in >> j;
  if (j.value("format", "") != "hbprobit-truth") {
    throw std::invalid_argument("not a truth file: " + path);
  }
  PanelTruth t;
  const auto& pop = j.at("population");
  t.pop.beta_mean = detail::vector_from_json(pop.at("beta_mean"));
  t.pop.beta_cov = detail::matrix_from_json(pop.at("beta_cov"));
  t.pop.delta_mean = detail::vector_from_json(pop.at("delta_mean"));
  t.pop.delta_cov = detail::matrix_from_json(pop.at("delta_cov"));
  t.pop.intangible_var = pop.at("intangible_var").get<double>();
  const auto& hh = j.at("household");
  t.alpha = detail::matrix_from_json(hh.at("alpha"));
  t.beta = detail::matrix_from_json(hh.at("beta"));
  t.delta = detail::matrix_from_json(hh.at("delta"));
  t.intangible = detail::matrix_from_json(hh.at("intangible"));
  t.attributes.values = detail::matrix_from_json(j.at("attributes"));
  return t;
}

std::vector<ThresholdCheck> evaluate_thresholds(const RecoveryMetrics& metrics,
                                                const RecoveryThresholds& thresholds) {
  std::vector<ThresholdCheck> checks;
  const auto find = [&](const std::string& name) -> const ParamRecovery& {
    for (const auto& p : metrics.tracked) {
      if (p.name == name) return p;
    }
    throw std::invalid_argument("tracked parameter missing: " + name);
  };
  const auto& display = find("beta_mean:display");
  const auto& price = find("beta_mean:price");
  checks.push_back({"display_mean_abs_error", display.abs_error,
                    thresholds.max_mean_abs_error,
                    display.abs_error <= thresholds.max_mean_abs_error});
  checks.push_back({"price_mean_abs_error", price.abs_error,
                    thresholds.max_mean_abs_error,
                    price.abs_error <= thresholds.max_mean_abs_error});
  checks.push_back({"price_negative_share", metrics.price_negative_share,
                    thresholds.min_price_negative_share,
                    metrics.price_negative_share >=
                        thresholds.min_price_negative_share});
  checks.push_back({"tracked_coverage", static_cast<double>(metrics.coverage_count),
                    static_cast<double>(thresholds.min_coverage),
                    metrics.coverage_count >= thresholds.min_coverage});
  return checks;
}

void write_metrics_json(const std::string& path, const RecoveryMetrics& metrics,
                        const std::vector<ThresholdCheck>& checks) {
  ordered_json j;
  j["format"] = "hbprobit-recovery-metrics";
  j["version"] = 1;
  const auto param_json = [](const std::vector<ParamRecovery>& params) {
    ordered_json out = ordered_json::array();
    for (const auto& p : params) {
      out.push_back({{"name", p.name},
                     {"truth", p.truth},
                     {"posterior_mean", p.posterior_mean},
                     {"interval", {p.lo, p.hi}},
                     {"covered", p.covered},
                     {"degenerate", p.degenerate},
                     {"abs_error", p.abs_error},
                     {"sign_match", p.sign_match}});
    }
    return out;
  };
  j["tracked"] = param_json(metrics.tracked);
  j["extras"] = param_json(metrics.extras);
  j["tracked_rmse"] = metrics.tracked_rmse;
  j["sign_agreement"] = metrics.sign_agreement;
  j["coverage_count"] = metrics.coverage_count;
  j["degenerate"] = metrics.degenerate;
  j["household_rmse"] = {{"beta_display", metrics.beta_display_rmse},
                         {"beta_price", metrics.beta_price_rmse},
                         {"alpha", metrics.alpha_rmse},
                         {"delta", metrics.delta_rmse}};
  j["price_negative_share"] = metrics.price_negative_share;
  ordered_json ch = ordered_json::array();
  for (const auto& c : checks) {
    ch.push_back({{"name", c.name},
                  {"value", c.value},
                  {"limit", c.limit},
                  {"pass", c.pass}});
  }
  j["threshold_checks"] = std::move(ch);
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << j.dump(1) << "\n";
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 0xCBF29CE484222325ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001B3ull;
  }
  return hash;
}

}  // namespace hbprobit
