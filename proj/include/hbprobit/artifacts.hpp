#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hbprobit/gibbs.hpp"
#include "hbprobit/posterior.hpp"
#include "hbprobit/synth.hpp"

namespace hbprobit {

inline constexpr const char* kToolVersion = "0.1.0";

struct GewekeEntry {
  std::string param;
  int chain = 0;
  double z = 0.0;
  bool available = true;  // false when the diagnostic could not be computed
};

// Everything the downstream commands need from an estimation run, persisted
// as structured text (JSON). Population-level draw series are kept in full;
// household-level results as posterior summaries.
struct ChainSummary {
  std::string tool_version = kToolVersion;
  McmcConfig config;
  int n_chains = 1;
  int n_households = 0;
  int n_brands = 0;
  int n_attributes = 0;
  int n_draws = 0;
  int collinearity_warnings = 0;
  std::vector<std::string> household_ids;
  std::vector<SummaryRow> market_response_rows;
  std::vector<SummaryRow> attribute_rows;
  std::vector<SummaryRow> contrast_rows;  // intercepts vs. brand 1
  ChainEvidence evidence;
  Eigen::MatrixXd household_beta_lo;  // H x 2, per-household HPD bounds
  Eigen::MatrixXd household_beta_hi;
  std::vector<GewekeEntry> geweke;
};

// Concatenates post-burn-in draws of independent chains (same data and
// configuration, different seeds).
ChainDraws merge_chains(std::vector<ChainDraws> chains);

// Builds the persisted summary: report rows, population draw series,
// household posterior summaries, and per-chain Geweke diagnostics.
ChainSummary summarize_chains(const std::vector<ChainDraws>& chains,
                              const PanelDataset& data,
                              const BrandAttributeMatrix& attrs);

void write_chain_summary(const std::string& path, const ChainSummary& summary);
ChainSummary read_chain_summary(const std::string& path);

void write_truth_json(const std::string& path, const PanelTruth& truth);
PanelTruth read_truth_json(const std::string& path);

// Pass/fail gates applied by the recover command.
struct RecoveryThresholds {
  double max_mean_abs_error = 0.5;     // display and price population means
  double min_price_negative_share = 0.9;
  int min_coverage = 12;               // of the tracked population parameters
};

struct ThresholdCheck {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool pass = false;
};

std::vector<ThresholdCheck> evaluate_thresholds(const RecoveryMetrics& metrics,
                                                const RecoveryThresholds& thresholds);

void write_metrics_json(const std::string& path, const RecoveryMetrics& metrics,
                        const std::vector<ThresholdCheck>& checks);

// 64-bit FNV-1a, used for the manifest's config hash.
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace hbprobit
