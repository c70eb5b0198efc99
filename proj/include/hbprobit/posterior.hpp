#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hbprobit/gibbs.hpp"
#include "hbprobit/panel.hpp"

namespace hbprobit {

// Shortest contiguous window of the sorted draws containing
// ceil(level * n) points (unimodal HPD estimator). Needs at least two draws
// and a level in (0,1).
std::pair<double, double> hpd_interval(std::vector<double> draws, double level);

// One report line in the classic posterior summary-table layout.
struct SummaryRow {
  std::string label;
  double posterior_mean = 0.0;
  double sd = 0.0;
  int hpd_count = 0;  // households whose HPD interval excludes zero
  int pos_count = 0;
  int neg_count = 0;
};

// Extracts one labeled household-level scalar from a snapshot.
struct ParamSelector {
  std::string label;
  std::function<double(const Snapshot&, int household)> value;
};

// Display, Price, Product 1..J (the choice-stage table).
std::vector<ParamSelector> market_response_selectors(int n_brands);
// Constant, S.A.A., ... (the hierarchical-stage table).
std::vector<ParamSelector> attribute_selectors(int n_attributes);
// Intercept differences vs. brand 1, for strict-identification readers.
std::vector<ParamSelector> intercept_contrast_selectors(int n_brands);

// Per selector: posterior mean of the household posterior means, their
// spread across households, and the count of households whose HPD interval
// excludes zero, split by the sign of the household mean.
std::vector<SummaryRow> significance_table(const ChainDraws& chain,
                                           const std::vector<ParamSelector>& params,
                                           double level);

// Standardized mean difference between the early and late chain segments,
// with segment variances estimated by batch means. Throws
// std::invalid_argument when the segments are too short and
// std::domain_error on a zero-variance chain (diagnostic unavailable).
double geweke_z(const std::vector<double>& draws, double first_frac = 0.1,
                double last_frac = 0.5);

enum class ReportFormat { text, csv };

// Renders rows with the standard column set:
// Posterior Mean, S.D., HPD, (+), (-); means and sds to three decimals.
// The optional heading becomes an interior section line in text output.
std::string render_report(const std::vector<SummaryRow>& rows, ReportFormat format,
                          std::string_view heading = {});

}  // namespace hbprobit
