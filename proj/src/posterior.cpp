#include "hbprobit/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace hbprobit {

namespace {

double mean_of(const double* x, std::size_t n) {
  return std::accumulate(x, x + n, 0.0) / static_cast<double>(n);
}

// Variance of the segment mean via the Bartlett-window (Newey-West)
// long-run variance with a 10% lag window, so autocorrelated but
// stationary chains are not flagged spuriously.
double mean_variance_spectral(const double* x, std::size_t n) {
  const double m = mean_of(x, n);
  const std::size_t lags = std::max<std::size_t>(1, n / 10);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += (x[i] - m) * (x[i] - m);
  s /= static_cast<double>(n);
  for (std::size_t k = 1; k <= lags && k < n; ++k) {
    double g = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) g += (x[i] - m) * (x[i + k] - m);
    g /= static_cast<double>(n);
    s += 2.0 * (1.0 - static_cast<double>(k) / static_cast<double>(lags + 1)) * g;
  }
  return std::max(s, 0.0) / static_cast<double>(n);
}

}  // namespace

std::pair<double, double> hpd_interval(std::vector<double> draws, double level) {
  if (draws.size() < 2) {
    throw std::invalid_argument("hpd_interval: need at least two draws");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("hpd_interval: level outside (0,1)");
  }
  std::sort(draws.begin(), draws.end());
  const std::size_t n = draws.size();
  std::size_t window = static_cast<std::size_t>(
      std::ceil(level * static_cast<double>(n)));
  window = std::clamp<std::size_t>(window, 2, n);
  std::size_t best = 0;
  double best_width = draws[window - 1] - draws[0];
  for (std::size_t i = 1; i + window <= n; ++i) {
    const double width = draws[i + window - 1] - draws[i];
    if (width < best_width) {
      best_width = width;
      best = i;
    }
  }
  return {draws[best], draws[best + window - 1]};
}

std::vector<ParamSelector> market_response_selectors(int n_brands) {
  std::vector<ParamSelector> out;
  out.push_back({"Display", [](const Snapshot& s, int h) { return s.beta(h, 0); }});
  out.push_back({"Price", [](const Snapshot& s, int h) { return s.beta(h, 1); }});
  for (int j = 0; j < n_brands; ++j) {
    out.push_back({"Product " + std::to_string(j + 1),
                   [j](const Snapshot& s, int h) { return s.alpha(h, j); }});
  }
  return out;
}

std::vector<ParamSelector> attribute_selectors(int n_attributes) {
  std::vector<ParamSelector> out;
  for (int r = 0; r < n_attributes; ++r) {
    std::string label =
        r < static_cast<int>(BrandAttributeMatrix::kColumnLabels.size())
            ? BrandAttributeMatrix::kColumnLabels[r]
            : "Attribute " + std::to_string(r + 1);
    out.push_back({std::move(label),
                   [r](const Snapshot& s, int h) { return s.delta(h, r); }});
  }
  return out;
}

std::vector<ParamSelector> intercept_contrast_selectors(int n_brands) {
  std::vector<ParamSelector> out;
  for (int j = 1; j < n_brands; ++j) {
    out.push_back({"Product " + std::to_string(j + 1) + " - Product 1",
                   [j](const Snapshot& s, int h) {
                     return s.alpha(h, j) - s.alpha(h, 0);
                   }});
  }
  return out;
}

std::vector<SummaryRow> significance_table(const ChainDraws& chain,
                                           const std::vector<ParamSelector>& params,
                                           double level) {
  if (chain.draws.empty()) {
    throw std::invalid_argument("significance_table: empty chain");
  }
  const int h_count = chain.n_households;
  const std::size_t n_draws = chain.draws.size();

  std::vector<SummaryRow> rows;
  rows.reserve(params.size());
  std::vector<double> series(n_draws);
  std::vector<double> household_means(h_count);
  for (const auto& param : params) {
    SummaryRow row;
    row.label = param.label;
    for (int h = 0; h < h_count; ++h) {
      for (std::size_t d = 0; d < n_draws; ++d) {
        series[d] = param.value(chain.draws[d], h);
      }
      household_means[h] = mean_of(series.data(), n_draws);
      if (n_draws >= 2) {
        const auto [lo, hi] = hpd_interval(series, level);
        if (lo > 0.0 || hi < 0.0) {
          ++row.hpd_count;
          if (household_means[h] > 0.0) {
            ++row.pos_count;
          } else {
            ++row.neg_count;
          }
        }
      }
    }
    row.posterior_mean = mean_of(household_means.data(), h_count);
    if (h_count > 1) {
      double ss = 0.0;
      for (double m : household_means) {
        ss += (m - row.posterior_mean) * (m - row.posterior_mean);
      }
      row.sd = std::sqrt(ss / static_cast<double>(h_count - 1));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

double geweke_z(const std::vector<double>& draws, double first_frac,
                double last_frac) {
  if (!(first_frac > 0.0) || !(last_frac > 0.0) || first_frac + last_frac > 1.0) {
    throw std::invalid_argument("geweke_z: bad window fractions");
  }
  const std::size_t n = draws.size();
  const std::size_t n_first =
      static_cast<std::size_t>(first_frac * static_cast<double>(n));
  const std::size_t n_last =
      static_cast<std::size_t>(last_frac * static_cast<double>(n));
  if (n_first < 2 || n_last < 2) {
    throw std::invalid_argument("geweke_z: not enough draws for both windows");
  }
  const auto [min_it, max_it] = std::minmax_element(draws.begin(), draws.end());
  if (*min_it == *max_it) {
    throw std::domain_error("geweke_z: zero-variance chain, diagnostic unavailable");
  }
  const double* first = draws.data();
  const double* last = draws.data() + (n - n_last);
  const double mean_first = mean_of(first, n_first);
  const double mean_last = mean_of(last, n_last);
  const double var =
      mean_variance_spectral(first, n_first) + mean_variance_spectral(last, n_last);
  if (!(var > 0.0)) {
    throw std::domain_error("geweke_z: zero-variance chain, diagnostic unavailable");
  }
  return (mean_first - mean_last) / std::sqrt(var);
}

std::string render_report(const std::vector<SummaryRow>& rows, ReportFormat format,
                          std::string_view heading) {
  std::string out;
  char buf[160];
  if (format == ReportFormat::csv) {
    out += ",Posterior Mean,S.D.,HPD,(+),(-)\n";
    for (const auto& row : rows) {
      std::snprintf(buf, sizeof(buf), "%s,%.3f,%.3f,%d,%d,%d\n", row.label.c_str(),
                    row.posterior_mean, row.sd, row.hpd_count, row.pos_count,
                    row.neg_count);
      out += buf;
    }
    return out;
  }
  std::size_t label_width = 10;
  for (const auto& row : rows) label_width = std::max(label_width, row.label.size());
  std::snprintf(buf, sizeof(buf), "%-*s  %14s  %8s  %5s  %5s  %5s\n",
                static_cast<int>(label_width), "", "Posterior Mean", "S.D.", "HPD",
                "(+)", "(-)");
  out += buf;
  if (!heading.empty()) {
    std::snprintf(buf, sizeof(buf), "%s\n", std::string(heading).c_str());
    out += buf;
  }
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%-*s  %14.3f  %8.3f  %5d  %5d  %5d\n",
                  static_cast<int>(label_width), row.label.c_str(),
                  row.posterior_mean, row.sd, row.hpd_count, row.pos_count,
                  row.neg_count);
    out += buf;
  }
  return out;
}

}  // namespace hbprobit
