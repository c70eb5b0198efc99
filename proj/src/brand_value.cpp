#include "hbprobit/brand_value.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "hbprobit/gibbs.hpp"
#include "hbprobit/stat_kernels.hpp"

namespace hbprobit {

double tangible_value(const Eigen::VectorXd& delta,
                      const Eigen::VectorXd& attr_row) {
  if (delta.size() != attr_row.size()) {
    throw std::invalid_argument("tangible_value: length mismatch");
  }
  // Plain left-to-right accumulation; keep bit-identical everywhere.
  double acc = 0.0;
  for (Eigen::Index r = 0; r < delta.size(); ++r) acc += delta[r] * attr_row[r];
  return acc;
}

double intangible_value(double alpha_j, const Eigen::VectorXd& delta,
                        const Eigen::VectorXd& attr_row) {
  return alpha_j - tangible_value(delta, attr_row);
}

BrandValueDecomposition decompose_chain(const ChainDraws& chain,
                                        const BrandAttributeMatrix& attrs) {
  if (chain.draws.empty()) {
    throw std::invalid_argument("decompose_chain: empty chain");
  }
  if (attrs.n_brands() != chain.n_brands ||
      attrs.n_attributes() != chain.n_attributes) {
    throw std::invalid_argument("decompose_chain: attribute matrix mismatch");
  }
  const int h_count = chain.n_households;
  const int j_count = chain.n_brands;
  const double n = static_cast<double>(chain.draws.size());

  BrandValueDecomposition out;
  out.n_households = h_count;
  out.n_brands = j_count;
  Eigen::MatrixXd tot_s = Eigen::MatrixXd::Zero(h_count, j_count);
  Eigen::MatrixXd tot_s2 = tot_s, tan_s = tot_s, tan_s2 = tot_s, int_s = tot_s,
                  int_s2 = tot_s;

  for (const auto& draw : chain.draws) {
    for (int h = 0; h < h_count; ++h) {
      const Eigen::VectorXd delta_h = draw.delta.row(h);
      for (int j = 0; j < j_count; ++j) {
        const double total = draw.alpha(h, j);
        const double tangible = tangible_value(delta_h, attrs.row(j));
        const double intangible = draw.intangible(h, j);
        tot_s(h, j) += total;
        tot_s2(h, j) += total * total;
        tan_s(h, j) += tangible;
        tan_s2(h, j) += tangible * tangible;
        int_s(h, j) += intangible;
        int_s2(h, j) += intangible * intangible;
      }
    }
  }

  const auto finish = [&](const Eigen::MatrixXd& s, const Eigen::MatrixXd& s2,
                          Eigen::MatrixXd& mean, Eigen::MatrixXd& sd) {
    mean = s / n;
    sd = Eigen::MatrixXd::Zero(h_count, j_count);
    if (n > 1.0) {
      for (int h = 0; h < h_count; ++h) {
        for (int j = 0; j < j_count; ++j) {
          const double var =
              std::max(0.0, (s2(h, j) - n * mean(h, j) * mean(h, j)) / (n - 1.0));
          sd(h, j) = std::sqrt(var);
        }
      }
    }
  };
  finish(tot_s, tot_s2, out.total_mean, out.total_sd);
  finish(tan_s, tan_s2, out.tangible_mean, out.tangible_sd);
  finish(int_s, int_s2, out.intangible_mean, out.intangible_sd);
  return out;
}

void write_decomposition_csv(const std::string& path,
                             const BrandValueDecomposition& decomp,
                             const std::vector<std::string>& household_ids) {
  if (static_cast<int>(household_ids.size()) != decomp.n_households) {
    throw std::invalid_argument("write_decomposition_csv: id count mismatch");
  }
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << "household,brand,total_mean,tangible_mean,intangible_mean,"
         "total_sd,tangible_sd,intangible_sd\n";
  char buf[64];
  const auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    out << ',' << buf;
  };
  for (int h = 0; h < decomp.n_households; ++h) {
    for (int j = 0; j < decomp.n_brands; ++j) {
      out << household_ids[h] << ',' << j + 1;
      put(decomp.total_mean(h, j));
      put(decomp.tangible_mean(h, j));
      put(decomp.intangible_mean(h, j));
      put(decomp.total_sd(h, j));
      put(decomp.tangible_sd(h, j));
      put(decomp.intangible_sd(h, j));
      out << "\n";
    }
  }
}

Eigen::VectorXd choice_probabilities(const HouseholdParams& hp,
                                     const ChoiceOccasion& occasion,
                                     int n_sims, Philox& rng) {
  if (n_sims < 1) {
    throw std::invalid_argument("choice_probabilities: n_sims must be >= 1");
  }
  const int j_count = static_cast<int>(hp.alpha.size());
  if (occasion.prices.size() != j_count || occasion.displays.size() != j_count) {
    throw std::invalid_argument("choice_probabilities: occasion dimension mismatch");
  }
  Eigen::VectorXd det(j_count);
  for (int j = 0; j < j_count; ++j) {
    det[j] = hp.alpha[j] + hp.beta[0] * occasion.displays[j] +
             hp.beta[1] * occasion.prices[j];
  }
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(j_count);
  for (int s = 0; s < n_sims; ++s) {
    int best = 0;
    double best_u = det[0] + sample_standard_normal(rng);
    for (int j = 1; j < j_count; ++j) {
      const double u = det[j] + sample_standard_normal(rng);
      if (u > best_u) {
        best_u = u;
        best = j;
      }
    }
    counts[best] += 1.0;
  }
  return counts / static_cast<double>(n_sims);
}

}  // namespace hbprobit
