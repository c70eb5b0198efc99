#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hbprobit/panel.hpp"
#include "hbprobit/params.hpp"
#include "hbprobit/rng.hpp"

namespace hbprobit {

struct ChainDraws;

// Attribute-explained part of a brand intercept: sum_r delta[r] * attrs[r].
// Every module computes tangible values through this one function so the
// decomposition identity alpha = tangible + intangible is exact per draw,
// not merely within rounding of two different summation orders.
double tangible_value(const Eigen::VectorXd& delta,
                      const Eigen::VectorXd& attr_row);

// Residual part of a brand intercept: alpha_j - tangible_value(...).
double intangible_value(double alpha_j, const Eigen::VectorXd& delta,
                        const Eigen::VectorXd& attr_row);

// Per-household, per-brand posterior summaries of total, tangible and
// intangible brand value across a chain.
struct BrandValueDecomposition {
  int n_households = 0;
  int n_brands = 0;
  Eigen::MatrixXd total_mean, tangible_mean, intangible_mean;  // H x J
  Eigen::MatrixXd total_sd, tangible_sd, intangible_sd;        // H x J
};

BrandValueDecomposition decompose_chain(const ChainDraws& draws,
                                        const BrandAttributeMatrix& attrs);

// CSV export: household,brand,total_mean,tangible_mean,intangible_mean,
// total_sd,tangible_sd,intangible_sd.
void write_decomposition_csv(const std::string& path,
                             const BrandValueDecomposition& decomp,
                             const std::vector<std::string>& household_ids);

// Frequency-simulated choice probabilities: n_sims utility vectors
// (deterministic part plus unit normal noise), argmax frequencies returned.
// Entries are non-negative and sum to one.
Eigen::VectorXd choice_probabilities(const HouseholdParams& hp,
                                     const ChoiceOccasion& occasion,
                                     int n_sims, Philox& rng);

}  // namespace hbprobit
