#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hbprobit {

// One purchase occasion. Prices are stored in canonical units: the dataset
// builder divides every price by the panel-wide maximum so all prices lie in
// (0, 1], commensurate with the unit probit error variance.
struct ChoiceOccasion {
  std::string household_id;  // external id, arbitrary string
  int household = -1;        // canonical dense index assigned by the builder
  int occasion_index = 0;
  Eigen::VectorXd prices;    // length J, rescaled
  Eigen::VectorXd displays;  // length J, each 0 or 1
  int chosen = 0;            // brand index in [0, J)

  bool operator==(const ChoiceOccasion& other) const;
};

// (display_jt, price_jt) for one brand at one occasion. Pure projection.
std::pair<double, double> design_row(const ChoiceOccasion& occasion, int brand);

// J x R physical attribute matrix. The first column is identically one and
// is prepended by the constructors; the remaining columns carry the raw
// attribute values in file order.
struct BrandAttributeMatrix {
  Eigen::MatrixXd values;  // J x R, first column all ones

  static constexpr std::array<const char*, 6> kColumnLabels = {
      "Constant", "S.A.A.", "Bleach", "Package", "g/30l", "net-w"};

  // Prepends the constant column to J x (R-1) raw attributes.
  static BrandAttributeMatrix from_raw(const Eigen::MatrixXd& raw);

  int n_brands() const { return static_cast<int>(values.rows()); }
  int n_attributes() const { return static_cast<int>(values.cols()); }
  Eigen::VectorXd row(int brand) const { return values.row(brand); }
};

// Occasions grouped by household with canonical dense indices. Immutable
// after construction and safe to share read-only across threads.
class PanelDataset {
 public:
  // Canonicalizes household ids (first-appearance order), orders occasions
  // by (household, occasion_index), and rescales prices by the panel-wide
  // maximum. Throws std::invalid_argument on structurally unusable input
  // (empty panel, inconsistent J, non-positive or non-finite raw prices).
  static PanelDataset build(std::vector<ChoiceOccasion> raw, int n_brands);

  int n_households() const { return static_cast<int>(first_occasion_.size()) - 1; }
  int n_brands() const { return n_brands_; }
  int n_occasions() const { return static_cast<int>(occasions_.size()); }

  const std::vector<ChoiceOccasion>& occasions() const { return occasions_; }
  std::span<const ChoiceOccasion> household_occasions(int household) const;
  const std::vector<std::string>& household_ids() const { return household_ids_; }
  double price_scale() const { return price_scale_; }

  bool operator==(const PanelDataset& other) const;

 private:
  PanelDataset() = default;
  std::vector<ChoiceOccasion> occasions_;   // sorted by (household, occasion)
  std::vector<int> first_occasion_;         // size H+1, offsets into occasions_
  std::vector<std::string> household_ids_;  // canonical index -> external id
  int n_brands_ = 0;
  double price_scale_ = 1.0;  // divisor applied to raw prices
};

// Report-style validation of a built dataset against an attribute matrix:
// returns a list of violations, empty when everything checks out. Callers
// decide whether to abort.
std::vector<std::string> validate_panel(const PanelDataset& dataset,
                                        const BrandAttributeMatrix& attrs);

// CSV formats (UTF-8, '.' decimal separator, header required).
// Panel: household_id,occasion,chosen_brand,price_1..price_J,display_1..display_J
// with 1-based brand numbers in chosen_brand, matching the column names.
// Attributes: brand,saa,bleach,package,g_per_30l,net_weight; the constant
// column is added internally.
PanelDataset read_panel_csv(const std::string& path);
void write_panel_csv(const std::string& path, const PanelDataset& dataset);

BrandAttributeMatrix read_attributes_csv(const std::string& path);
void write_attributes_csv(const std::string& path,
                          const BrandAttributeMatrix& attrs);

// Persisted canonical-id mapping: household_index,household_id.
void write_household_map_csv(const std::string& path,
                             const PanelDataset& dataset);

}  // namespace hbprobit
