#include "hbprobit/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace hbprobit {

namespace {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& s, const std::string& context) {
  const std::string t = trim(s);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw std::invalid_argument("bad numeric field '" + s + "' in " + context);
  }
  return v;
}

long parse_long(const std::string& s, const std::string& context) {
  const std::string t = trim(s);
  long v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw std::invalid_argument("bad integer field '" + s + "' in " + context);
  }
  return v;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

bool ChoiceOccasion::operator==(const ChoiceOccasion& other) const {
  return household_id == other.household_id && household == other.household &&
         occasion_index == other.occasion_index && chosen == other.chosen &&
         prices.size() == other.prices.size() &&
         displays.size() == other.displays.size() && prices == other.prices &&
         displays == other.displays;
}

std::pair<double, double> design_row(const ChoiceOccasion& occasion, int brand) {
  if (brand < 0 || brand >= occasion.prices.size()) {
    throw std::out_of_range("design_row: brand index out of range");
  }
  return {occasion.displays[brand], occasion.prices[brand]};
}

BrandAttributeMatrix BrandAttributeMatrix::from_raw(const Eigen::MatrixXd& raw) {
  BrandAttributeMatrix out;
  out.values.resize(raw.rows(), raw.cols() + 1);
  out.values.col(0).setOnes();
  out.values.rightCols(raw.cols()) = raw;
  return out;
}

PanelDataset PanelDataset::build(std::vector<ChoiceOccasion> raw, int n_brands) {
  if (raw.empty()) throw std::invalid_argument("panel has no occasions");
  if (n_brands < 1) throw std::invalid_argument("panel needs at least one brand");

  double max_price = 0.0;
  for (const auto& occ : raw) {
    if (occ.prices.size() != n_brands || occ.displays.size() != n_brands) {
      throw std::invalid_argument("occasion vector length differs from brand count");
    }
    for (int j = 0; j < n_brands; ++j) {
      const double p = occ.prices[j];
      if (!std::isfinite(p) || p <= 0.0) {
        throw std::invalid_argument("prices must be finite and positive");
      }
      max_price = std::max(max_price, p);
    }
  }

  PanelDataset out;
  out.n_brands_ = n_brands;
  out.price_scale_ = max_price;

  std::unordered_map<std::string, int> index_of;
  for (auto& occ : raw) {
    auto [it, inserted] =
        index_of.emplace(occ.household_id, static_cast<int>(index_of.size()));
    if (inserted) out.household_ids_.push_back(occ.household_id);
    occ.household = it->second;
    occ.prices /= max_price;
  }

  std::stable_sort(raw.begin(), raw.end(),
                   [](const ChoiceOccasion& a, const ChoiceOccasion& b) {
                     return std::tie(a.household, a.occasion_index) <
                            std::tie(b.household, b.occasion_index);
                   });
  out.occasions_ = std::move(raw);

  const int n_households = static_cast<int>(out.household_ids_.size());
  out.first_occasion_.assign(n_households + 1, 0);
  for (const auto& occ : out.occasions_) out.first_occasion_[occ.household + 1]++;
  for (int h = 0; h < n_households; ++h) {
    out.first_occasion_[h + 1] += out.first_occasion_[h];
  }
  return out;
}

std::span<const ChoiceOccasion> PanelDataset::household_occasions(int household) const {
  if (household < 0 || household >= n_households()) {
    throw std::out_of_range("household index out of range");
  }
  const int begin = first_occasion_[household];
  const int end = first_occasion_[household + 1];
  return {occasions_.data() + begin, static_cast<std::size_t>(end - begin)};
}

bool PanelDataset::operator==(const PanelDataset& other) const {
  return n_brands_ == other.n_brands_ && occasions_ == other.occasions_ &&
         household_ids_ == other.household_ids_;
}

std::vector<std::string> validate_panel(const PanelDataset& dataset,
                                        const BrandAttributeMatrix& attrs) {
  std::vector<std::string> issues;
  const int j_count = dataset.n_brands();
  const int h_count = dataset.n_households();

  if (attrs.n_brands() != j_count) {
    issues.push_back("brand count mismatch: panel has " + std::to_string(j_count) +
                     " brands, attribute matrix has " +
                     std::to_string(attrs.n_brands()) + " rows");
  }
  if (!attrs.values.allFinite()) {
    issues.push_back("attribute matrix has non-finite entries");
  }
  if ((attrs.values.col(0).array() != 1.0).any()) {
    issues.push_back("attribute matrix first column must be identically 1");
  }

  for (int h = 0; h < h_count; ++h) {
    if (dataset.household_occasions(h).empty()) {
      issues.push_back("household " + std::to_string(h) + " has no occasions");
    }
  }

  for (const auto& occ : dataset.occasions()) {
    const std::string where =
        "household '" + occ.household_id + "' occasion " +
        std::to_string(occ.occasion_index);
    if (occ.household < 0 || occ.household >= h_count) {
      issues.push_back("household index not canonical at " + where);
    }
    if (occ.chosen < 0 || occ.chosen >= j_count) {
      issues.push_back("chosen out of range at " + where + ": " +
                       std::to_string(occ.chosen));
    }
    if (occ.prices.size() != j_count || occ.displays.size() != j_count) {
      issues.push_back("vector length differs from brand count at " + where);
      continue;
    }
    for (int j = 0; j < j_count; ++j) {
      if (!std::isfinite(occ.prices[j]) || occ.prices[j] <= 0.0) {
        issues.push_back("non-positive or non-finite price at " + where);
        break;
      }
    }
    for (int j = 0; j < j_count; ++j) {
      if (occ.displays[j] != 0.0 && occ.displays[j] != 1.0) {
        issues.push_back("display not in {0,1} at " + where);
        break;
      }
    }
  }
  return issues;
}

PanelDataset read_panel_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw std::invalid_argument("empty panel file: " + path);

  const auto header = split_csv_line(lines[0]);
  if (header.size() < 5 || trim(header[0]) != "household_id" ||
      trim(header[1]) != "occasion" || trim(header[2]) != "chosen_brand") {
    throw std::invalid_argument("panel header must start with household_id,occasion,chosen_brand");
  }
  int n_brands = 0;
  std::size_t col = 3;
  while (col < header.size() &&
         trim(header[col]) == "price_" + std::to_string(n_brands + 1)) {
    ++n_brands;
    ++col;
  }
  if (n_brands == 0) throw std::invalid_argument("panel header has no price_k columns");
  for (int j = 1; j <= n_brands; ++j, ++col) {
    if (col >= header.size() || trim(header[col]) != "display_" + std::to_string(j)) {
      throw std::invalid_argument("panel header missing display_" + std::to_string(j));
    }
  }
  if (col != header.size()) {
    throw std::invalid_argument("panel header has unexpected trailing columns");
  }

  std::vector<ChoiceOccasion> raw;
  raw.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_csv_line(lines[i]);
    const std::string context = path + ":" + std::to_string(i + 1);
    if (fields.size() != header.size()) {
      throw std::invalid_argument("wrong field count in " + context);
    }
    ChoiceOccasion occ;
    occ.household_id = trim(fields[0]);
    if (occ.household_id.empty()) {
      throw std::invalid_argument("empty household id in " + context);
    }
    occ.occasion_index = static_cast<int>(parse_long(fields[1], context));
    const long chosen_file = parse_long(fields[2], context);
    if (chosen_file < 1 || chosen_file > n_brands) {
      throw std::invalid_argument("chosen_brand out of range [1," +
                                  std::to_string(n_brands) + "] in " + context);
    }
    occ.chosen = static_cast<int>(chosen_file - 1);
    occ.prices.resize(n_brands);
    occ.displays.resize(n_brands);
    for (int j = 0; j < n_brands; ++j) {
      occ.prices[j] = parse_double(fields[3 + j], context);
      occ.displays[j] = parse_double(fields[3 + n_brands + j], context);
    }
    raw.push_back(std::move(occ));
  }
  return PanelDataset::build(std::move(raw), n_brands);
}

void write_panel_csv(const std::string& path, const PanelDataset& dataset) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  const int j_count = dataset.n_brands();
  out << "household_id,occasion,chosen_brand";
  for (int j = 1; j <= j_count; ++j) out << ",price_" << j;
  for (int j = 1; j <= j_count; ++j) out << ",display_" << j;
  out << "\n";
  for (const auto& occ : dataset.occasions()) {
    out << occ.household_id << ',' << occ.occasion_index << ',' << occ.chosen + 1;
    for (int j = 0; j < j_count; ++j) out << ',' << format_double(occ.prices[j]);
    for (int j = 0; j < j_count; ++j) out << ',' << format_double(occ.displays[j]);
    out << "\n";
  }
}

BrandAttributeMatrix read_attributes_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw std::invalid_argument("empty attribute file: " + path);
  const auto header = split_csv_line(lines[0]);
  const std::array<const char*, 6> expected = {"brand",      "saa",
                                               "bleach",     "package",
                                               "g_per_30l",  "net_weight"};
  if (header.size() != expected.size()) {
    throw std::invalid_argument("attribute header must be brand,saa,bleach,package,g_per_30l,net_weight");
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (trim(header[i]) != expected[i]) {
      throw std::invalid_argument("unexpected attribute column '" + header[i] + "'");
    }
  }
  const int j_count = static_cast<int>(lines.size()) - 1;
  Eigen::MatrixXd raw(j_count, 5);
  std::vector<bool> seen(j_count, false);
  for (int i = 0; i < j_count; ++i) {
    const auto fields = split_csv_line(lines[i + 1]);
    const std::string context = path + ":" + std::to_string(i + 2);
    if (fields.size() != expected.size()) {
      throw std::invalid_argument("wrong field count in " + context);
    }
    const long brand = parse_long(fields[0], context);
    if (brand < 1 || brand > j_count || seen[brand - 1]) {
      throw std::invalid_argument("brand numbers must be 1.." +
                                  std::to_string(j_count) + " without repeats in " +
                                  path);
    }
    seen[brand - 1] = true;
    for (int c = 0; c < 5; ++c) {
      raw(brand - 1, c) = parse_double(fields[c + 1], context);
    }
    for (int c : {1, 2}) {  // bleach, package are binary codes
      if (raw(brand - 1, c) != 0.0 && raw(brand - 1, c) != 1.0) {
        throw std::invalid_argument("bleach/package must be 0 or 1 in " + context);
      }
    }
  }
  return BrandAttributeMatrix::from_raw(raw);
}

void write_attributes_csv(const std::string& path,
                          const BrandAttributeMatrix& attrs) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << "brand,saa,bleach,package,g_per_30l,net_weight\n";
  for (int j = 0; j < attrs.n_brands(); ++j) {
    out << j + 1;
    for (int c = 1; c < attrs.n_attributes(); ++c) {
      out << ',' << format_double(attrs.values(j, c));
    }
    out << "\n";
  }
}

void write_household_map_csv(const std::string& path, const PanelDataset& dataset) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << "household_index,household_id\n";
  const auto& ids = dataset.household_ids();
  for (std::size_t h = 0; h < ids.size(); ++h) {
    out << h << ',' << ids[h] << "\n";
  }
}

}  // namespace hbprobit
