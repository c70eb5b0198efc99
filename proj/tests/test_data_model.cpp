#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hbprobit/panel.hpp"

using namespace hbprobit;
namespace fs = std::filesystem;

namespace {

ChoiceOccasion make_occasion(const std::string& id, int index, int chosen,
                             std::initializer_list<double> prices,
                             std::initializer_list<double> displays) {
  ChoiceOccasion occ;
  occ.household_id = id;
  occ.occasion_index = index;
  occ.chosen = chosen;
  occ.prices = Eigen::Map<const Eigen::VectorXd>(prices.begin(),
                                                 static_cast<long>(prices.size()));
  occ.displays = Eigen::Map<const Eigen::VectorXd>(
      displays.begin(), static_cast<long>(displays.size()));
  return occ;
}

PanelDataset small_panel(int chosen_b = 1) {
  std::vector<ChoiceOccasion> raw;
  raw.push_back(make_occasion("fam-a", 0, 0, {200, 300, 250, 220, 280, 260},
                              {1, 0, 0, 0, 0, 0}));
  raw.push_back(make_occasion("fam-a", 1, 2, {210, 310, 240, 230, 290, 255},
                              {0, 0, 1, 0, 0, 0}));
  raw.push_back(make_occasion("fam-b", 0, chosen_b, {205, 305, 245, 225, 285, 258},
                              {0, 1, 0, 0, 0, 0}));
  return PanelDataset::build(std::move(raw), 6);
}

BrandAttributeMatrix small_attrs(int n_brands = 6) {
  Eigen::MatrixXd raw(n_brands, 5);
  for (int j = 0; j < n_brands; ++j) {
    raw.row(j) << 30.0 + j, j % 2, (j / 2) % 2, 25.0 - j, 1.0 + 0.1 * j;
  }
  return BrandAttributeMatrix::from_raw(raw);
}

fs::path temp_file(const char* name) {
  return fs::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("well-formed panel validates cleanly") {
  const PanelDataset data = small_panel();
  CHECK(validate_panel(data, small_attrs()).empty());
  CHECK(data.n_households() == 2);
  CHECK(data.n_brands() == 6);
  CHECK(data.n_occasions() == 3);
}

TEST_CASE("chosen index at J is reported as out of range") {
  const PanelDataset data = small_panel(6);
  const auto issues = validate_panel(data, small_attrs());
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].find("chosen out of range") != std::string::npos);
}

TEST_CASE("attribute row count mismatch is reported") {
  const auto issues = validate_panel(small_panel(), small_attrs(5));
  REQUIRE(!issues.empty());
  CHECK(issues[0].find("brand count mismatch") != std::string::npos);
}

TEST_CASE("non-binary displays are reported") {
  auto occ = make_occasion("x", 0, 0, {100, 100, 100, 100, 100, 100},
                           {0.5, 0, 0, 0, 0, 0});
  PanelDataset data = PanelDataset::build({occ}, 6);
  const auto issues = validate_panel(data, small_attrs());
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].find("display not in {0,1}") != std::string::npos);
}

TEST_CASE("design_row projects display and price for one brand") {
  ChoiceOccasion occ =
      make_occasion("h", 0, 0, {0.5, 0.7, 0.9, 0.6, 0.8, 1.0}, {1, 0, 0, 0, 1, 0});
  occ.household = 0;
  const auto [display0, price0] = design_row(occ, 0);
  CHECK(display0 == 1.0);
  CHECK(price0 == 0.5);
  const auto [display1, price1] = design_row(occ, 1);
  CHECK(display1 == 0.0);
  CHECK(price1 == 0.7);
  // Pure projection: identical on repeat.
  CHECK(design_row(occ, 1) == design_row(occ, 1));
  CHECK_THROWS_AS((void)design_row(occ, 6), std::out_of_range);
  CHECK_THROWS_AS((void)design_row(occ, -1), std::out_of_range);
}

TEST_CASE("household ids canonicalize onto 0..H-1 in first-appearance order") {
  std::vector<ChoiceOccasion> raw;
  raw.push_back(make_occasion("zebra", 0, 0, {10, 20}, {0, 0}));
  raw.push_back(make_occasion("alpha", 0, 1, {11, 21}, {0, 1}));
  raw.push_back(make_occasion("zebra", 1, 1, {12, 22}, {1, 0}));
  raw.push_back(make_occasion("m-42", 3, 0, {13, 23}, {0, 0}));
  const PanelDataset data = PanelDataset::build(std::move(raw), 2);
  CHECK(data.household_ids() == std::vector<std::string>{"zebra", "alpha", "m-42"});
  for (int h = 0; h < data.n_households(); ++h) {
    for (const auto& occ : data.household_occasions(h)) {
      CHECK(occ.household == h);
    }
  }
  CHECK(data.household_occasions(0).size() == 2);
  CHECK(data.household_occasions(1).size() == 1);
}

TEST_CASE("prices are rescaled by the panel-wide maximum") {
  const PanelDataset data = small_panel();
  double max_price = 0.0;
  for (const auto& occ : data.occasions()) {
    max_price = std::max(max_price, occ.prices.maxCoeff());
    CHECK((occ.prices.array() > 0.0).all());
    CHECK((occ.prices.array() <= 1.0).all());
  }
  CHECK(max_price == 1.0);
  CHECK(data.price_scale() == doctest::Approx(310.0));
}

TEST_CASE("panel csv round-trips field by field") {
  const PanelDataset data = small_panel();
  const auto path = temp_file("hbprobit_panel_roundtrip.csv");
  write_panel_csv(path.string(), data);
  const PanelDataset reread = read_panel_csv(path.string());
  CHECK(data == reread);
  fs::remove(path);
}

TEST_CASE("panel csv loader rejects malformed input") {
  const auto path = temp_file("hbprobit_panel_bad.csv");
  {
    std::ofstream out(path);
    out << "household_id,occasion,chosen_brand,price_1,display_1,display_2\n";
    out << "h1,0,1,0.5,0,1\n";
  }
  CHECK_THROWS_AS((void)read_panel_csv(path.string()), std::invalid_argument);
  {
    std::ofstream out(path);
    out << "household_id,occasion,chosen_brand,price_1,price_2,display_1,display_2\n";
    out << "h1,0,0,0.5,0.6,0,1\n";  // chosen_brand must be 1-based
  }
  CHECK_THROWS_AS((void)read_panel_csv(path.string()), std::invalid_argument);
  {
    std::ofstream out(path);
    out << "household_id,occasion,chosen_brand,price_1,price_2,display_1,display_2\n";
    out << "h1,0,1,0.5,abc,0,1\n";
  }
  CHECK_THROWS_AS((void)read_panel_csv(path.string()), std::invalid_argument);
  CHECK_THROWS_AS((void)read_panel_csv("/nonexistent/panel.csv"),
                  std::invalid_argument);
  fs::remove(path);
}

TEST_CASE("dataset construction rejects structurally broken input") {
  CHECK_THROWS_AS((void)PanelDataset::build({}, 3), std::invalid_argument);
  auto occ = make_occasion("h", 0, 0, {100, -5}, {0, 0});
  CHECK_THROWS_AS((void)PanelDataset::build({occ}, 2), std::invalid_argument);
  auto short_occ = make_occasion("h", 0, 0, {100}, {0});
  CHECK_THROWS_AS((void)PanelDataset::build({short_occ}, 2), std::invalid_argument);
}

TEST_CASE("attribute csv round-trips and enforces binary codes") {
  const BrandAttributeMatrix attrs = small_attrs();
  const auto path = temp_file("hbprobit_attrs_roundtrip.csv");
  write_attributes_csv(path.string(), attrs);
  const BrandAttributeMatrix reread = read_attributes_csv(path.string());
  CHECK(attrs.values == reread.values);
  CHECK((reread.values.col(0).array() == 1.0).all());

  {
    std::ofstream out(path);
    out << "brand,saa,bleach,package,g_per_30l,net_weight\n";
    out << "1,30,0.5,0,25,1.2\n";  // bleach must be 0 or 1
  }
  CHECK_THROWS_AS((void)read_attributes_csv(path.string()), std::invalid_argument);
  {
    std::ofstream out(path);
    out << "brand,saa,bleach,package,grams,net_weight\n";
    out << "1,30,0,0,25,1.2\n";
  }
  CHECK_THROWS_AS((void)read_attributes_csv(path.string()), std::invalid_argument);
  fs::remove(path);
}

TEST_CASE("household map persists the canonical index mapping") {
  const auto path = temp_file("hbprobit_household_map.csv");
  write_household_map_csv(path.string(), small_panel());
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "household_index,household_id");
  std::getline(in, line);
  CHECK(line == "0,fam-a");
  std::getline(in, line);
  CHECK(line == "1,fam-b");
  fs::remove(path);
}
