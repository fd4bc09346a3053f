#include <doctest.h>

#include <random>
#include <set>

#include "overtrade/panel.hpp"
#include "test_support.hpp"

using namespace overtrade;
using namespace overtrade::econometrics;
using testing::ymd;

namespace {

microstructure::SlotMetrics metric(std::string stock, Date d, Slot s, std::optional<double> et) {
  microstructure::SlotMetrics m;
  m.stock_id = std::move(stock);
  m.slot = {d, s};
  if (et) m.et_total = microstructure::ExcessTurnover{*et, 1.0, 5};
  return m;
}

sentiment::HourSentiment hour(std::string stock, Date d, Slot s, double v) {
  return {std::move(stock), {d, s}, v, 2.0 * v, 2};
}

std::vector<PanelRow> random_panel(std::mt19937_64& rng, int stocks, int days) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<PanelRow> rows;
  auto cal = weekday_calendar(ymd(2021, 1, 4), static_cast<std::size_t>(days));
  for (int s = 0; s < stocks; ++s) {
    for (auto d : cal.days()) {
      for (Slot slot : {Slot::S2, Slot::S3, Slot::S4}) {
        PanelRow r;
        r.stock_id = "S" + std::to_string(100 + s);
        r.date = d;
        r.slot = slot;
        for (int k = 0; k < slot_index(slot) - 1; ++k) r.sentiment_lag[static_cast<std::size_t>(k)] = z(rng) * 0.5;
        for (auto& e : r.et) e = 0.1 * *r.sentiment_lag[0] + 0.3 * z(rng);
        r.controls = Controls{1.0 + std::abs(z(rng)), 0.01 * z(rng), 0.02 * z(rng)};
        r.regime = d.days % 2 ? regimes::Regime::Bull : regimes::Regime::Bear;
        r.tier = s % 3 == 0 ? regimes::CapTier::Large : s % 3 == 1 ? regimes::CapTier::Mid : regimes::CapTier::Small;
        rows.push_back(r);
      }
    }
  }
  return rows;
}

}  // namespace

TEST_CASE("panel rows pair each slot with earlier same-day sentiment") {
  const auto d = ymd(2024, 1, 2);
  std::vector<microstructure::SlotMetrics> metrics = {
      metric("A", d, Slot::S1, 0.1), metric("A", d, Slot::S2, 0.2), metric("A", d, Slot::S3, 0.3),
      metric("A", d, Slot::S4, 0.4)};
  std::vector<sentiment::HourSentiment> index = {hour("A", d, Slot::S1, 0.5), hour("A", d, Slot::S2, -0.25),
                                                 hour("A", d, Slot::S3, 1.0)};
  auto rows = build_panel(index, metrics, {}, {});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].slot == Slot::S2);
  CHECK(rows[0].sentiment_lag[0] == 0.5);
  CHECK_FALSE(rows[0].sentiment_lag[1]);
  CHECK(rows[2].slot == Slot::S4);
  CHECK(rows[2].sentiment_lag[0] == 1.0);
  CHECK(rows[2].sentiment_lag[1] == -0.25);
  CHECK(rows[2].sentiment_lag[2] == 0.5);
  CHECK(rows[2].et_of(EtColumn::All) == 0.4);
  CHECK_FALSE(rows[2].et_of(EtColumn::Institutional));
  CHECK_FALSE(rows[2].controls);
  CHECK_FALSE(rows[2].regime);

  PanelOptions sums;
  sums.sentiment = SentimentMeasure::Sum;
  CHECK(build_panel(index, metrics, {}, {}, sums)[0].sentiment_lag[0] == 1.0);
}

TEST_CASE("a slot without prior sentiment or without excess turnover is skipped") {
  const auto d = ymd(2024, 1, 2);
  std::vector<microstructure::SlotMetrics> metrics = {metric("A", d, Slot::S2, 0.2),
                                                      metric("A", d, Slot::S3, std::nullopt)};
  std::vector<sentiment::HourSentiment> index = {hour("A", d, Slot::S2, 0.5)};
  CHECK(build_panel(index, metrics, {}, {}).empty());
}

TEST_CASE("duplicate input keys are integrity errors") {
  const auto d = ymd(2024, 1, 2);
  std::vector<microstructure::SlotMetrics> metrics = {metric("A", d, Slot::S2, 0.2)};
  std::vector<sentiment::HourSentiment> dup_index = {hour("A", d, Slot::S1, 0.5), hour("A", d, Slot::S1, 0.1)};
  CHECK_THROWS_AS(build_panel(dup_index, metrics, {}, {}), Error);
  std::vector<microstructure::SlotMetrics> dup_metrics = {metric("A", d, Slot::S2, 0.2), metric("A", d, Slot::S2, 0.3)};
  std::vector<sentiment::HourSentiment> index = {hour("A", d, Slot::S1, 0.5)};
  CHECK_THROWS_AS(build_panel(index, dup_metrics, {}, {}), Error);
  std::vector<ingest::DailyFundamentals> dup_fund = {{"A", d, 1, 0, 0, 1e9}, {"A", d, 2, 0, 0, 1e9}};
  CHECK_THROWS_AS(build_panel(index, metrics, {}, dup_fund), Error);
}

TEST_CASE("regime, tier and controls attach by exchange and date") {
  const auto d = ymd(2024, 1, 3);
  std::vector<microstructure::SlotMetrics> metrics = {metric("600001.SH", d, Slot::S2, 0.2),
                                                      metric("000002.SZ", d, Slot::S2, 0.1)};
  std::vector<sentiment::HourSentiment> index = {hour("600001.SH", d, Slot::S1, 0.5),
                                                 hour("000002.SZ", d, Slot::S1, 0.5)};
  RegimeMap map;
  map["SH"] = {{regimes::Regime::Bear, ymd(2024, 1, 1), ymd(2024, 1, 31), 0, 20}};
  std::vector<ingest::DailyFundamentals> fund = {{"600001.SH", d, 1.5, 0.01, 0.02, 2e11},
                                                 {"000002.SZ", ymd(2024, 1, 2), 1.1, 0.0, 0.0, 5e9}};
  auto rows = build_panel(index, metrics, map, fund);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].stock_id == "000002.SZ");
  CHECK_FALSE(rows[0].regime);
  CHECK_FALSE(rows[0].tier);
  CHECK_FALSE(rows[0].controls);
  CHECK(rows[1].regime == regimes::Regime::Bear);
  CHECK(rows[1].tier == regimes::CapTier::Large);
  REQUIRE(rows[1].controls);
  CHECK(rows[1].controls->pb == 1.5);

  PanelOptions fixed;
  fixed.tier_eval_date = ymd(2024, 1, 2);
  auto rows2 = build_panel(index, metrics, map, fund, fixed);
  CHECK(rows2[0].tier == regimes::CapTier::Small);
  CHECK_FALSE(rows2[1].tier);
}

TEST_CASE("the cell grid has the published shape") {
  auto grid = table_grid();
  CHECK(grid.size() == 78);
  std::map<std::string, int> per_table;
  std::set<std::string> ids;
  for (const auto& c : grid) {
    ++per_table[c.table()];
    ids.insert(c.id());
  }
  CHECK(ids.size() == grid.size());
  CHECK(per_table["T2"] == 3);
  CHECK(per_table["T3"] == 6);
  CHECK(per_table["T4"] == 18);
  CHECK(per_table["T5"] == 27);
  CHECK(per_table["robustness"] == 24);
  CHECK(ids.contains("base.full.all.S2"));
  CHECK(ids.contains("lag3.full.retail.S4"));

  TableToggles only_base{true, false, false, false, false, false};
  CHECK(table_grid(only_base).size() == 9);
}

TEST_CASE("regime and tier cells partition the full-sample cell") {
  std::mt19937_64 rng(5);
  auto panel = random_panel(rng, 9, 30);
  for (const auto& cell : table_grid()) {
    if (cell.regime || cell.tier || cell.variant != Variant::Base) continue;
    const auto full = select_cell(panel, cell).y.size();
    Eigen::Index by_regime = 0, by_tier = 0;
    for (auto r : {regimes::Regime::Bull, regimes::Regime::Bear}) {
      auto sub = cell;
      sub.regime = r;
      by_regime += select_cell(panel, sub).y.size();
    }
    for (auto t : {regimes::CapTier::Large, regimes::CapTier::Mid, regimes::CapTier::Small}) {
      auto sub = cell;
      sub.tier = t;
      by_tier += select_cell(panel, sub).y.size();
    }
    CHECK(by_regime == full);
    CHECK(by_tier == full);
  }
}

TEST_CASE("cells run with full reports, insufficient ones are marked") {
  std::mt19937_64 rng(6);
  auto panel = random_panel(rng, 6, 40);
  auto grid = table_grid();
  auto reports = run_table(panel, grid, {});
  REQUIRE(reports.size() == grid.size());
  for (std::size_t i = 0; i < reports.size(); ++i) {
    CHECK(reports[i].cell.id() == grid[i].id());
    CHECK(reports[i].sufficient);
    CHECK(reports[i].white);
    CHECK(reports[i].lm);
    CHECK(reports[i].coefficient(grid[i].variant == Variant::Lag2   ? "sentiment_lag2"
                                 : grid[i].variant == Variant::Lag3 ? "sentiment_lag3"
                                                                    : "sentiment_lag1"));
  }

  std::vector<PanelRow> tiny(panel.begin(), panel.begin() + 9);  // 3 rows per slot
  CellSpec base;
  auto r = run_cell(tiny, base, {});
  CHECK_FALSE(r.sufficient);
  CHECK(r.n_obs == 3);
  CHECK(r.note == "underdetermined");
}

TEST_CASE("table results do not depend on thread count") {
  std::mt19937_64 rng(8);
  auto panel = random_panel(rng, 8, 25);
  auto grid = table_grid();
  RunOptions one, many;
  many.threads = 6;
  testing::TempDir dir;
  write_reports(dir / "a.tsv", run_table(panel, grid, one));
  write_reports(dir / "b.tsv", run_table(panel, grid, many));
  CHECK(testing::read_text(dir / "a.tsv") == testing::read_text(dir / "b.tsv"));
}

TEST_CASE("panel files round trip") {
  std::mt19937_64 rng(10);
  auto panel = random_panel(rng, 3, 4);
  panel[1].controls.reset();
  panel[2].regime.reset();
  panel[3].et[1].reset();
  testing::TempDir dir;
  write_panel(dir / "p.tsv", panel);
  auto back = read_panel(dir / "p.tsv");
  write_panel(dir / "q.tsv", back);
  CHECK(testing::read_text(dir / "p.tsv") == testing::read_text(dir / "q.tsv"));
  REQUIRE(back.size() == panel.size());
  CHECK_FALSE(back[1].controls);
  CHECK_FALSE(back[2].regime);
  CHECK_FALSE(back[3].et[1]);
  CHECK(back[0].et[0] == panel[0].et[0]);
}

TEST_CASE("significance stars") {
  CHECK(significance_stars(0.005) == "***");
  CHECK(significance_stars(0.01) == "**");
  CHECK(significance_stars(0.049) == "**");
  CHECK(significance_stars(0.05) == "*");
  CHECK(significance_stars(0.10) == "");
  CHECK(significance_stars(0.5) == "");
}
