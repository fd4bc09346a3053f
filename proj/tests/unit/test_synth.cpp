#include <doctest.h>

#include "overtrade/pipeline.hpp"
#include "overtrade/synth.hpp"
#include "test_support.hpp"

using namespace overtrade;
namespace fs = std::filesystem;

namespace {

synth::SynthConfig small(std::uint64_t seed) {
  synth::SynthConfig c;
  c.stocks = 12;
  c.days = 60;
  c.seed = seed;
  c.baseline_window = 10;
  c.min_window = 5;
  return c;
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = testing::read_text(e.path());
  }
  return files;
}

}  // namespace

TEST_CASE("the same seed gives the same files for any thread count") {
  testing::TempDir a, b, c;
  auto cfg = small(5);
  synth::generate_synthetic(cfg, a.path());
  cfg.threads = 4;
  synth::generate_synthetic(cfg, b.path());
  synth::generate_synthetic(small(6), c.path());
  auto ta = tree_contents(a.path());
  CHECK(ta == tree_contents(b.path()));
  CHECK(ta.at("posts.tsv") != tree_contents(c.path()).at("posts.tsv"));
}

TEST_CASE("generated data runs through the pipeline with the planted stocks filtered") {
  testing::TempDir data, out;
  auto cfg = small(9);
  cfg.days = 160;  // long enough for the 45-day halt
  auto summary = synth::generate_synthetic(cfg, data.path());
  auto config = pipeline::load_config(summary.config);
  config.out_dir = out.path();
  pipeline::run_pipeline(config);
  auto stocks = testing::read_text(out / "stocks.tsv");
  CHECK(stocks.find("sparse") != std::string::npos);
  CHECK(stocks.find("suspended") != std::string::npos);
  for (const auto& row : pipeline::read_manifest(out / "manifest.tsv")) {
    if (row.stage == "ingest.stock_filter") {
      CHECK(row.rows_in == 14);
      CHECK(row.rows_accepted == 12);
    }
    if (row.stage == "regress.cells") CHECK(row.rows_in == 78);
  }
}

TEST_CASE("a planted effect is visible in the base cell") {
  testing::TempDir data, out;
  auto cfg = small(21);
  cfg.stocks = 30;
  cfg.days = 120;
  cfg.cleaning_rows = false;
  auto summary = synth::generate_synthetic(cfg, data.path());
  auto config = pipeline::load_config(summary.config);
  config.out_dir = out.path();
  config.tables = {true, false, false, false, false, false};
  pipeline::run_pipeline(config);
  auto text = testing::read_text(out / "regressions.tsv");
  auto pos = text.find("base.full.all.S2");
  REQUIRE(pos != std::string::npos);
  auto line = text.substr(pos, text.find('\n', pos) - pos);
  auto fields = tsv::split(line);
  // cell_id table variant filter panel slot status note n_obs alpha alpha_se alpha_t alpha_p beta
  REQUIRE(fields.size() > 13);
  CHECK(fields[6] == "ok");
  CHECK(*tsv::parse_double(fields[13]) == doctest::Approx(0.13).epsilon(0.4));
}
