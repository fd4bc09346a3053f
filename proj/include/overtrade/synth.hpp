#pragma once

// Seeded synthetic dataset with a planted sentiment -> excess turnover effect.
//
// Construction, per stock:
//  * A mood process m follows m' = 0.6 m + N(0, 0.8) once per slot. Each slot
//    gets 1-5 scored posts (plus, sometimes, a post of filler characters that
//    scores nothing). A post is positive with probability 1 / (1 + e^(-2m))
//    and is built from whole lexicon words separated by full-width commas,
//    so its score is known exactly: +-1 (one word, or a negation plus an
//    opposite word), +-1/3 (two words of one sign and one of the other) or 0.
//  * The slot sentiment s_h is the mean score of its posts.
//  * For each investor class c, the generator keeps the realized turnover of
//    the same slot on earlier days and forms the same baseline the metrics
//    stage will form (mean of the last `baseline_window` values, none with
//    fewer than `min_window`). With a baseline B, the target excess turnover
//    is et = alpha_c + beta_c * s_(h-1) + noise * z (z standard normal, and
//    no sentiment term in the first slot), floored at -0.9, and the slot's
//    traded value is B * (1 + et) * shares_outstanding. Without a baseline the
//    slot trades near a per-stock base level.
//  * Institutional value is cut into ticks of 1-2 million CNY, retail value
//    into ticks of at most 180,000 CNY at prices of at least 3 CNY, so every
//    tick falls on the intended side of both classification thresholds.
//  * Because the combined baseline is the sum of the class baselines, the
//    all-investor excess turnover is a weighted mean of the class values and
//    carries beta exactly when both classes share it.
//
// Extra rows exercise the cleaning path: lunch-time, malformed-timestamp,
// empty and bot posts, plus one sparse-posting stock and one stock halted for
// 45 days. Fundamentals put stocks in the large, mid and small cap tiers in
// turn; the SH index is a noisy tent (bull then bear) and SZ its mirror.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "overtrade/common.hpp"

namespace overtrade::synth {

namespace fs = std::filesystem;

struct SynthConfig {
  std::size_t stocks = 100;
  std::size_t days = 250;
  Date start = Date::from_ymd(2020, 1, 2);
  double alpha_inst = 0.0;
  double alpha_retail = 0.0;
  double beta_inst = 0.13;
  double beta_retail = 0.13;
  double noise = 0.3;
  int baseline_window = 20;
  int min_window = 10;
  bool cleaning_rows = true;  // noise posts and the two filtered stocks
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::vector<fs::path> lexicon;  // defaults to the bundled word lists
  std::vector<fs::path> negations;
};

struct SynthSummary {
  std::size_t posts = 0;
  std::size_t trades = 0;
  fs::path config;  // pipeline config written next to the data
};

std::vector<fs::path> bundled_lexicon();
std::vector<fs::path> bundled_negations();
fs::path bundled_accuracy_fixture();

// Writes calendar, posts, trades, shares, fundamentals, membership, both index
// series, copies of the word lists and config.txt into `out_dir`. The same
// config produces byte-identical files for any thread count.
SynthSummary generate_synthetic(const SynthConfig& config, const fs::path& out_dir);

}  // namespace overtrade::synth
