// Copyright 2026 The tracesyn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "datagen.hpp"
#include "doctest.h"
#include "error.hpp"
#include "evaluation.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "rng.hpp"
#include "sketch.hpp"

using namespace tracesyn;
using namespace tracesyn::testing;

TEST_SUITE("evaluation") {
  TEST_CASE("jsd examples") {
    std::vector<double> p = {1, 0};
    std::vector<double> q = {0, 1};
    CHECK(jsd(p, q) == doctest::Approx(1.0));
    CHECK(jsd(p, p) == 0.0);
    std::vector<double> zero = {0, 0};
    CHECK_THROWS_AS(jsd(zero, p), Error);
    std::vector<double> a = {0.5, 0.5};
    std::vector<double> b = {0.9, 0.1};
    CHECK(jsd(a, b) == doctest::Approx(0.1468).epsilon(1e-3));
    CHECK(jsd(p, a) == doctest::Approx(0.3113).epsilon(1e-4));
    CHECK(jsd(a, b) == jsd(b, a));
    std::map<std::string, double> mp = {{"x", 3}, {"y", 1}};
    std::map<std::string, double> mq = {{"y", 1}, {"z", 1}};
    CHECK(jsd(mp, mq) == doctest::Approx(jsd_oracle({3, 1, 0}, {0, 1, 1})));
    Rng rng(4);
    for (int t = 0; t < 200; ++t) {
      std::size_t n = static_cast<std::size_t>(rng.uniform_int(1, 40));
      std::vector<double> x(n);
      std::vector<double> y(n);
      for (auto& v : x) v = rng.uniform01() < 0.2 ? 0.0 : rng.uniform(0, 10);
      x[0] = rng.uniform(0.01, 10);
      for (auto& v : y) v = rng.uniform(0.01, 10);
      double got = jsd(x, y);
      CHECK(got >= 0.0);
      CHECK(got <= 1.0);
      CHECK(got == doctest::Approx(jsd_oracle(x, y)).epsilon(1e-9));
    }
  }

  TEST_CASE("emd examples and oracle") {
    CHECK(emd_1d({{0, 1}}, {{3, 1}}) == doctest::Approx(3.0));
    CHECK(emd_1d({{0, 1}}, {{1, 1}}) == doctest::Approx(1.0));
    CHECK(emd_1d({{0, 0.5}, {2, 0.5}}, {{1, 1.0}}) == doctest::Approx(1.0));
    CHECK(emd_1d({{0, 1}, {1, 1}}, {{0, 1}, {1, 1}}) == 0.0);
    CHECK(emd_1d({{0, 1}, {10, 1}}, {{5, 2}}) == doctest::Approx(5.0));
    Rng rng(5);
    for (int t = 0; t < 200; ++t) {
      WeightedValues p;
      WeightedValues q;
      for (int i = 0, k = static_cast<int>(rng.uniform_int(1, 15)); i < k; ++i)
        p.emplace_back(rng.uniform(-50, 50), rng.uniform(0.1, 5));
      for (int i = 0, k = static_cast<int>(rng.uniform_int(1, 15)); i < k; ++i)
        q.emplace_back(rng.uniform(-50, 50), rng.uniform(0.1, 5));
      CHECK(emd_1d(p, q) == doctest::Approx(emd_quantile_oracle(p, q)).epsilon(1e-9).scale(1.0));
    }
    CHECK_THROWS_AS(emd_1d({}, {{1, 1}}), Error);
    auto random_values = [&] {
      WeightedValues v;
      for (int i = 0, k = static_cast<int>(rng.uniform_int(1, 10)); i < k; ++i)
        v.emplace_back(rng.uniform(0, 20), rng.uniform(0.1, 3));
      return v;
    };
    for (int t = 0; t < 300; ++t) {
      auto x = random_values();
      auto y = random_values();
      auto z = random_values();
      CHECK(emd_1d(x, z) <= emd_1d(x, y) + emd_1d(y, z) + 1e-9);
    }
  }

  TEST_CASE("normalize_emds maps into [0.1, 0.9]") {
    auto n = normalize_emds({2, 4, 6});
    CHECK(n[0] == doctest::Approx(0.1));
    CHECK(n[1] == doctest::Approx(0.5));
    CHECK(n[2] == doctest::Approx(0.9));
    CHECK(normalize_emds({3, 3}) == std::vector<double>{0.5, 0.5});
    CHECK(normalize_emds({}).empty());
  }

  TEST_CASE("relative error") {
    CHECK(relative_error(110, 100) == doctest::Approx(0.1));
    CHECK(relative_error(0.2, 0.1) == doctest::Approx(1.0));
    CHECK(relative_error(90, 100) == doctest::Approx(0.1));
    CHECK(relative_error(0, 0) == 0.0);
    CHECK(relative_error(5, 0) == std::numeric_limits<double>::infinity());
  }

  TEST_CASE("spearman with ties matches the counting oracle") {
    std::vector<double> a = {1, 2, 3, 4};
    std::vector<double> b = {10, 20, 30, 40};
    std::vector<double> c = {4, 3, 2, 1};
    CHECK(spearman_rank(a, b) == doctest::Approx(1.0));
    CHECK(spearman_rank(a, c) == doctest::Approx(-1.0));
    std::vector<double> tied = {1, 2, 2, 4};
    CHECK(spearman_rank(tied, a) == doctest::Approx(spearman_oracle(tied, a)));
    CHECK(spearman_rank(tied, a) == doctest::Approx(0.9486833).epsilon(1e-6));
    std::vector<double> flat = {2, 2, 2, 2};
    CHECK(spearman_rank(a, flat) == 0.0);
    CHECK(average_ranks(std::vector<double>{5, 1, 5, 3}) == std::vector<double>{3.5, 1, 3.5, 2});
    Rng rng(6);
    for (int t = 0; t < 100; ++t) {
      std::size_t n = static_cast<std::size_t>(rng.uniform_int(2, 30));
      std::vector<double> x(n);
      std::vector<double> y(n);
      for (auto& v : x) v = static_cast<double>(rng.uniform_int(0, 5));
      for (auto& v : y) v = static_cast<double>(rng.uniform_int(0, 5));
      bool flat_x = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
      bool flat_y = std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
      if (flat_x || flat_y) continue;
      CHECK(spearman_rank(x, y) == doctest::Approx(spearman_oracle(x, y)).epsilon(1e-12));
    }
    std::vector<double> shorter = {1, 2};
    CHECK_THROWS_AS(spearman_rank(a, shorter), Error);
  }
}

TEST_SUITE("sketch") {
  TEST_CASE("count-min never underestimates") {
    std::mt19937_64 g(1);
    std::size_t violations = 0;
    for (std::uint64_t stream = 0; stream < 1000; ++stream) {
      std::size_t width = 8 + g() % 64;
      std::size_t depth = 1 + g() % 5;
      CountMinSketch cms(width, depth, stream);
      std::map<std::uint64_t, std::uint64_t> truth;
      std::size_t keys = 1 + g() % 300;
      std::size_t events = 1 + g() % 2000;
      for (std::size_t e = 0; e < events; ++e) {
        std::uint64_t key = g() % keys * 0x9e3779b97f4a7c15ULL;
        ++truth[key];
        cms.insert(key);
      }
      for (const auto& [k, v] : truth) violations += cms.query(k) < v;
    }
    CHECK(violations == 0);
  }

  TEST_CASE("count-min examples") {
    CountMinSketch wide(4096, 4, 1);
    wide.insert(sketch_key("a"), 3);
    wide.insert(sketch_key("b"));
    CHECK(wide.query(sketch_key("a")) == 3);
    CHECK(wide.query(sketch_key("b")) == 1);
    // Zipf stream over 10^4 keys: the 99th percentile overestimate stays
    // within e / width of the stream length.
    std::mt19937_64 g(3);
    std::vector<double> weights(10000);
    for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = 1.0 / static_cast<double>(i + 1);
    std::discrete_distribution<std::size_t> zipf(weights.begin(), weights.end());
    CountMinSketch cms(2000, 5, 17);
    std::vector<std::uint64_t> truth(weights.size(), 0);
    const std::size_t n = 200000;
    for (std::size_t e = 0; e < n; ++e) {
      std::size_t k = zipf(g);
      ++truth[k];
      cms.insert(k + 1);
    }
    std::vector<double> over;
    for (std::size_t k = 0; k < truth.size(); ++k) {
      if (truth[k] > 0) over.push_back(static_cast<double>(cms.query(k + 1) - truth[k]));
    }
    std::sort(over.begin(), over.end());
    CHECK(over[over.size() * 99 / 100] <= std::exp(1.0) / 2000.0 * static_cast<double>(n));
  }

  TEST_CASE("count sketch examples") {
    CountSketch cs(512, 5, 2);
    CHECK(cs.query(99) == 0.0);
    cs.insert(99, 7);
    CHECK(cs.query(99) == doctest::Approx(7.0));
  }

  TEST_CASE("count sketch rows are unbiased") {
    const std::uint64_t target = 12345;
    const std::uint64_t true_count = 50;
    const int trials = 4000;
    double sum = 0.0;
    double sumsq = 0.0;
    for (int t = 0; t < trials; ++t) {
      CountSketch cs(32, 1, static_cast<std::uint64_t>(t));
      cs.insert(target, static_cast<std::int64_t>(true_count));
      for (std::uint64_t k = 1; k <= 300; ++k) cs.insert(k * 7919, static_cast<std::int64_t>(k % 17 + 1));
      double est = static_cast<double>(cs.row_estimate(0, target));
      sum += est;
      sumsq += est * est;
    }
    double mean = sum / trials;
    double se = std::sqrt((sumsq / trials - mean * mean) / trials);
    CHECK(std::abs(mean - static_cast<double>(true_count)) <= 3.0 * se);
    CountSketch exact(1024, 5, 3);
    exact.insert(42, 9);
    CHECK(exact.query(42) == doctest::Approx(9.0));
    CHECK_THROWS_AS(CountSketch(0, 1, 0), Error);
    CHECK_THROWS_AS(CountMinSketch(4, 0, 0), Error);
  }

  TEST_CASE("heavy hitters against an identical copy score zero") {
    auto raw = ugr16_like(20000, 3);
    auto syn = raw;
    SketchConfig cfg;
    for (auto alg : {SketchAlgorithm::kCountMin, SketchAlgorithm::kCountSketch}) {
      for (const char* attr : {"srcip", "dstport"}) {
        auto r = heavy_hitter_error(raw, syn, attr, alg, cfg, 9);
        CHECK(r.relative_error == 0.0);
        CHECK(r.err_raw == r.err_syn);
        CHECK(r.raw_heavy_hitters > 0);
      }
    }
  }

  TEST_CASE("a missing dominant key gives a large finite error") {
    TraceDataset raw;
    raw.schema = {field("dstport", FieldKind::kPort)};
    TraceDataset syn = raw;
    for (int i = 0; i < 5000; ++i) {
      raw.records.push_back({{std::int64_t{i < 2500 ? 53 : 1024 + i % 2000}}});
      syn.records.push_back({{std::int64_t{1024 + i % 200}}});
    }
    SketchConfig cfg;
    cfg.width = 64;
    auto r = heavy_hitter_error(raw, syn, "dstport", SketchAlgorithm::kCountMin, cfg, 1);
    CHECK(r.raw_heavy_hitters >= 1);
    CHECK(std::isfinite(r.relative_error));
    CHECK(r.syn_heavy_hitters == 200);
    CHECK(r.relative_error > 0.0);
    MESSAGE("relative error with the dominant key missing: " << r.relative_error);
    TraceDataset sparse = raw;
    sparse.records.assign(raw.records.begin() + 2500, raw.records.end());
    SketchConfig strict;
    strict.heavy_hitter_fraction = 0.9;
    CHECK(std::isinf(heavy_hitter_error(sparse, syn, "dstport", SketchAlgorithm::kCountMin, strict, 1).relative_error));
  }

  TEST_CASE("ten runs cut the variance about tenfold") {
    std::map<std::string, std::uint64_t> counts;
    for (int i = 0; i < 2000; ++i) counts[std::to_string(i)] = static_cast<std::uint64_t>(i < 20 ? 300 : 1 + i % 4);
    SketchConfig one;
    one.width = 32;
    one.runs = 1;
    SketchConfig ten = one;
    ten.runs = 10;
    auto variance = [&](const SketchConfig& cfg) {
      double s = 0.0;
      double ss = 0.0;
      const int seeds = 300;
      for (int seed = 0; seed < seeds; ++seed) {
        double e = sketch_error(counts, SketchAlgorithm::kCountSketch, cfg, static_cast<std::uint64_t>(seed) * 7919);
        s += e;
        ss += e * e;
      }
      return ss / seeds - (s / seeds) * (s / seeds);
    };
    double ratio = variance(one) / variance(ten);
    MESSAGE("variance ratio one run / ten runs: " << ratio);
    CHECK(ratio > 6.0);
    CHECK(ratio < 16.0);
  }

  TEST_CASE("sketch error averages the configured runs") {
    std::map<std::string, std::uint64_t> counts;
    for (int i = 0; i < 3000; ++i) counts[std::to_string(i)] = static_cast<std::uint64_t>(i % 50 == 0 ? 500 : 1 + i % 3);
    SketchConfig cfg;
    cfg.width = 64;
    cfg.depth = 3;
    std::size_t hh = 0;
    double got = sketch_error(counts, SketchAlgorithm::kCountMin, cfg, 5, &hh);
    CHECK(hh == 60);
    double manual = 0.0;
    for (std::size_t run = 0; run < cfg.runs; ++run) {
      CountMinSketch s(cfg.width, cfg.depth, substream_seed(5, "sketch/run/" + std::to_string(run)));
      for (const auto& [k, c] : counts) s.insert(sketch_key(k), c);
      double err = 0.0;
      for (const auto& [k, c] : counts) {
        if (c >= 500) err += static_cast<double>(s.query(sketch_key(k)) - c);
      }
      manual += err / 60.0;
    }
    CHECK(got == doctest::Approx(manual / static_cast<double>(cfg.runs)));
    CHECK(got > 0.0);
    CHECK(sketch_error(counts, SketchAlgorithm::kCountMin, cfg, 5) == got);
    SketchConfig bad;
    bad.runs = 0;
    CHECK_THROWS_AS(validate(bad), Error);
  }
}

TEST_SUITE("report") {
  TEST_CASE("evaluate an identical copy") {
    auto raw = ugr16_like(3000, 8);
    EvalOptions opt;
    opt.seed = 4;
    opt.epsilon = 2.0;
    auto report = evaluate(raw, raw, opt);
    CHECK(report.raw_records == 3000);
    CHECK(!report.attributes.empty());
    for (const auto& s : report.attributes) CHECK(s.value == doctest::Approx(0.0).epsilon(1e-12));
    for (const auto& s : report.sketches) {
      if (s.result.raw_heavy_hitters > 0) {
        CHECK(s.result.relative_error == 0.0);
      } else {
        CHECK(std::isinf(s.result.relative_error));
      }
    }
    auto doc = nlohmann::json::parse(report.to_json());
    CHECK(doc.at("metadata").at("seed") == 4);
    CHECK(doc.at("metadata").at("epsilon") == 2.0);
    CHECK(doc.contains("attributes"));
    CHECK(doc.contains("sketches"));
    std::string csv = report.to_csv();
    CHECK(csv.rfind("section,attribute,metric,value", 0) == 0);
  }

  TEST_CASE("metric choice follows attribute kind") {
    auto raw = ugr16_like(2000, 1);
    auto syn = ugr16_like(2000, 2);
    EvalOptions opt;
    opt.metrics = {"jsd", "emd"};
    auto report = evaluate(raw, syn, opt);
    std::map<std::string, std::string> metric;
    for (const auto& s : report.attributes) metric[s.attribute] = s.metric;
    CHECK(metric["srcip"] == "jsd");
    CHECK(metric["dstport"] == "jsd");
    CHECK(metric["proto"] == "jsd");
    CHECK(metric["byt"] == "emd");
    CHECK(metric["ts"] == "emd");
    CHECK(report.sketches.empty());
  }

  TEST_CASE("evaluation errors") {
    auto raw = ugr16_like(100, 1);
    EvalOptions opt;
    opt.metrics = {"bogus"};
    CHECK_THROWS_AS(evaluate(raw, raw, opt), Error);
    auto other = planted_correlation(100, 1);
    CHECK_THROWS_AS(evaluate(raw, other), Error);
    TraceDataset empty;
    empty.schema = raw.schema;
    CHECK_THROWS_AS(evaluate(raw, empty), Error);
  }
}
