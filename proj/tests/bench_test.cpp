// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#include "arc/bench.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "arc/errors.hpp"
#include "test_support.hpp"

namespace arc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::shared_ptr<const ControllerWeights> forcing(LrDecision d) {
  auto w = std::make_shared<ControllerWeights>();
  w->dense2.bias(0, static_cast<Eigen::Index>(index_of(d))) = 10.0;
  return w;
}

ExperimentGrid small_grid() {
  ExperimentGrid g;
  g.task_ids = {"mlp_rings"};
  g.schedulers = default_schedulers();
  g.lr0_values = {0.05, 0.3, 2.0};
  g.seeds = {11, 12, 13, 14, 15};
  g.horizon = 10;
  g.weights = forcing(LrDecision::kIncrease);
  return g;
}

// One cell per (scheduler, lr0) with the given final losses.
BenchmarkReport hand_report(const std::vector<std::vector<std::vector<double>>>& finals) {
  BenchmarkReport r;
  r.task_ids = {"t"};
  r.horizon = 1;
  for (std::size_t s = 0; s < finals.size(); ++s) r.schedulers.push_back("s" + std::to_string(s));
  for (std::size_t l = 0; l < finals[0].size(); ++l) r.lr0_values.push_back(0.1 * static_cast<double>(l + 1));
  for (std::size_t i = 0; i < finals[0][0].size(); ++i) r.seeds.push_back(i);
  for (std::size_t s = 0; s < finals.size(); ++s) {
    for (std::size_t l = 0; l < finals[s].size(); ++l) {
      CellResult c;
      c.task_id = "t";
      c.scheduler = r.schedulers[s];
      c.lr0 = r.lr0_values[l];
      std::vector<double> kept;
      for (std::size_t i = 0; i < finals[s][l].size(); ++i) {
        const double v = finals[s][l][i];
        SeedRun run;
        run.seed = i;
        run.final_val_loss = v;
        run.diverged = !std::isfinite(v);
        run.trace.rows.push_back({0, c.lr0, v, v, std::nullopt});
        c.runs.push_back(run);
        if (run.diverged) {
          ++c.diverged_count;
        } else {
          kept.push_back(v);
        }
      }
      if (!kept.empty()) {
        const Stats st = population_stats(kept);
        c.mean = st.mean;
        c.stddev = st.stddev;
      }
      std::vector<double> all = finals[s][l];
      c.median_run = median_index(all);
      r.cells.push_back(c);
    }
  }
  return r;
}

TEST(Stats, PopulationFormula) {
  const std::vector<double> v{1, 2, 3, 4, 5};
  const Stats s = population_stats(v);
  EXPECT_DOUBLE_EQ(s.mean, 3.0);
  EXPECT_DOUBLE_EQ(s.stddev, std::sqrt(2.0));
  EXPECT_EQ(format_mean_std(s.mean, s.stddev, 1), "3.0 ± 1.4");
  const Stats one = population_stats(std::vector<double>{0.25});
  EXPECT_EQ(one.stddev, 0.0);
  EXPECT_EQ(format_mean_std(one.mean, one.stddev, 1), "0.2 ± 0.0");
  EXPECT_EQ(format_mean_std(0.123456, 0.01, 3), "0.123 ± 0.010");
  EXPECT_THROW(population_stats(std::vector<double>{}), UsageError);
}

TEST(Stats, MedianPicksLowerMiddleAndSkipsDiverged) {
  EXPECT_EQ(median_index(std::vector<double>{5, 1, 3}), 2u);
  EXPECT_EQ(median_index(std::vector<double>{4, 1, 3, 2}), 3u);
  EXPECT_EQ(median_index(std::vector<double>{2, 2, 2}), 1u);
  EXPECT_EQ(median_index(std::vector<double>{1, 1}), 0u);
  EXPECT_EQ(median_index(std::vector<double>{kInf, 3, 1, kInf}), 2u);
  EXPECT_FALSE(median_index(std::vector<double>{kInf, kInf}).has_value());
}

TEST(Tables, BoldsBestMeanPerColumnIncludingTies) {
  // Column 0: s1 best. Column 1: s0 and s2 tie.
  const BenchmarkReport r = hand_report({{{3, 3}, {1, 1}}, {{2, 2}, {4, 4}}, {{5, 5}, {1, 1}}});
  const std::string md = table_markdown(r, "t", 1);
  EXPECT_NE(md.find("| s0 | 3.0 ± 0.0 | **1.0 ± 0.0** |"), std::string::npos) << md;
  EXPECT_NE(md.find("| s1 | **2.0 ± 0.0** | 4.0 ± 0.0 |"), std::string::npos) << md;
  EXPECT_NE(md.find("| s2 | 5.0 ± 0.0 | **1.0 ± 0.0** |"), std::string::npos) << md;
  const std::string csv = table_csv(r, "t", 1);
  EXPECT_NE(csv.find("scheduler"), std::string::npos);
}

TEST(Tables, DivergedCells) {
  const BenchmarkReport r = hand_report({{{1, kInf, 3}}, {{kInf, kInf, kInf}}});
  const std::string md = table_markdown(r, "t", 1);
  EXPECT_NE(md.find("| s0 | **2.0 ± 1.0 (1 diverged)** |"), std::string::npos) << md;
  EXPECT_NE(md.find("| s1 | diverged |"), std::string::npos) << md;
  EXPECT_EQ(r.cells[0].median_run, 0u);
  EXPECT_FALSE(r.cells[1].median_run.has_value());
}

TEST(Grid, Validation) {
  ExperimentGrid g = small_grid();
  EXPECT_NO_THROW(g.validate());
  g.seeds = {1, 1};
  EXPECT_THROW(g.validate(), UsageError);
  g = small_grid();
  g.weights = nullptr;
  EXPECT_THROW(g.validate(), UsageError);
  g = small_grid();
  g.horizon = 5;  // fewer epochs than controller calls
  EXPECT_THROW(g.validate(), UsageError);
  g = small_grid();
  g.lr0_values = {0.1, 0.1};
  EXPECT_THROW(g.validate(), UsageError);
  g = small_grid();
  g.task_ids = {"nope"};
  EXPECT_THROW(run_grid(g), UsageError);
  EXPECT_THROW(parse_scheduler_kind("adagrad"), UsageError);
  for (const auto& s : default_schedulers()) EXPECT_EQ(parse_scheduler_kind(to_string(s.kind)), s.kind);
}

class SmallGrid : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { report_ = new BenchmarkReport(run_grid(small_grid())); }
  static void TearDownTestSuite() {
    delete report_;
    report_ = nullptr;
  }
  static const BenchmarkReport& report() { return *report_; }

 private:
  static BenchmarkReport* report_;
};
BenchmarkReport* SmallGrid::report_ = nullptr;

TEST_F(SmallGrid, Shape) {
  const auto& r = report();
  EXPECT_EQ(r.cells.size(), 15u);
  std::size_t runs = 0;
  for (const auto& c : r.cells) {
    runs += c.runs.size();
    for (std::size_t i = 0; i < c.runs.size(); ++i) EXPECT_EQ(c.runs[i].seed, r.seeds[i]);
  }
  EXPECT_EQ(runs, 75u);
  EXPECT_EQ(r.config_digest, grid_digest(small_grid()));
}

TEST_F(SmallGrid, StatisticsRecompute) {
  for (const auto& c : report().cells) {
    std::vector<double> kept;
    for (const auto& run : c.runs) {
      if (!run.diverged) kept.push_back(run.final_val_loss);
    }
    EXPECT_EQ(c.diverged_count, static_cast<int>(c.runs.size() - kept.size()));
    if (kept.empty()) {
      EXPECT_FALSE(c.mean.has_value());
      continue;
    }
    double m = 0;
    for (double v : kept) m += v;
    m /= static_cast<double>(kept.size());
    double ss = 0;
    for (double v : kept) ss += (v - m) * (v - m);
    EXPECT_NEAR(*c.mean, m, 1e-9);
    EXPECT_NEAR(*c.stddev, std::sqrt(ss / static_cast<double>(kept.size())), 1e-9);
  }
}

TEST_F(SmallGrid, TracesFollowTheirSchedules) {
  const auto& r = report();
  for (double lr0 : r.lr0_values) {
    for (const auto& run : r.cell("mlp_rings", "BLR", lr0).runs) {
      for (const auto& row : run.trace.rows) EXPECT_EQ(row.lr, lr0);
    }
    for (const auto& run : r.cell("mlp_rings", "ARC", lr0).runs) {
      int calls = 0;
      for (const auto& row : run.trace.rows) calls += row.decision.has_value();
      if (!run.diverged) {
        EXPECT_EQ(calls, 10);
      }
    }
  }
}

TEST_F(SmallGrid, PairedSeedsShareInitialisation) {
  // Same seed means the same trainee, so the first-epoch loss agrees across
  // schedulers that start at the same LR.
  const auto& r = report();
  for (double lr0 : r.lr0_values) {
    const auto& a = r.cell("mlp_rings", "BLR", lr0).runs;
    const auto& b = r.cell("mlp_rings", "ARC", lr0).runs;
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].trace.rows[0].val_loss, b[i].trace.rows[0].val_loss);
  }
}

TEST_F(SmallGrid, ReportIsDeterministic) {
  const std::string a = report_json(report());
  EXPECT_EQ(a, report_json(run_grid(small_grid())));
  const auto j = nlohmann::json::parse(a);
  EXPECT_EQ(j["format"], "arc-benchmark-report");
  EXPECT_EQ(j.dump().find("created"), std::string::npos);
  const auto meta = nlohmann::json::parse(metadata_json(report(), "2026-01-01T00:00:00Z"));
  EXPECT_EQ(meta["created_utc"], "2026-01-01T00:00:00Z");
}

TEST_F(SmallGrid, PlotsCoverTheHorizon) {
  const auto& r = report();
  for (double lr0 : r.lr0_values) {
    std::istringstream in(plot_csv(r, "mlp_rings", lr0));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line.rfind("epoch,lr:BLR,val_loss:BLR", 0), 0u) << line;
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, r.horizon);
    const std::string svg = plot_svg(r, "mlp_rings", lr0);
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
  }
  const auto dir = testing::scratch_dir("bench_emit");
  const auto plots = emit_plots(r, dir / "plots");
  const auto tables = emit_tables(r, dir / "tables", 2);
  EXPECT_EQ(plots.size(), 6u);
  EXPECT_EQ(tables.size(), 2u);
  for (const auto& p : plots) EXPECT_TRUE(std::filesystem::exists(p)) << p;
  EXPECT_TRUE(std::filesystem::exists(dir / "plots" / "mlp_rings_lr0_0.05.svg"));
}

}  // namespace
}  // namespace arc
