// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#include "arc/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include <json.hpp>

#include "arc/bytes.hpp"
#include "arc/errors.hpp"
#include "arc/trainee.hpp"

namespace arc {
namespace {

using Json = nlohmann::ordered_json;

constexpr int kReportVersion = 1;

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
  if (!out) throw UsageError("failed writing " + path.string());
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string cell_text(const CellResult& c, int decimals) {
  if (!c.mean) return "diverged";
  std::string s = format_mean_std(*c.mean, *c.stddev, decimals);
  if (c.diverged_count > 0) s += " (" + std::to_string(c.diverged_count) + " diverged)";
  return s;
}

// Lowest mean per lr0 column; NaN when the whole column diverged.
double column_best(const BenchmarkReport& r, std::string_view task, double lr0) {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (const auto& s : r.schedulers) {
    const auto& c = r.cell(task, s, lr0);
    if (c.mean && !(*c.mean >= best)) best = *c.mean;
  }
  return best;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string file_stem(std::string_view task, double lr0) {
  return std::string(task) + "_lr0_" + format_lr(lr0);
}

const std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                             "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

}  // namespace

std::string to_string(SchedulerKind kind) {
  switch (kind) {
    case SchedulerKind::kConstant: return "constant";
    case SchedulerKind::kCosine: return "cosine";
    case SchedulerKind::kCyclicCosine: return "cyclic_cosine";
    case SchedulerKind::kExponential: return "exponential";
    case SchedulerKind::kArc: return "arc";
  }
  return "?";
}

SchedulerKind parse_scheduler_kind(std::string_view text) {
  for (auto k : {SchedulerKind::kConstant, SchedulerKind::kCosine, SchedulerKind::kCyclicCosine,
                 SchedulerKind::kExponential, SchedulerKind::kArc}) {
    if (to_string(k) == text) return k;
  }
  throw UsageError("unknown scheduler kind '" + std::string(text) + "'");
}

void SchedulerSpec::validate() const {
  if (name.empty()) throw UsageError("scheduler name must not be empty");
  if (!(lr_min_ratio >= 0.0 && lr_min_ratio <= 1.0)) throw UsageError(name + ": lr_min_ratio must lie in [0, 1]");
  if (horizon_t < 0) throw UsageError(name + ": horizon_t must be >= 0");
  if (t0 < 1 || t_mult < 1) throw UsageError(name + ": need t0 >= 1 and t_mult >= 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw UsageError(name + ": gamma must lie in (0, 1]");
  if (invocations < 1) throw UsageError(name + ": invocations must be >= 1");
}

std::vector<SchedulerSpec> default_schedulers() {
  std::vector<SchedulerSpec> out(5);
  out[0].name = "BLR";
  out[0].kind = SchedulerKind::kConstant;
  out[1].name = "CD";
  out[1].kind = SchedulerKind::kCosine;
  out[2].name = "CCD";
  out[2].kind = SchedulerKind::kCyclicCosine;
  out[3].name = "ED";
  out[3].kind = SchedulerKind::kExponential;
  out[4].name = "ARC";
  out[4].kind = SchedulerKind::kArc;
  return out;
}

SchedulerConfig instantiate(const SchedulerSpec& spec, double lr0, std::shared_ptr<const ControllerWeights> weights) {
  spec.validate();
  switch (spec.kind) {
    case SchedulerKind::kConstant: return ConstantLr{lr0};
    case SchedulerKind::kCosine: return CosineDecay{lr0, lr0 * spec.lr_min_ratio, spec.horizon_t};
    case SchedulerKind::kCyclicCosine: return CyclicCosine{lr0, lr0 * spec.lr_min_ratio, spec.t0, spec.t_mult};
    case SchedulerKind::kExponential: return ExponentialDecay{lr0, spec.gamma};
    case SchedulerKind::kArc: return ArcControlled{lr0, spec.invocations, std::move(weights)};
  }
  throw UsageError("bad scheduler kind");
}

void ExperimentGrid::validate() const {
  if (task_ids.empty() || schedulers.empty() || lr0_values.empty() || seeds.empty()) {
    throw UsageError("grid lists must be non-empty");
  }
  if (horizon < 1) throw UsageError("grid horizon must be positive");
  for (const auto& t : task_ids) find_task(t);
  std::set<std::string> names;
  for (const auto& s : schedulers) {
    s.validate();
    if (!names.insert(s.name).second) throw UsageError("duplicate scheduler name '" + s.name + "'");
    if (s.kind == SchedulerKind::kArc) {
      if (!weights) throw UsageError("scheduler '" + s.name + "' needs controller weights");
      if (s.invocations > horizon) throw UsageError("scheduler '" + s.name + "': more invocations than epochs");
    }
  }
  for (double lr : lr0_values) {
    if (!(lr > 0.0) || !std::isfinite(lr)) throw UsageError("lr0 values must be positive");
  }
  if (std::set<double>(lr0_values.begin(), lr0_values.end()).size() != lr0_values.size()) {
    throw UsageError("lr0 values must be distinct");
  }
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw UsageError("seeds must be distinct");
  }
}

const CellResult& BenchmarkReport::cell(std::string_view task_id, std::string_view scheduler, double lr0) const {
  for (const auto& c : cells) {
    if (c.task_id == task_id && c.scheduler == scheduler && c.lr0 == lr0) return c;
  }
  throw UsageError("no such benchmark cell");
}

Stats population_stats(std::span<const double> values) {
  if (values.empty()) throw UsageError("population_stats: no values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

std::optional<std::size_t> median_index(std::span<const double> values) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::isfinite(values[i])) idx.push_back(i);
  }
  if (idx.empty()) return std::nullopt;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  return idx[(idx.size() - 1) / 2];
}

std::uint64_t grid_digest(const ExperimentGrid& grid) {
  ByteWriter w;
  w.put_u32(kReportVersion);
  w.put_u64(grid.task_ids.size());
  for (const auto& t : grid.task_ids) w.put_string(t);
  w.put_u64(grid.schedulers.size());
  for (const auto& s : grid.schedulers) {
    w.put_string(s.name);
    w.put_string(to_string(s.kind));
    w.put_f64(s.lr_min_ratio);
    w.put_i64(s.horizon_t);
    w.put_i64(s.t0);
    w.put_i64(s.t_mult);
    w.put_f64(s.gamma);
    w.put_i64(s.invocations);
  }
  w.put_f64s(grid.lr0_values);
  w.put_u64(grid.seeds.size());
  for (auto s : grid.seeds) w.put_u64(s);
  w.put_i64(grid.horizon);
  if (grid.weights) {
    const Bytes blob = encode_weights(*grid.weights);
    w.put_u64(fnv1a64(blob));
  } else {
    w.put_u64(0);
  }
  const Bytes bytes = w.take();
  return fnv1a64(bytes);
}

BenchmarkReport run_grid(const ExperimentGrid& grid) {
  grid.validate();
  BenchmarkReport report;
  report.task_ids = grid.task_ids;
  for (const auto& s : grid.schedulers) report.schedulers.push_back(s.name);
  report.lr0_values = grid.lr0_values;
  report.seeds = grid.seeds;
  report.horizon = grid.horizon;
  report.config_digest = grid_digest(grid);

  for (const auto& task_id : grid.task_ids) {
    const TaskSpec& spec = find_task(task_id);
    for (const auto& sched : grid.schedulers) {
      for (double lr0 : grid.lr0_values) {
        CellResult cell;
        cell.task_id = task_id;
        cell.scheduler = sched.name;
        cell.lr0 = lr0;
        const SchedulerConfig config = instantiate(sched, lr0, grid.weights);
        std::vector<double> finals;
        std::vector<double> kept;
        for (auto seed : grid.seeds) {
          auto trainee = make_trainee(spec, seed);
          SeedRun run;
          run.seed = seed;
          run.trace = run_schedule(*trainee, config, grid.horizon);
          run.diverged = run.trace.diverged;
          run.final_val_loss = run.diverged ? std::numeric_limits<double>::infinity() : run.trace.final_val_loss;
          finals.push_back(run.final_val_loss);
          if (run.diverged) {
            ++cell.diverged_count;
          } else {
            kept.push_back(run.final_val_loss);
          }
          cell.runs.push_back(std::move(run));
        }
        if (!kept.empty()) {
          const Stats st = population_stats(kept);
          cell.mean = st.mean;
          cell.stddev = st.stddev;
        }
        cell.median_run = median_index(finals);
        report.cells.push_back(std::move(cell));
      }
    }
  }
  return report;
}

std::string report_json(const BenchmarkReport& report) {
  Json j;
  j["format"] = "arc-benchmark-report";
  j["format_version"] = kReportVersion;
  j["metric"] = "final_val_loss";
  j["horizon"] = report.horizon;
  j["config_digest"] = report.config_digest;
  j["tasks"] = report.task_ids;
  j["schedulers"] = report.schedulers;
  j["lr0_values"] = report.lr0_values;
  j["seeds"] = report.seeds;
  Json cells = Json::array();
  for (const auto& c : report.cells) {
    Json jc;
    jc["task"] = c.task_id;
    jc["scheduler"] = c.scheduler;
    jc["lr0"] = c.lr0;
    jc["mean"] = c.mean ? Json(*c.mean) : Json(nullptr);
    jc["std"] = c.stddev ? Json(*c.stddev) : Json(nullptr);
    jc["diverged_count"] = c.diverged_count;
    Json runs = Json::array();
    for (const auto& r : c.runs) {
      runs.push_back({{"seed", r.seed}, {"final_val_loss", number_or_null(r.final_val_loss)}, {"diverged", r.diverged}});
    }
    jc["runs"] = std::move(runs);
    if (c.median_run) {
      const auto& run = c.runs[*c.median_run];
      jc["median_seed"] = run.seed;
      Json epoch = Json::array(), lr = Json::array(), train = Json::array(), val = Json::array(),
           decision = Json::array();
      for (const auto& row : run.trace.rows) {
        epoch.push_back(row.epoch);
        lr.push_back(row.lr);
        train.push_back(number_or_null(row.train_loss));
        val.push_back(number_or_null(row.val_loss));
        decision.push_back(row.decision ? Json(to_string(*row.decision)) : Json(nullptr));
      }
      jc["median_trace"] = {{"epoch", epoch}, {"lr", lr}, {"train_loss", train}, {"val_loss", val},
                            {"decision", decision}};
    } else {
      jc["median_seed"] = nullptr;
      jc["median_trace"] = nullptr;
    }
    cells.push_back(std::move(jc));
  }
  j["cells"] = std::move(cells);
  return j.dump(1) + "\n";
}

std::string metadata_json(const BenchmarkReport& report, std::string_view created_utc) {
  Json j;
  j["format"] = "arc-benchmark-metadata";
  j["format_version"] = kReportVersion;
  j["created_utc"] = created_utc;
  j["config_digest"] = report.config_digest;
  j["seeds"] = report.seeds;
  int diverged = 0;
  for (const auto& c : report.cells) diverged += c.diverged_count;
  j["diverged_runs"] = diverged;
  return j.dump(1) + "\n";
}

std::string format_mean_std(double mean, double stddev, int decimals) {
  if (decimals < 0 || decimals > 12) throw UsageError("decimals must lie in [0, 12]");
  return fixed(mean, decimals) + " ± " + fixed(stddev, decimals);
}

std::string format_lr(double lr) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", lr);
  return buf;
}

std::string table_csv(const BenchmarkReport& report, std::string_view task_id, int decimals) {
  std::string out = "# arc-benchmark-table v1,metric=final_val_loss,task=" + std::string(task_id) + "\n";
  out += "scheduler";
  for (double lr0 : report.lr0_values) {
    const std::string l = format_lr(lr0);
    out += ",mean@" + l + ",std@" + l + ",diverged@" + l + ",best@" + l;
  }
  out += "\n";
  for (const auto& s : report.schedulers) {
    out += csv_escape(s);
    for (double lr0 : report.lr0_values) {
      const auto& c = report.cell(task_id, s, lr0);
      const double best = column_best(report, task_id, lr0);
      out += ",";
      out += c.mean ? fixed(*c.mean, decimals) : "";
      out += ",";
      out += c.stddev ? fixed(*c.stddev, decimals) : "";
      out += "," + std::to_string(c.diverged_count);
      out += (c.mean && *c.mean == best) ? ",1" : ",0";
    }
    out += "\n";
  }
  return out;
}

std::string table_markdown(const BenchmarkReport& report, std::string_view task_id, int decimals) {
  std::string out = "### " + std::string(task_id) + ": final validation loss (mean ± std over " +
                    std::to_string(report.seeds.size()) + " seeds, lower is better)\n\n";
  out += "| Scheduler |";
  for (double lr0 : report.lr0_values) out += " LR0 = " + format_lr(lr0) + " |";
  out += "\n|---|";
  for (std::size_t i = 0; i < report.lr0_values.size(); ++i) out += "---|";
  out += "\n";
  for (const auto& s : report.schedulers) {
    out += "| " + s + " |";
    for (double lr0 : report.lr0_values) {
      const auto& c = report.cell(task_id, s, lr0);
      const std::string text = cell_text(c, decimals);
      const bool bold = c.mean && *c.mean == column_best(report, task_id, lr0);
      out += " " + (bold ? "**" + text + "**" : text) + " |";
    }
    out += "\n";
  }
  return out;
}

std::vector<std::filesystem::path> emit_tables(const BenchmarkReport& report, const std::filesystem::path& dir,
                                               int decimals) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& task : report.task_ids) {
    const auto csv = dir / (task + ".csv");
    write_text(csv, table_csv(report, task, decimals));
    const auto md = dir / (task + ".md");
    write_text(md, table_markdown(report, task, decimals));
    written.push_back(csv);
    written.push_back(md);
  }
  return written;
}

std::string plot_csv(const BenchmarkReport& report, std::string_view task_id, double lr0) {
  std::string out = "epoch";
  for (const auto& s : report.schedulers) out += ",lr:" + csv_escape(s) + ",val_loss:" + csv_escape(s);
  out += "\n";
  for (int e = 0; e < report.horizon; ++e) {
    out += std::to_string(e);
    for (const auto& s : report.schedulers) {
      const auto& c = report.cell(task_id, s, lr0);
      const TraceRow* row = nullptr;
      if (c.median_run) {
        const auto& rows = c.runs[*c.median_run].trace.rows;
        if (static_cast<std::size_t>(e) < rows.size()) row = &rows[static_cast<std::size_t>(e)];
      }
      char buf[64];
      if (row && std::isfinite(row->val_loss)) {
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g", row->lr, row->val_loss);
        out += buf;
      } else {
        out += ",,";
      }
    }
    out += "\n";
  }
  return out;
}

std::string plot_svg(const BenchmarkReport& report, std::string_view task_id, double lr0) {
  constexpr double kWidth = 720, kPanelH = 240, kLeft = 84, kRight = 130, kTop = 40, kGap = 60;
  const double plot_w = kWidth - kLeft - kRight;
  const double height = kTop + 2 * kPanelH + kGap + 40;

  struct Series {
    std::string name;
    std::vector<std::pair<int, double>> lr, val;
  };
  std::vector<Series> series;
  double lr_lo = std::numeric_limits<double>::infinity(), lr_hi = 0;
  double v_lo = std::numeric_limits<double>::infinity(), v_hi = -std::numeric_limits<double>::infinity();
  for (const auto& s : report.schedulers) {
    const auto& c = report.cell(task_id, s, lr0);
    Series ser{s, {}, {}};
    if (c.median_run) {
      for (const auto& row : c.runs[*c.median_run].trace.rows) {
        if (!std::isfinite(row.val_loss)) break;
        ser.lr.emplace_back(row.epoch, row.lr);
        ser.val.emplace_back(row.epoch, row.val_loss);
        if (row.lr > 0) {
          lr_lo = std::min(lr_lo, row.lr);
          lr_hi = std::max(lr_hi, row.lr);
        }
        v_lo = std::min(v_lo, row.val_loss);
        v_hi = std::max(v_hi, row.val_loss);
      }
    }
    series.push_back(std::move(ser));
  }
  if (!(lr_hi > 0)) lr_lo = lr_hi = 1;
  if (!std::isfinite(v_lo)) v_lo = v_hi = 0;
  const double log_lo = std::log10(lr_lo) - 0.05, log_hi = std::log10(lr_hi) + 0.05;
  const double v_pad = (v_hi - v_lo) * 0.05 + 1e-12;
  v_lo -= v_pad;
  v_hi += v_pad;
  const double x_span = std::max(1, report.horizon - 1);

  auto x_of = [&](int e) { return kLeft + plot_w * e / x_span; };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  auto label = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return std::string(buf);
  };

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(height) +
         "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(kLeft) + "\" y=\"20\" font-size=\"14\">" + xml_escape(task_id) +
         ", LR0 = " + format_lr(lr0) + " (median runs)</text>\n";

  for (int panel = 0; panel < 2; ++panel) {
    const double top = kTop + panel * (kPanelH + kGap);
    const double lo = panel == 0 ? log_lo : v_lo, hi = panel == 0 ? log_hi : v_hi;
    auto y_of = [&](double v) {
      const double t = panel == 0 ? std::log10(v) : v;
      return top + kPanelH * (1.0 - (t - lo) / (hi - lo));
    };
    out += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(top) + "\" width=\"" + num(plot_w) + "\" height=\"" +
           num(kPanelH) + "\" fill=\"none\" stroke=\"#444\"/>\n";
    out += "<text transform=\"translate(16," + num(top + kPanelH / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
           (panel == 0 ? "LR (log scale)" : "validation loss") + "</text>\n";
    for (int k = 0; k <= 4; ++k) {
      const double t = lo + (hi - lo) * k / 4.0;
      const double y = top + kPanelH * (1.0 - k / 4.0);
      const double shown = panel == 0 ? std::pow(10.0, t) : t;
      out += "<text x=\"" + num(kLeft - 4) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + label(shown) +
             "</text>\n";
    }
    for (int k = 0; k <= 5; ++k) {
      const int e = static_cast<int>(std::lround(x_span * k / 5.0));
      out += "<text x=\"" + num(x_of(e)) + "\" y=\"" + num(top + kPanelH + 14) + "\" text-anchor=\"middle\">" +
             std::to_string(e) + "</text>\n";
    }
    for (std::size_t i = 0; i < series.size(); ++i) {
      const auto& pts = panel == 0 ? series[i].lr : series[i].val;
      if (pts.empty()) continue;
      out += "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" +
             std::string(kPalette[i % kPalette.size()]) + "\" points=\"";
      for (std::size_t p = 0; p < pts.size(); ++p) {
        if (p) out += " ";
        out += num(x_of(pts[p].first)) + "," + num(y_of(pts[p].second));
      }
      out += "\"/>\n";
    }
  }
  out += "<text x=\"" + num(kLeft + plot_w / 2) + "\" y=\"" + num(height - 8) +
         "\" text-anchor=\"middle\">epoch</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = kTop + 10 + 16.0 * static_cast<double>(i);
    const double x = kLeft + plot_w + 12;
    out += "<line x1=\"" + num(x) + "\" y1=\"" + num(y) + "\" x2=\"" + num(x + 18) + "\" y2=\"" + num(y) +
           "\" stroke-width=\"2\" stroke=\"" + std::string(kPalette[i % kPalette.size()]) + "\"/>\n";
    out += "<text x=\"" + num(x + 24) + "\" y=\"" + num(y + 4) + "\">" + xml_escape(series[i].name) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

std::vector<std::filesystem::path> emit_plots(const BenchmarkReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& task : report.task_ids) {
    for (double lr0 : report.lr0_values) {
      const auto csv = dir / (file_stem(task, lr0) + ".csv");
      write_text(csv, plot_csv(report, task, lr0));
      const auto svg = dir / (file_stem(task, lr0) + ".svg");
      write_text(svg, plot_svg(report, task, lr0));
      written.push_back(csv);
      written.push_back(svg);
    }
  }
  return written;
}

}  // namespace arc
