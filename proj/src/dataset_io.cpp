// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include <json.hpp>

#include "arc/datagen.hpp"
#include "arc/errors.hpp"

namespace arc {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// JSON has no infinities; non-finite losses are written as null.
Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double number_or_inf(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

Json series_json(const FeatureWindow::Series& s) { return Json(std::vector<double>(s.begin(), s.end())); }

void read_series(const Json& j, FeatureWindow::Series& out) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != kWindowLength) throw DataError("sample window channel must have 300 values");
  std::copy(v.begin(), v.end(), out.begin());
}

Json sample_json(const Sample& s) {
  Json j;
  j["task_id"] = s.task_id;
  j["run_index"] = s.run_index;
  j["segment_index"] = s.segment_index;
  j["n"] = s.n;
  j["lr_at_branch"] = s.lr_at_branch;
  j["branch_losses"] = {
      {"increase", finite_or_null(branch_loss(s.branch_losses, LrDecision::kIncrease))},
      {"constant", finite_or_null(branch_loss(s.branch_losses, LrDecision::kConstant))},
      {"decrease", finite_or_null(branch_loss(s.branch_losses, LrDecision::kDecrease))}};
  j["raw_label"] = std::string(to_string(s.raw_label));
  j["label"] = std::string(to_string(s.label));
  j["continued"] = s.continued ? Json(std::string(to_string(*s.continued))) : Json(nullptr);
  j["repeated_loss"] = s.repeated_loss ? finite_or_null(*s.repeated_loss) : Json(nullptr);
  j["corrected"] = s.corrected;
  j["correctable"] = s.correctable;
  j["window"] = {{"train_loss", series_json(s.window[Channel::kTrainLoss])},
                 {"val_loss", series_json(s.window[Channel::kValLoss])},
                 {"lr", series_json(s.window[Channel::kLr])}};
  return j;
}

Sample sample_from_json(const Json& j) {
  Sample s;
  s.task_id = j.at("task_id").get<std::string>();
  s.run_index = j.at("run_index").get<int>();
  s.segment_index = j.at("segment_index").get<int>();
  s.n = j.at("n").get<int>();
  s.lr_at_branch = j.at("lr_at_branch").get<double>();
  const auto& b = j.at("branch_losses");
  s.branch_losses[index_of(LrDecision::kIncrease)] = number_or_inf(b.at("increase"));
  s.branch_losses[index_of(LrDecision::kConstant)] = number_or_inf(b.at("constant"));
  s.branch_losses[index_of(LrDecision::kDecrease)] = number_or_inf(b.at("decrease"));
  s.raw_label = parse_decision(j.at("raw_label").get<std::string>());
  s.label = parse_decision(j.at("label").get<std::string>());
  if (!j.at("continued").is_null()) s.continued = parse_decision(j.at("continued").get<std::string>());
  if (j.contains("repeated_loss") && s.continued) s.repeated_loss = number_or_inf(j.at("repeated_loss"));
  s.corrected = j.at("corrected").get<bool>();
  s.correctable = j.at("correctable").get<bool>();
  const auto& w = j.at("window");
  read_series(w.at("train_loss"), s.window[Channel::kTrainLoss]);
  read_series(w.at("val_loss"), s.window[Channel::kValLoss]);
  read_series(w.at("lr"), s.window[Channel::kLr]);
  if (!s.window.all_finite()) throw DataError("sample window contains non-finite values");
  return s;
}

Json run_json(const RunResult& run) {
  Json j;
  j["task_id"] = run.config.task_id;
  j["run_index"] = run.config.run_index;
  j["seed"] = run.config.seed;
  j["n"] = run.config.n;
  j["total_epochs"] = run.config.total_epochs;
  j["lr0"] = run.config.lr0;
  j["diverged"] = run.diverged;
  j["samples"] = run.samples.size();
  Json history = Json::array();
  for (const auto& h : run.history) {
    history.push_back({h.epoch_index, finite_or_null(h.train_loss), finite_or_null(h.val_loss), h.lr});
  }
  j["history"] = std::move(history);
  return j;
}

Json counts_json(const std::array<std::size_t, kNumDecisions>& counts) {
  Json j;
  for (LrDecision d : kAllDecisions) j[std::string(to_string(d))] = counts[index_of(d)];
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
  if (!out) throw UsageError("failed writing " + path.string());
}

}  // namespace

std::string manifest_text(const Dataset& dataset) {
  Json m;
  m["format"] = "arc-dataset";
  m["format_version"] = kDatasetFormatVersion;
  m["seed"] = dataset.seed;
  m["runs_per_task"] = dataset.runs_per_task;
  m["forced_n"] = dataset.forced_n ? Json(*dataset.forced_n) : Json(nullptr);
  Json tasks = Json::array();
  for (std::size_t i = 0; i < dataset.tasks.size(); ++i) {
    const auto& t = dataset.tasks[i];
    Json entry;
    entry["task_id"] = t.task_id;
    entry["family"] = std::string(to_string(t.family));
    entry["min_lr0"] = t.min_lr0;
    entry["max_lr0"] = t.max_lr0;
    entry["default_noise"] = t.default_noise;
    entry["dataset_size"] = t.dataset_size;
    entry["seed"] = t.seed;
    entry["steps_per_epoch"] = t.steps_per_epoch;
    entry["batch_size"] = t.batch_size;
    entry["hidden"] = t.hidden;
    if (i < dataset.summaries.size()) {
      const auto& s = dataset.summaries[i];
      entry["runs"] = s.runs;
      entry["diverged_runs"] = s.diverged_runs;
      entry["samples"] = s.samples;
      entry["class_counts"] = counts_json(s.class_counts);
    }
    tasks.push_back(std::move(entry));
  }
  m["tasks"] = std::move(tasks);
  m["total_samples"] = dataset.samples.size();
  m["class_counts"] = counts_json(dataset.class_counts());
  std::size_t corrected = 0;
  for (const auto& s : dataset.samples) corrected += s.corrected ? 1 : 0;
  m["corrected_samples"] = corrected;
  return m.dump(2) + "\n";
}

void write_dataset(const Dataset& dataset, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create dataset directory " + dir.string());

  std::string samples;
  for (const auto& s : dataset.samples) samples += sample_json(s).dump() + "\n";
  std::string runs;
  for (const auto& r : dataset.runs) runs += run_json(r).dump() + "\n";
  write_text(dir / kSamplesFile, samples);
  write_text(dir / kRunsFile, runs);
  write_text(dir / kManifestFile, manifest_text(dataset));
}

std::vector<Sample> read_samples(const fs::path& path) {
  const fs::path file = fs::is_directory(path) ? path / kSamplesFile : path;
  std::ifstream in(file);
  if (!in) throw UsageError("cannot open dataset " + file.string());
  std::vector<Sample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(sample_from_json(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw DataError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace arc
