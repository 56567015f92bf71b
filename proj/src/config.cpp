// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#include "arc/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "arc/errors.hpp"
#include "arc/rng.hpp"

namespace arc {
namespace {

using Json = nlohmann::json;

void check_keys(const Json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw UsageError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.count(key)) throw UsageError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
T get(const Json& obj, const std::string& where, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw UsageError(where + "." + key + ": wrong type");
  }
}

std::filesystem::path get_path(const Json& obj, const std::string& where, const char* key,
                               const std::filesystem::path& fallback, const std::filesystem::path& base) {
  std::filesystem::path p = get<std::string>(obj, where, key, fallback.string());
  if (p.empty()) throw UsageError(where + "." + key + ": empty path");
  return p.is_absolute() ? p : base / p;
}

std::filesystem::path rebase(const std::filesystem::path& p, const std::filesystem::path& base) {
  return p.is_absolute() ? p : base / p;
}

SchedulerSpec parse_scheduler(const Json& j, const std::string& where) {
  check_keys(j, where, {"name", "kind", "lr_min_ratio", "horizon_t", "t0", "t_mult", "gamma", "invocations"});
  SchedulerSpec s;
  s.kind = parse_scheduler_kind(get<std::string>(j, where, "kind", ""));
  s.name = get<std::string>(j, where, "name", "");
  s.lr_min_ratio = get<double>(j, where, "lr_min_ratio", s.lr_min_ratio);
  s.horizon_t = get<int>(j, where, "horizon_t", s.horizon_t);
  s.t0 = get<int>(j, where, "t0", s.t0);
  s.t_mult = get<int>(j, where, "t_mult", s.t_mult);
  s.gamma = get<double>(j, where, "gamma", s.gamma);
  s.invocations = get<int>(j, where, "invocations", s.invocations);
  s.validate();
  return s;
}

}  // namespace

EvalSplit parse_eval_split(std::string_view text) {
  if (text == "all") return EvalSplit::kAll;
  if (text == "train") return EvalSplit::kTrain;
  if (text == "validation") return EvalSplit::kValidation;
  throw UsageError("split must be one of all, train, validation");
}

std::string to_string(EvalSplit split) {
  switch (split) {
    case EvalSplit::kAll: return "all";
    case EvalSplit::kTrain: return "train";
    case EvalSplit::kValidation: return "validation";
  }
  return "?";
}

std::vector<std::uint64_t> benchmark_seeds(std::uint64_t seed, int runs) {
  if (runs < 1) throw UsageError("benchmark runs must be >= 1");
  std::vector<std::uint64_t> out;
  for (int i = 0; i < runs; ++i) out.push_back(mix_seed(seed, static_cast<std::uint64_t>(i)));
  return out;
}

PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(root, "config", {"format_version", "seed", "datagen", "controller", "evaluate", "benchmark"});
  const int version = get<int>(root, "config", "format_version", kConfigFormatVersion);
  if (version != kConfigFormatVersion) throw UsageError("unsupported config format_version " + std::to_string(version));

  PipelineConfig c;
  c.seed = get<std::uint64_t>(root, "config", "seed", c.seed);
  c.datagen.output = rebase(c.datagen.output, base_dir);
  c.controller.dataset = rebase(c.controller.dataset, base_dir);
  c.controller.output = rebase(c.controller.output, base_dir);
  c.evaluate.dataset = rebase(c.evaluate.dataset, base_dir);
  c.evaluate.weights = rebase(c.evaluate.weights, base_dir);
  c.benchmark.weights = rebase(c.benchmark.weights, base_dir);
  c.benchmark.output = rebase(c.benchmark.output, base_dir);

  if (root.contains("datagen")) {
    const Json& j = root["datagen"];
    const std::string w = "datagen";
    check_keys(j, w, {"tasks", "runs_per_task", "forced_n", "output"});
    auto& d = c.datagen;
    d.tasks = get<std::vector<std::string>>(j, w, "tasks", d.tasks);
    d.runs_per_task = get<int>(j, w, "runs_per_task", d.runs_per_task);
    if (j.contains("forced_n") && !j["forced_n"].is_null()) d.forced_n = get<int>(j, w, "forced_n", 0);
    d.output = get_path(j, w, "output", "data", base_dir);
  }
  if (root.contains("controller")) {
    const Json& j = root["controller"];
    const std::string w = "controller";
    check_keys(j, w, {"dataset", "output", "epochs", "batch_size", "lr", "split"});
    auto& t = c.controller;
    t.dataset = get_path(j, w, "dataset", "data", base_dir);
    t.output = get_path(j, w, "output", "controller.arcw", base_dir);
    t.train.epochs = get<int>(j, w, "epochs", t.train.epochs);
    t.train.batch_size = get<int>(j, w, "batch_size", t.train.batch_size);
    t.train.lr = get<double>(j, w, "lr", t.train.lr);
    t.train.split = get<double>(j, w, "split", t.train.split);
  }
  if (root.contains("evaluate")) {
    const Json& j = root["evaluate"];
    const std::string w = "evaluate";
    check_keys(j, w, {"dataset", "weights", "split"});
    auto& e = c.evaluate;
    e.dataset = get_path(j, w, "dataset", "data", base_dir);
    e.weights = get_path(j, w, "weights", "controller.arcw", base_dir);
    e.split = parse_eval_split(get<std::string>(j, w, "split", to_string(e.split)));
  }
  if (root.contains("benchmark")) {
    const Json& j = root["benchmark"];
    const std::string w = "benchmark";
    check_keys(j, w, {"tasks", "schedulers", "lr0", "runs", "horizon", "weights", "output", "decimals"});
    auto& b = c.benchmark;
    b.tasks = get<std::vector<std::string>>(j, w, "tasks", b.tasks);
    if (j.contains("schedulers")) {
      if (!j["schedulers"].is_array()) throw UsageError("benchmark.schedulers: expected an array");
      b.schedulers.clear();
      for (std::size_t i = 0; i < j["schedulers"].size(); ++i) {
        b.schedulers.push_back(parse_scheduler(j["schedulers"][i], w + ".schedulers[" + std::to_string(i) + "]"));
      }
    }
    b.lr0 = get<std::vector<double>>(j, w, "lr0", b.lr0);
    b.runs = get<int>(j, w, "runs", b.runs);
    b.horizon = get<int>(j, w, "horizon", b.horizon);
    b.weights = get_path(j, w, "weights", "controller.arcw", base_dir);
    b.output = get_path(j, w, "output", "bench", base_dir);
    b.decimals = get<int>(j, w, "decimals", b.decimals);
    if (b.runs < 1) throw UsageError("benchmark.runs must be >= 1");
    if (b.decimals < 0 || b.decimals > 12) throw UsageError("benchmark.decimals must lie in [0, 12]");
  }
  if (c.datagen.runs_per_task < 1) throw UsageError("datagen.runs_per_task must be >= 1");
  if (c.datagen.forced_n && (*c.datagen.forced_n < 1 || *c.datagen.forced_n > 10)) {
    throw UsageError("datagen.forced_n must lie in [1, 10]");
  }
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace arc
