// driveplan: synthetic-scene driving planner with language-guided attention.
// Subcommands cover dataset generation, the two training phases, metric
// evaluation, the ablation grid, and scene rendering.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dp/dataset.hpp"
#include "dp/describer.hpp"
#include "dp/model.hpp"
#include "dp/render.hpp"
#include "dp/scenegen.hpp"
#include "dp/trainer.hpp"

namespace {

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw dp::DataError("cannot open for writing: " + path);
  os << content;
  if (!os) throw dp::DataError("write failed: " + path);
}

dp::Config load_config_or_default(const std::string& path) {
  if (path.empty()) return dp::Config{};
  return dp::load_config(path);
}

int run_gen_data(uint64_t seed, int count, const std::string& out, const std::string& config) {
  const dp::Config cfg = load_config_or_default(config);
  std::vector<dp::Scene> scenes;
  scenes.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    dp::Scene s = dp::generate_scene(dp::splitmix64(seed + static_cast<uint64_t>(i)), cfg.gen);
    s.ald_tokens = dp::attention_description(s);
    s.gld_tokens = dp::global_description(s);
    scenes.push_back(std::move(s));
  }
  dp::write_dataset(scenes, out);
  std::printf("wrote %d scenes to %s\n", count, out.c_str());
  return 0;
}

int run_pretrain(const std::string& config, const std::string& data, const std::string& out) {
  const dp::Config cfg = dp::load_config(config);
  const auto scenes = dp::read_dataset(data);
  auto [train, val] = dp::split_dataset(scenes, cfg.train_count);
  const dp::DriveModel model = dp::train_phase1(train, cfg, true);
  dp::save_checkpoint(out, model, 1);
  std::printf("phase 1 done: %zu train scenes, checkpoint %s\n", train.size(), out.c_str());
  if (!val.empty())
    std::printf("held-out alignment margin: %.4f\n",
                dp::alignment_margin(model, val, cfg.seed));
  return 0;
}

int run_train(const std::string& config, const std::string& data, const std::string& init,
              const std::string& out) {
  const dp::Config cfg = dp::load_config(config);
  const auto scenes = dp::read_dataset(data);
  auto [train, val] = dp::split_dataset(scenes, cfg.train_count);
  dp::DriveModel model = [&] {
    if (init.empty()) return dp::train_phase2(train, cfg, nullptr, true);
    const dp::LoadedCheckpoint pre = dp::load_checkpoint(init);
    return dp::train_phase2(train, cfg, &pre.model, true);
  }();
  dp::save_checkpoint(out, model, 2);
  std::printf("phase 2 done: %zu train scenes, checkpoint %s\n", train.size(), out.c_str());
  if (!val.empty()) {
    const dp::MetricsReport r = dp::evaluate_run(model, val, cfg.metric_mode);
    std::printf("val %s\n%s\n", dp::kMetricsCsvHeader, dp::metrics_csv_row(r).c_str());
  }
  return 0;
}

int run_eval(const std::string& ckpt, const std::string& data, const std::string& mode,
             const std::string& out) {
  const dp::LoadedCheckpoint loaded = dp::load_checkpoint(ckpt);
  const auto scenes = dp::read_dataset(data);
  const dp::MetricsReport r = dp::evaluate_run(loaded.model, scenes, dp::metric_mode_from(mode));
  write_text_file(out, std::string(dp::kMetricsCsvHeader) + "\n" + dp::metrics_csv_row(r) + "\n");
  std::printf("%s\n%s\n", dp::kMetricsCsvHeader, dp::metrics_csv_row(r).c_str());
  return 0;
}

int run_ablate(const std::string& config, const std::string& data, const std::string& out,
               const std::string& table3_out) {
  const dp::Config cfg = dp::load_config(config);
  const auto scenes = dp::read_dataset(data);
  const auto rows = dp::ablate(cfg, scenes, true);
  std::string csv = std::string(dp::kAblateCsvHeader) + "\n";
  for (const auto& row : rows) csv += dp::ablate_csv_row(row) + "\n";
  write_text_file(out, csv);
  std::printf("%s", csv.c_str());
  if (!table3_out.empty()) {
    const auto [gld, ald] = dp::ablate_description_modes(cfg, scenes, true);
    std::string t3 = "gld,ald,l2_1s,l2_2s,l2_3s,l2_avg,cr_1s,cr_2s,cr_3s,cr_avg\n";
    auto metric_cols = [](const dp::AblateRow& r) {
      std::string s;
      for (int h = 0; h < 3; ++h) s += "," + dp::fmt_fixed(r.report.l2[h], 6);
      s += "," + dp::fmt_fixed(r.report.l2_avg, 6);
      for (int h = 0; h < 3; ++h) s += "," + dp::fmt_fixed(r.report.cr[h], 6);
      s += "," + dp::fmt_fixed(r.report.cr_avg, 6);
      return s;
    };
    t3 += "1,0" + metric_cols(gld) + "\n";
    t3 += "0,1" + metric_cols(ald) + "\n";
    write_text_file(table3_out, t3);
    std::printf("%s", t3.c_str());
  }
  return 0;
}

int run_render(const std::string& data, int index, const std::string& ckpt,
               const std::string& out) {
  const auto scenes = dp::read_dataset(data);
  if (index < 0 || index >= static_cast<int>(scenes.size()))
    throw dp::DataError("scene index out of range");
  const dp::Scene& scene = scenes[static_cast<size_t>(index)];
  double extent = 50.0;
  dp::PlanningResult plan;
  const dp::PlanningResult* plan_ptr = nullptr;
  if (!ckpt.empty()) {
    const dp::LoadedCheckpoint loaded = dp::load_checkpoint(ckpt);
    extent = loaded.model.cfg.gen.extent;
    plan = loaded.model.plan_scene(scene);
    plan_ptr = &plan;
  }
  write_text_file(out, dp::render_scene_svg(scene, extent, plan_ptr));
  std::printf("rendered scene %d to %s\n", index, out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"driveplan: end-to-end driving planner on seeded synthetic scenes"};
  app.require_subcommand(1);

  uint64_t seed = 0;
  int count = 0, index = 0;
  std::string out, config, data, init, ckpt, mode = "at_horizon", table3;

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic scene dataset");
  gen->add_option("--seed", seed, "base seed")->required();
  gen->add_option("--count", count, "number of scenes")->required();
  gen->add_option("--out", out, "output JSONL path")->required();
  gen->add_option("--config", config, "optional config for generator settings");

  auto* pre = app.add_subcommand("pretrain", "phase 1: vision-language alignment");
  pre->add_option("--config", config, "config file")->required();
  pre->add_option("--data", data, "dataset JSONL")->required();
  pre->add_option("--out", out, "output checkpoint")->required();

  auto* tr = app.add_subcommand("train", "phase 2: end-to-end training");
  tr->add_option("--config", config, "config file")->required();
  tr->add_option("--data", data, "dataset JSONL")->required();
  tr->add_option("--init", init, "phase-1 checkpoint to start from");
  tr->add_option("--out", out, "output checkpoint")->required();

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  ev->add_option("--ckpt", ckpt, "checkpoint")->required();
  ev->add_option("--data", data, "dataset JSONL")->required();
  ev->add_option("--mode", mode, "at_horizon|avg_up_to")->required();
  ev->add_option("--out", out, "output CSV")->required();

  auto* ab = app.add_subcommand("ablate", "train/evaluate the TGM x LGAM grid");
  ab->add_option("--config", config, "config file")->required();
  ab->add_option("--data", data, "dataset JSONL")->required();
  ab->add_option("--out", out, "output CSV")->required();
  ab->add_option("--table3", table3, "also emit the GLD vs ALD comparison CSV");

  auto* re = app.add_subcommand("render", "render one scene to SVG");
  re->add_option("--data", data, "dataset JSONL")->required();
  re->add_option("--index", index, "scene index")->required();
  re->add_option("--ckpt", ckpt, "optional checkpoint for the planned trajectory");
  re->add_option("--out", out, "output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(gen)) return run_gen_data(seed, count, out, config);
    if (app.got_subcommand(pre)) return run_pretrain(config, data, out);
    if (app.got_subcommand(tr)) return run_train(config, data, init, out);
    if (app.got_subcommand(ev)) return run_eval(ckpt, data, mode, out);
    if (app.got_subcommand(ab)) return run_ablate(config, data, out, table3);
    if (app.got_subcommand(re)) return run_render(data, index, ckpt, out);
  } catch (const dp::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const dp::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const dp::NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
