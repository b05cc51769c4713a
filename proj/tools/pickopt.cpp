// Single-binary pipeline front end. Precedence for every setting is
// flag > config file > built-in default; PICKOPT_SEED is a master-seed
// fallback below all three. Exit codes: 0 success, 2 config error,
// 3 data-format error, 4 runtime failure.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pickopt/cli.hpp"

namespace pc = pickopt::cli;

int main(int argc, char** argv) {
  CLI::App app{"pickopt: suction-pick planning, learning, and A/B pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "run-config JSON file")
      ->type_name("FILE");
  uint64_t seed_flag = 0;
  auto* seed_opt =
      app.add_option("--seed", seed_flag, "master seed (overrides config)");
  int threads_flag = 1;
  auto* threads_opt =
      app.add_option("--threads", threads_flag, "worker threads");

  auto* gen = app.add_subcommand("gen-scenes", "generate a scene file");
  std::string scenes_out = "scenes.jsonl";
  gen->add_option("--out", scenes_out, "output scene file");
  int count_flag = 0;
  auto* count_opt = gen->add_option("--count", count_flag, "scene count");

  auto* collect =
      app.add_subcommand("collect-picks", "execute and log control picks");
  std::string collect_scenes = "scenes.jsonl";
  std::string picks_out = "picks.jsonl";
  collect->add_option("--scenes", collect_scenes, "input scene file");
  collect->add_option("--out", picks_out, "output pick log");
  int pps_flag = 1;
  auto* pps_opt =
      collect->add_option("--picks-per-scene", pps_flag, "picks per scene");

  auto* gend = app.add_subcommand(
      "gen-dataset", "perturb logged picks into labeled training pairs");
  std::string gend_scenes = "scenes.jsonl";
  std::string gend_picks = "picks.jsonl";
  std::string dataset_out = "dataset.jsonl";
  gend->add_option("--scenes", gend_scenes, "input scene file");
  gend->add_option("--picks", gend_picks, "input pick log");
  gend->add_option("--out", dataset_out, "output dataset");
  double split_flag = 0.8;
  auto* split_opt =
      gend->add_option("--split", split_flag, "train fraction in (0, 1)");

  auto* train = app.add_subcommand("train", "train a refinement chain");
  std::string train_dataset = "dataset.jsonl";
  std::string model_out = "model.json";
  std::string kind_flag = "gbdt";
  train->add_option("--dataset", train_dataset, "input dataset");
  train->add_option("--out", model_out, "output model file");
  auto* kind_opt = train->add_option("--kind", kind_flag, "gbdt or mlp")
                       ->check(CLI::IsMember({"gbdt", "mlp"}));

  auto* opt = app.add_subcommand("optimize", "refine one control pick");
  std::string opt_model = "model.json";
  std::string opt_out;
  uint64_t opt_scene_seed = 0;
  long opt_induct = 0;
  opt->add_option("--model", opt_model, "trained model file");
  opt->add_option("--out", opt_out, "optional refined-pick JSON");
  auto* opt_seed_opt =
      opt->add_option("--scene-seed", opt_scene_seed, "explicit scene seed");
  opt->add_option("--induct", opt_induct,
                  "A/B induct index used to derive the scene seed");

  auto* ab = app.add_subcommand("abtest", "paired control/treatment A/B run");
  std::string ab_model = "model.json";
  std::string report_json = "report.json";
  std::string report_text = "report.txt";
  long inducts_flag = 0;
  ab->add_option("--model", ab_model, "trained model file");
  ab->add_option("--json", report_json, "output report JSON");
  ab->add_option("--text", report_text, "output report text table");
  auto* inducts_opt =
      ab->add_option("--inducts", inducts_flag, "paired inducts per arm");

  auto* trace =
      app.add_subcommand("dump-trace", "write one refinement trace as JSON");
  std::string trace_model = "model.json";
  std::string trace_out = "trace.json";
  uint64_t trace_scene_seed = 0;
  long trace_induct = 0;
  trace->add_option("--model", trace_model, "trained model file");
  trace->add_option("--out", trace_out, "output trace JSON");
  auto* trace_seed_opt = trace->add_option("--scene-seed", trace_scene_seed,
                                           "explicit scene seed");
  trace->add_option("--induct", trace_induct,
                    "A/B induct index used to derive the scene seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    pc::RunConfig cfg = config_path.empty()
                            ? pc::default_run_config()
                            : pc::load_run_config(config_path);
    if (seed_opt->count() > 0) cfg.seed = seed_flag;
    if (threads_opt->count() > 0) cfg.threads = threads_flag;

    if (app.got_subcommand(gen)) {
      if (count_opt->count() > 0) cfg.n_scenes = count_flag;
      const size_t n = pc::cmd_gen_scenes(cfg, scenes_out);
      if (n == 0) std::cerr << "warning: 0 scenes requested\n";
      std::cout << "wrote " << n << " scenes to " << scenes_out << '\n';
    } else if (app.got_subcommand(collect)) {
      if (pps_opt->count() > 0) cfg.picks_per_scene = pps_flag;
      const auto r = pc::cmd_collect_picks(cfg, collect_scenes, picks_out);
      std::cout << "wrote " << r.records << " pick records (" << r.infeasible
                << " infeasible) to " << picks_out << '\n';
    } else if (app.got_subcommand(gend)) {
      if (split_opt->count() > 0) cfg.split_fraction = split_flag;
      const auto r =
          pc::cmd_gen_dataset(cfg, gend_scenes, gend_picks, dataset_out);
      std::cout << "wrote " << r.train << " train / " << r.test
                << " test pairs to " << dataset_out << '\n';
    } else if (app.got_subcommand(train)) {
      if (kind_opt->count() > 0)
        cfg.model_kind = pickopt::model_kind_from_string(kind_flag);
      const auto r =
          pc::cmd_train(cfg, train_dataset, cfg.model_kind, model_out);
      std::cout << "wrote model to " << model_out << "\nheld-out RMSE:\n"
                << r.table;
    } else if (app.got_subcommand(opt)) {
      const uint64_t scene_seed =
          opt_seed_opt->count() > 0
              ? opt_scene_seed
              : pickopt::derive_seed(pc::stage_seed(cfg, "abtest"),
                                     static_cast<uint64_t>(opt_induct));
      const auto s = pc::cmd_optimize(cfg, opt_model, scene_seed, opt_out);
      std::cout << "scene seed " << s.scene_seed << ": score "
                << s.initial_score << " -> " << s.refined_score << " in "
                << s.trace.iterations_run << " iterations\n";
      if (!opt_out.empty()) std::cout << "wrote " << opt_out << '\n';
    } else if (app.got_subcommand(ab)) {
      if (inducts_opt->count() > 0) cfg.inducts = inducts_flag;
      const auto report =
          pc::cmd_abtest(cfg, ab_model, report_json, report_text);
      std::cout << pickopt::report_text(report);
      std::cout << "wrote " << report_json << " and " << report_text << '\n';
    } else if (app.got_subcommand(trace)) {
      const uint64_t scene_seed =
          trace_seed_opt->count() > 0
              ? trace_scene_seed
              : pickopt::derive_seed(pc::stage_seed(cfg, "abtest"),
                                     static_cast<uint64_t>(trace_induct));
      const auto s = pc::cmd_dump_trace(cfg, trace_model, scene_seed,
                                        trace_out);
      std::cout << "wrote trace (" << s.trace.steps.size() << " steps) to "
                << trace_out << '\n';
    }
    return 0;
  } catch (const pickopt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const pickopt::DataFormatError& e) {
    std::cerr << "data format error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}
