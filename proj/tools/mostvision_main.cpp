// Command-line front end for the mostvision pipeline. Talks to the core
// exclusively through the C API in mostvision.h.

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mostvision.h"

namespace {

struct SharedFlags {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> data_dir;
  std::optional<double> scale;
  std::optional<int> train_count, val_count, test_count;
  std::optional<int> max_epochs;
  std::string models = "all";
};

// Layer the flag overrides onto the config file (or the built-in defaults).
std::string build_config_json(const SharedFlags& flags) {
  nlohmann::json config;
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path);
    if (!in) {
      std::fprintf(stderr, "error: cannot open config: %s\n", flags.config_path.c_str());
      std::exit(MV_CONFIG_ERROR);
    }
    config = nlohmann::json::parse(in, nullptr, false);
    if (config.is_discarded()) {
      std::fprintf(stderr, "error: config is not valid JSON: %s\n", flags.config_path.c_str());
      std::exit(MV_CONFIG_ERROR);
    }
  } else {
    const size_t needed = mv_default_config(nullptr, 0);
    std::string text(needed + 1, '\0');
    mv_default_config(text.data(), text.size());
    text.resize(needed);
    config = nlohmann::json::parse(text);
  }
  if (flags.seed) config["seed"] = *flags.seed;
  if (flags.out_dir) config["out_dir"] = *flags.out_dir;
  if (flags.data_dir) config["data_dir"] = *flags.data_dir;
  if (flags.scale) config["scale"] = *flags.scale;
  if (flags.train_count) config["dataset"]["train"] = *flags.train_count;
  if (flags.val_count) config["dataset"]["val"] = *flags.val_count;
  if (flags.test_count) config["dataset"]["test"] = *flags.test_count;
  if (flags.max_epochs) {
    config["training"]["cnn"]["epoch_cap"] = *flags.max_epochs;
    config["training"]["ram"]["epoch_cap"] = *flags.max_epochs;
  }
  return config.dump();
}

int run_stage(const SharedFlags& flags, const std::string& stage) {
  const std::string config_json = build_config_json(flags);
  mv_context* ctx = nullptr;
  mv_status status = mv_context_create(config_json.c_str(), &ctx);
  if (status != MV_OK) {
    std::fprintf(stderr, "error: invalid configuration (status %d)\n", status);
    return status;
  }

  if (stage == "generate") status = mv_generate(ctx);
  else if (stage == "train") status = mv_train(ctx, flags.models.c_str());
  else if (stage == "eval") status = mv_eval(ctx, flags.models.c_str());
  else if (stage == "analyze") status = mv_analyze(ctx);
  else if (stage == "plot") status = mv_plot(ctx);
  else if (stage == "all") status = mv_run_all(ctx);

  if (status != MV_OK)
    std::fprintf(stderr, "error: %s\n", mv_last_error(ctx));
  else
    std::printf("%s: done\n", stage.c_str());
  mv_context_destroy(ctx);
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dot-stimulus verification experiment pipeline"};
  app.set_version_flag("--version", mv_version());
  app.require_subcommand(1);

  SharedFlags flags;
  std::string stage;
  auto add_shared = [&](CLI::App* cmd) {
    cmd->add_option("--config", flags.config_path, "Config file (JSON)");
    cmd->add_option("--seed", flags.seed, "Global seed");
    cmd->add_option("--out", flags.out_dir, "Output directory");
    cmd->add_option("--scale", flags.scale,
                    "Uniform desk-scale factor for dataset cells and epoch caps");
    cmd->callback([&, cmd] { stage = cmd->get_name(); });
  };

  CLI::App* generate = app.add_subcommand("generate", "Create the stimulus dataset");
  add_shared(generate);
  generate->add_option("--train", flags.train_count, "Training images (multiple of 72)");
  generate->add_option("--val", flags.val_count, "Validation images (multiple of 72)");
  generate->add_option("--test", flags.test_count, "Test images (multiple of 72)");

  CLI::App* train = app.add_subcommand("train", "Train model configurations");
  add_shared(train);
  std::string family;
  std::optional<int> duration;
  train->add_option("--family", family, "cnn or ram (with --duration)");
  train->add_option("--duration", duration, "Depth (7/9/11/13) or glimpses (4/8/16/24)");
  train->add_option("--models", flags.models, "Comma-separated model ids, or 'all'");
  train->add_option("--data", flags.data_dir, "Dataset directory (default: OUT/dataset)");
  train->add_option("--max-epochs", flags.max_epochs, "Absolute epoch cap after scaling");

  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate trained models on the test split");
  add_shared(eval_cmd);
  eval_cmd->add_option("--family", family, "cnn or ram (with --duration)");
  eval_cmd->add_option("--duration", duration, "Depth or glimpse count");
  eval_cmd->add_option("--models", flags.models, "Comma-separated model ids, or 'all'");
  eval_cmd->add_option("--data", flags.data_dir, "Dataset directory (default: OUT/dataset)");

  CLI::App* analyze = app.add_subcommand("analyze", "Accuracy, Weber fits, regression");
  add_shared(analyze);

  CLI::App* plot = app.add_subcommand("plot", "Emit SVG figures");
  add_shared(plot);

  CLI::App* all_cmd = app.add_subcommand("all", "Run the full pipeline");
  add_shared(all_cmd);
  all_cmd->add_option("--models", flags.models, "Comma-separated model ids, or 'all'");
  all_cmd->add_option("--max-epochs", flags.max_epochs, "Absolute epoch cap after scaling");

  CLI11_PARSE(app, argc, argv);

  if (!family.empty()) {
    if (!duration) {
      std::fprintf(stderr, "error: --family needs --duration\n");
      return MV_CONFIG_ERROR;
    }
    if (family != "cnn" && family != "ram") {
      std::fprintf(stderr, "error: --family must be cnn or ram\n");
      return MV_CONFIG_ERROR;
    }
    flags.models = (family == "cnn" ? "vgg" : "ram") + std::to_string(*duration);
  }
  return run_stage(flags, stage);
}
