// qstab: command-line front end for the stabilization pipeline.
//
//   qstab <simulate|stabilize|learn|classify|metrics|figures> --config FILE --out DIR
//         [--seed N] [--input FILE]
//
// Exit status: 0 on success, 1 for configuration or file errors, 2 when the
// computation itself fails.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qstab/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
namespace pl = qstab::pipeline;

int exit_code(qstab::ErrorCode code) {
  return code == qstab::ErrorCode::Config || code == qstab::ErrorCode::Io ? 1 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stabilize gate parameters of repeated variational circuit runs"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::string input_path;

  using Stage = std::function<qstab::io::json(const pl::PipelineConfig&, const fs::path&, const std::optional<fs::path>&)>;
  struct Command {
    const char* name;
    const char* help;
    Stage run;
    bool takes_input;
  };
  const Command commands[] = {
      {"simulate", "run the circuit R times and write alpha.csv",
       [](const auto& c, const auto& o, const auto&) { return pl::cmd_simulate(c, o); }, false},
      {"stabilize", "solve for S and write beta.csv", pl::cmd_stabilize, true},
      {"learn", "project the training set and write learner.json", pl::cmd_learn, true},
      {"classify", "fit stability classes and write assignments.csv", pl::cmd_classify, true},
      {"metrics", "relative entropy, delta and mu; writes report.json", pl::cmd_metrics, true},
      {"figures", "model curves and grids for the stability plots",
       [](const auto& c, const auto& o, const auto&) { return pl::cmd_figures(c, o); }, false},
  };

  const Command* chosen = nullptr;
  for (const auto& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", config_path, "JSON configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "override the configured seed");
    if (cmd.takes_input) sub->add_option("--input", input_path, "read the stage input from this CSV instead");
    sub->callback([&chosen, &cmd] { chosen = &cmd; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    pl::PipelineConfig cfg = pl::load_config(config_path);
    if (seed) cfg.seed = *seed;
    std::optional<fs::path> input;
    if (!input_path.empty()) input = input_path;
    chosen->run(cfg, out_dir, input);
    std::cout << chosen->name << ": wrote " << fs::path(out_dir).string() << "\n";
    return 0;
  } catch (const qstab::Error& e) {
    std::cerr << "qstab " << chosen->name << ": " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "qstab " << chosen->name << ": " << e.what() << "\n";
    return 2;
  }
}
