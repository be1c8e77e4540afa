#include <CLI11.hpp>

#include "norminflate/cli.hpp"

namespace cli = norminflate::cli;

int main(int argc, char** argv) {
  CLI::App app{"Norm inflation experiments for the Boussinesq system"};
  std::string command;
  std::string config_path;
  std::vector<std::string> sets;
  unsigned jobs = 0;
  bool plot = false, deterministic = false;
  app.add_option("command", command, "construct | picard | simulate | besov | sweep | witness (default: from config)")
      ->check(CLI::IsMember(cli::commands()));
  app.add_option("--config", config_path, "JSON config (see schemas/config.schema.json)");
  app.add_option("--set", sets, "override a config value, e.g. --set params.beta=0.3")->take_all();
  app.add_option("--jobs", jobs, "worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_flag("--plot", plot, "also write SVG plots");
  app.add_flag("--deterministic", deterministic, "reproducible FFT plans");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitUsage;
  }

  cli::RunConfig config;
  try {
    auto j = config_path.empty() ? cli::json::object() : cli::load_json_file(config_path);
    if (!command.empty()) j["command"] = command;
    for (const auto& s : sets) cli::apply_override(j, s);
    if (jobs > 0) j["jobs"] = jobs;
    if (plot) j["plot"] = true;
    if (deterministic) j["deterministic"] = true;
    config = cli::from_json(j);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitUsage;
  }
  return cli::run(config);
}
