// anneal-vqo: annealing-inspired variational optimization workbench.
//
// Every subcommand reads a JSON config, writes result files into the output
// directory, and prints the result JSON to stdout.  Failures print
// {"error": ...} and exit nonzero.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "avqo/harness.hpp"

namespace {

avqo::harness::json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  avqo::harness::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("config " + path + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) throw std::runtime_error("config " + path + ": expected a JSON object");
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Annealing-inspired variational optimization workbench"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int jobs = 0;
  auto* config_opt = app.add_option("--config", config_path, "JSON config file")
                         ->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "run seed (overrides the config)");
  auto* out_opt = app.add_option("--out", out_dir, "output directory");
  auto* jobs_opt = app.add_option("--jobs", jobs, "worker thread count");

  struct Command {
    const char* name;
    const char* help;
  };
  constexpr Command kCommands[] = {
      {"generate", "generate a hard unique-solution instance ensemble"},
      {"aqa", "run the Trotterized anneal on one instance"},
      {"scan", "success probability over a (tau, p) grid"},
      {"trace", "layer-by-layer overlaps with the instantaneous spectrum"},
      {"qaoa", "variational optimization of the layer angles"},
      {"ehqo", "stagewise optimization over interpolated Hamiltonians"},
      {"bench", "run algorithm variants over an ensemble, report quartiles"},
      {"scaling", "mean success vs problem size with a log-linear fit"},
  };
  for (const Command& c : kCommands) app.add_subcommand(c.name, c.help)->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (config_opt->count() == 0) throw std::runtime_error("--config is required");
    avqo::harness::CommandContext ctx;
    ctx.config = load_config(config_path);
    ctx.seed = seed_opt->count() ? seed
                                 : avqo::harness::jget_or<std::uint64_t>(ctx.config, "seed", 0,
                                                                         "config");
    if (out_opt->count()) {
      ctx.out_dir = out_dir;
    } else if (const char* env = std::getenv(avqo::harness::kOutDirEnvVar); env && *env) {
      ctx.out_dir = env;
    } else {
      ctx.out_dir = ".";
    }
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    ctx.jobs = jobs_opt->count()
                   ? jobs
                   : avqo::harness::jget_or<int>(ctx.config, "jobs", static_cast<int>(hw),
                                                 "config");
    if (ctx.jobs < 1) throw std::runtime_error("--jobs must be at least 1");

    const std::string command = app.get_subcommands().front()->get_name();
    const avqo::harness::json result = avqo::harness::run_command(command, ctx);
    std::cout << result.dump(2) << std::endl;
    return 0;
  } catch (const std::exception& e) {
    nlohmann::ordered_json err;
    err["error"] = e.what();
    std::cout << err.dump() << std::endl;
    return 1;
  }
}
