#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "chaoslab/errors.hpp"
#include "chaoslab/experiment.hpp"

namespace {

int env_threads() {
  const char* v = std::getenv("CHAOSLAB_THREADS");
  if (v == nullptr || *v == '\0') return 0;
  try {
    return std::max(1, std::stoi(v));
  } catch (const std::exception&) {
    std::cerr << "ignoring malformed CHAOSLAB_THREADS='" << v << "'\n";
    return 0;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chaoslab: mean-field Gibbs measures and chaos bounds"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string output_dir;
  int threads = 0;
  std::int64_t seed = -1;

  const char* commands[][2] = {
      {"constants", "Constants of the chaos bound for each N"},
      {"fixed-point", "Solve the mean-field fixed point"},
      {"chaos-scan", "Exact relative entropy levels against the bounds"},
      {"verify", "Functional inequality scans"},
      {"sample", "Run the MCMC sampler"},
      {"jw", "Log moment generating function bound"},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c[0], c[1]);
    sub->add_option("--config", config_path, "JSON experiment config")->required();
    sub->add_option("--output-dir", output_dir, "Directory for outputs");
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Override the config seed")->check(CLI::NonNegativeNumber);
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw chaoslab::ConfigError("", "cannot read config file " + config_path);
    std::ostringstream text;
    text << in.rdbuf();
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text.str());
    } catch (const nlohmann::json::parse_error& e) {
      throw chaoslab::ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw chaoslab::ConfigError("", "config must be a JSON object");
    if (doc.contains("command") && doc["command"] != command) {
      throw chaoslab::ConfigError("command", "config is for '" +
                                                 doc["command"].get<std::string>() +
                                                 "' but '" + command + "' was requested");
    }
    doc["command"] = command;
    if (seed >= 0) doc["seed"] = seed;

    chaoslab::ExperimentConfig cfg = chaoslab::parse_config(doc.dump());
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    if (threads > 0) {
      cfg.threads = threads;
    } else if (const int t = env_threads(); t > 0) {
      cfg.threads = t;
    }

    const chaoslab::RunReport report = chaoslab::run(cfg);
    std::cout << report.to_json() << '\n';
    return report.all_passed() ? 0 : 1;
  } catch (const chaoslab::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const chaoslab::Error& e) {
    std::cerr << chaoslab::to_string(e.code()) << ": " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
