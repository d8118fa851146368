// Command-line front end: run a scenario, write a preset scenario, or sweep a
// parameter over several values.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "psz/error.hpp"
#include "psz/scenario.hpp"

namespace {

constexpr double kSteadyFraction = 0.2;

std::vector<std::string> split_values(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void print_summary(const psz::RunResult& result) {
  const auto& curve = result.simulation.curve;
  std::cout << "iterations: " << curve.points.size() << "\n";
  if (!curve.points.empty()) {
    const auto s = psz::steady_state(curve, kSteadyFraction);
    std::cout << "steady-state mse_db: " << s.mse_db << "\n"
              << "steady-state ac_db: " << s.ac_db << "\n";
  }
}

int cmd_run(const std::string& config, const std::string& out) {
  const psz::Scenario scenario = psz::load_scenario(config);
  const psz::RunResult result = psz::run(scenario);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  psz::emit(result, out);
  print_summary(result);
  return 0;
}

int cmd_preset(const std::string& name, const std::string& out) {
  const psz::PaperPreset preset = psz::paper_preset();
  psz::Scenario scenario;
  if (name == "paper") {
    scenario = preset.scenario;
  } else if (name == "paper-centralized") {
    scenario = preset.for_variant(psz::Variant::centralized, preset.scenario.kappa);
  } else {
    throw psz::Error(psz::ErrorCategory::config, "unknown preset '" + name + "'");
  }
  std::ofstream file(out);
  if (!file) throw psz::Error(psz::ErrorCategory::io, "cannot write " + out);
  file << psz::normalize(scenario);
  if (!file) throw psz::Error(psz::ErrorCategory::io, "write failed for " + out);
  return 0;
}

int cmd_sweep(const std::string& config, const std::string& param, const std::string& values,
              const std::string& out, std::size_t jobs) {
  const psz::Scenario base = psz::load_scenario(config);
  const auto list = split_values(values);
  if (list.empty()) throw psz::Error(psz::ErrorCategory::config, "--values is empty");

  std::vector<psz::Scenario> scenarios;
  for (const auto& v : list) {
    psz::Scenario s = base;
    psz::apply_setting(s, param, v);
    s.validate();
    scenarios.push_back(s);
  }

  std::vector<std::optional<psz::SteadyState>> summary(list.size());
  std::vector<std::exception_ptr> errors(list.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < list.size(); i = next++) {
      try {
        const psz::RunResult result = psz::run(scenarios[i]);
        psz::emit(result, std::filesystem::path(out) / (param + "=" + list[i]));
        if (!result.simulation.curve.points.empty()) {
          summary[i] = psz::steady_state(result.simulation.curve, kSteadyFraction);
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::max<std::size_t>(1, std::min(jobs, list.size())); ++t) {
    pool.emplace_back(worker);
  }
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::ofstream csv(std::filesystem::path(out) / "summary.csv");
  csv << param << ",steady_mse_db,steady_ac_db\n";
  std::cout << param << "\tmse_db\tac_db\n";
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (!summary[i]) continue;
    csv << list[i] << "," << summary[i]->mse_db << "," << summary[i]->ac_db << "\n";
    std::cout << list[i] << "\t" << summary[i]->mse_db << "\t" << summary[i]->ac_db << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Personal sound zone adaptive control simulator"};
  app.require_subcommand(1);

  std::string config, out, name = "paper", param, values;
  std::size_t jobs = 1;

  auto* run = app.add_subcommand("run", "Run one scenario and write its result files");
  run->add_option("--config", config, "Scenario file (key=value)")->required();
  run->add_option("--out", out, "Output directory")->required();

  auto* preset = app.add_subcommand("preset", "Write a preset scenario file");
  preset->add_option("--name", name, "paper | paper-centralized");
  preset->add_option("--out", out, "Output file")->required();

  auto* sweep = app.add_subcommand("sweep", "Run a scenario once per parameter value");
  sweep->add_option("--config", config, "Base scenario file")->required();
  sweep->add_option("--param", param, "Config key to vary (e.g. kappa)")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_option("--out", out, "Output directory (one subdirectory per value)")->required();
  sweep->add_option("--jobs", jobs, "Parallel runs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config, out);
    if (*preset) return cmd_preset(name, out);
    if (*sweep) return cmd_sweep(config, param, values, out, jobs);
  } catch (const psz::Error& e) {
    std::cerr << e.what() << "\n";
    return psz::exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
