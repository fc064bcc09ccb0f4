#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "pmsim/config.hpp"
#include "pmsim/presets.hpp"
#include "pmsim/runner.hpp"
#include "pmsim/types.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerics = 3;
constexpr int kExitIo = 4;

enum class SourceKind { File, Preset, Builtin };

SourceKind classify_source(const std::string& arg) {
  if (std::filesystem::exists(arg)) return SourceKind::File;
  if (pmsim::is_builtin_preset(arg)) return SourceKind::Builtin;
  if (pmsim::is_preset(arg)) return SourceKind::Preset;
  throw pmsim::IoError("'" + arg + "' is neither a readable file nor a known preset; run 'pmsim presets' for the bundled names");
}

pmsim::ExperimentConfig load_source(const std::string& arg, SourceKind kind) {
  if (kind == SourceKind::File) return pmsim::load_config_file(arg);
  return pmsim::preset_config(arg);
}

void write_output(const pmsim::ResultEnvelope& env, const std::string& path,
                  const std::string& format) {
  const std::string text = format == "csv" ? env.csv_text() : env.json_text();
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw pmsim::IoError("cannot open output file '" + path + "'");
  out << text;
  if (!out) throw pmsim::IoError("failed writing output file '" + path + "'");
  std::cerr << "wrote " << path << "\n";
}

int cmd_run(const std::string& source, bool seed_set, std::uint64_t seed, const std::string& out,
            const std::string& format, int jobs) {
  const SourceKind kind = classify_source(source);
  pmsim::ResultEnvelope env;
  std::string path = out;
  std::string fmt = format;
  if (kind == SourceKind::Builtin) {
    if (seed_set)
      std::cerr << "note: builtin scenarios carry their own seeds; --seed ignored\n";
    env = pmsim::run_builtin(source, jobs, &std::cerr);
    if (fmt.empty()) fmt = "json";
  } else {
    pmsim::ExperimentConfig cfg = load_source(source, kind);
    if (seed_set) cfg.data["seed"] = seed;
    if (!out.empty()) cfg.data["output"]["path"] = out;
    if (!format.empty()) cfg.data["output"]["format"] = format;
    path = cfg.output_path();
    fmt = cfg.output_format();
    env = pmsim::run_command(cfg, jobs);
  }
  write_output(env, path, fmt);
  if (env.diagnostic_failure()) {
    std::cerr << "diagnostic failure: see the summary block\n";
    return kExitNumerics;
  }
  return kExitOk;
}

int cmd_validate(const std::string& source) {
  const SourceKind kind = classify_source(source);
  if (kind == SourceKind::Builtin) {
    std::cout << "builtin scenario '" << source << "' (no config form)\n";
    return kExitOk;
  }
  load_source(source, kind);  // throws ConfigError with the violation list
  std::cout << "ok\n";
  return kExitOk;
}

int cmd_presets() {
  for (const auto& p : pmsim::list_presets()) {
    std::printf("%-22s %s%s\n", p.name.c_str(), p.builtin ? "[builtin] " : "",
                p.description.c_str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"protective-measurement simulator"};
  app.require_subcommand(1);

  std::string source;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  std::string format;
  int jobs = 1;

  auto* run = app.add_subcommand("run", "run a config file or preset and write the result");
  run->add_option("source", source, "config file path or preset name")->required();
  run->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
    seed_set = true;
  });
  run->add_option("--out", out, "output file (default: config output.path, else stdout)");
  run->add_option("--format", format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  run->add_option("--jobs", jobs, "worker threads (never changes results)")
      ->check(CLI::Range(1, 64));

  auto* validate = app.add_subcommand("validate", "check a config file or preset");
  validate->add_option("source", source, "config file path or preset name")->required();

  app.add_subcommand("presets", "list bundled presets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(source, seed_set, seed, out, format, jobs);
    if (validate->parsed()) return cmd_validate(source);
    return cmd_presets();
  } catch (const pmsim::ConfigError& e) {
    std::cerr << "config error:\n" << e.what() << "\n";
    return kExitConfig;
  } catch (const pmsim::NumericsError& e) {
    std::cerr << "numerics error: " << e.what() << "\n";
    return kExitNumerics;
  } catch (const pmsim::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  }
}
