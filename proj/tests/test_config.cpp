#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <string>
#include <vector>

#include "pmsim/presets.hpp"

using namespace pmsim;
using nlohmann::json;

namespace {

json minimal_protective() {
  return json::parse(R"({
    "command": "protective",
    "system": {"kind": "spin"},
    "coupling": {"tau": 1.0, "dt": 0.0005},
    "pointer": {"cells": 128, "lo": -2.0, "hi": 3.0},
    "cases": [
      {"label": "base",
       "state": {"preset": "ket0"},
       "observable": {"preset": "p0"},
       "protection": {"scheme": "magnetic", "axis": [0.0, 0.0, 1.0], "omega": 200.0}}
    ]
  })");
}

bool has_violation(const std::vector<std::string>& v, const std::string& needle) {
  return std::any_of(v.begin(), v.end(),
                     [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("bundled presets parse cleanly and round-trip") {
  int config_backed = 0;
  for (const auto& info : list_presets()) {
    CHECK(is_preset(info.name));
    if (info.builtin) {
      CHECK(is_builtin_preset(info.name));
      CHECK_THROWS_AS(preset_text(info.name), ConfigError);
      continue;
    }
    ++config_backed;
    const json raw = json::parse(preset_text(info.name));
    CHECK(validate_config(raw).empty());
    const ExperimentConfig cfg = preset_config(info.name);
    const ExperimentConfig again = parse_config_text(cfg.data.dump());
    CHECK(cfg == again);
  }
  CHECK(config_backed == 6);
  CHECK(!is_preset("no_such_preset"));
  CHECK_THROWS_AS(preset_text("no_such_preset"), ConfigError);
}

TEST_CASE("parsing fills normalized defaults") {
  const ExperimentConfig cfg = parse_config(minimal_protective());
  CHECK(cfg.seed() == 0);
  CHECK(cfg.output_path().empty());
  CHECK(cfg.output_format() == "json");
  CHECK(cfg.data["coupling"]["shape"] == "sin2");
  CHECK(cfg.data["pointer"]["center"] == 0.0);
  CHECK(cfg.command() == "protective");

  const ExperimentConfig ont = parse_config(
      json::parse(R"({"command": "ont-check", "model": {"kind": "ks", "resolution": 1000}})"));
  CHECK(ont.data["tolerance"] == 1e-6);
}

TEST_CASE("every violation is collected, not just the first") {
  json bad = minimal_protective();
  bad["coupling"]["tau"] = -2.0;                       // not positive
  bad["pointer"]["cells"] = 6;                         // below minimum
  bad["cases"][0]["observable"] = {{"preset", "hmm"}}; // unknown preset
  bad["stray"] = 1;                                    // unknown key
  const auto violations = validate_config(bad);
  CHECK(violations.size() >= 4);
  CHECK(has_violation(violations, "coupling.tau"));
  CHECK(has_violation(violations, "pointer.cells"));
  CHECK(has_violation(violations, "observable.preset"));
  CHECK(has_violation(violations, "config.stray: unknown key"));
  try {
    parse_config(bad);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.violations.size() == violations.size());
    CHECK(std::string(e.what()).find("invalid config") != std::string::npos);
    CHECK(std::string(e.what()).find("coupling.tau") != std::string::npos);
  }
}

TEST_CASE("time-step constraints carry actionable hints") {
  json j = minimal_protective();
  j["coupling"]["dt"] = 0.0003;  // does not divide tau
  CHECK(has_violation(validate_config(j), "choose dt = tau/k"));
  j["coupling"]["dt"] = 0.05;  // coarser than tau/100
  CHECK(has_violation(validate_config(j), "at most tau/100"));

  json z = minimal_protective();
  // 2000 steps cannot split into 3 equal segments
  z["cases"][0]["protection"] =
      json::parse(R"({"scheme": "zeno", "chi": "self", "n_projections": 3})");
  CHECK(has_violation(validate_config(z), "choose dt = tau/(3*k)"));
  z["cases"][0]["protection"]["n_projections"] = 4;
  CHECK(validate_config(z).empty());
}

TEST_CASE("states and observables are dimension-checked") {
  json j = minimal_protective();
  j["cases"][0]["state"] =
      json::parse(R"({"amplitudes": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]]})");
  CHECK(has_violation(validate_config(j), "length must equal the system dimension (2)"));

  json h = minimal_protective();
  h["cases"][0]["observable"] =
      json::parse(R"({"matrix": [[[0.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]})");
  CHECK(has_violation(validate_config(h), "must be hermitian"));

  json c = minimal_protective();
  c["pointer"]["center"] = 5.0;
  CHECK(has_violation(validate_config(c), "must lie inside [lo, hi]"));

  json s = minimal_protective();
  s["seed"] = -3;
  CHECK(has_violation(validate_config(s), "seed"));
}

TEST_CASE("composite dimension budget is enforced") {
  const json j = json::parse(R"({
    "command": "reconstruct",
    "system": {"kind": "grid1d", "cells": 4096, "x_min": -8.0, "x_max": 8.0},
    "regions": 16,
    "coupling": {"tau": 50.0, "dt": 0.05},
    "pointer": {"cells": 8, "lo": -1.5, "hi": 2.0},
    "protection": {"scheme": "energy_gap", "level": 0},
    "cases": [{"label": "g", "state": {"preset": "eigenlevel", "level": 0}, "mode": "exact"}]
  })");
  CHECK(has_violation(validate_config(j), "exceeds the composite cap"));
  json ok = j;
  ok["system"]["cells"] = 128;
  CHECK(validate_config(ok).empty());
  json big = j;
  big["system"]["cells"] = 8192;
  CHECK(has_violation(validate_config(big), "at most 4096"));
}

TEST_CASE("ont-check model constraints") {
  json j = json::parse(R"({"command": "ont-check", "model": {"kind": "ks", "resolution": 99}})");
  CHECK(has_violation(validate_config(j), "at least 100"));
  j["model"]["resolution"] = 100;
  CHECK(validate_config(j).empty());
  j["model"]["kind"] = "other";
  CHECK(has_violation(validate_config(j), "unknown value 'other'"));
}

TEST_CASE("unknown commands and malformed json fail loudly") {
  CHECK(has_violation(validate_config(json::parse(R"({"command": "warp"})")),
                      "unknown command 'warp'"));
  CHECK(has_violation(validate_config(json::parse(R"([1, 2])")), "must be a JSON object"));
  CHECK_THROWS_AS(parse_config_text("{not json"), ConfigError);
  CHECK_THROWS_AS(load_config_file("/nonexistent/path/config.json"), IoError);
}
