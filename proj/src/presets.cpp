#include "pmsim/presets.hpp"

#include <map>

namespace pmsim {

namespace {

const char* kSpinP0Ideal = R"JSON({
  "command": "protective",
  "seed": 1,
  "system": {"kind": "spin"},
  "coupling": {"shape": "sin2", "tau": 1.0, "dt": 0.0005},
  "pointer": {"cells": 256, "lo": -2.0, "hi": 3.0, "sigma": 0.05},
  "cases": [
    {"label": "ket0_p0_magnetic_z",
     "state": {"preset": "ket0"},
     "observable": {"preset": "p0"},
     "protection": {"scheme": "magnetic", "axis": [0.0, 0.0, 1.0], "omega": 200.0}},
    {"label": "ket_plus_p0_magnetic_x",
     "state": {"preset": "ket_plus"},
     "observable": {"preset": "p0"},
     "protection": {"scheme": "magnetic", "axis": [1.0, 0.0, 0.0], "omega": 200.0}}
  ]
})JSON";

const char* kRandomQubitShift = R"JSON({
  "command": "protective",
  "seed": 7,
  "system": {"kind": "spin"},
  "coupling": {"shape": "sin2", "tau": 1.0, "dt": 0.0005},
  "pointer": {"cells": 256, "lo": -4.0, "hi": 4.0, "sigma": 0.1},
  "cases": [
    {"label": "random_0", "state": {"preset": "random", "index": 0},
     "observable": {"preset": "random_hermitian", "index": 0},
     "protection": {"scheme": "magnetic", "axis": "state", "omega": 200.0}},
    {"label": "random_1", "state": {"preset": "random", "index": 1},
     "observable": {"preset": "random_hermitian", "index": 1},
     "protection": {"scheme": "magnetic", "axis": "state", "omega": 200.0}},
    {"label": "random_2", "state": {"preset": "random", "index": 2},
     "observable": {"preset": "random_hermitian", "index": 2},
     "protection": {"scheme": "magnetic", "axis": "state", "omega": 200.0}},
    {"label": "random_3", "state": {"preset": "random", "index": 3},
     "observable": {"preset": "random_hermitian", "index": 3},
     "protection": {"scheme": "magnetic", "axis": "state", "omega": 200.0}},
    {"label": "random_4", "state": {"preset": "random", "index": 4},
     "observable": {"preset": "random_hermitian", "index": 4},
     "protection": {"scheme": "magnetic", "axis": "state", "omega": 200.0}},
    {"label": "random_5", "state": {"preset": "random", "index": 5},
     "observable": {"preset": "random_hermitian", "index": 5},
     "protection": {"scheme": "magnetic", "axis": "state", "omega": 200.0}},
    {"label": "random_6", "state": {"preset": "random", "index": 6},
     "observable": {"preset": "random_hermitian", "index": 6},
     "protection": {"scheme": "magnetic", "axis": "state", "omega": 200.0}},
    {"label": "random_7", "state": {"preset": "random", "index": 7},
     "observable": {"preset": "random_hermitian", "index": 7},
     "protection": {"scheme": "magnetic", "axis": "state", "omega": 200.0}},
    {"label": "random_8", "state": {"preset": "random", "index": 8},
     "observable": {"preset": "random_hermitian", "index": 8},
     "protection": {"scheme": "magnetic", "axis": "state", "omega": 200.0}},
    {"label": "random_9", "state": {"preset": "random", "index": 9},
     "observable": {"preset": "random_hermitian", "index": 9},
     "protection": {"scheme": "magnetic", "axis": "state", "omega": 200.0}}
  ]
})JSON";

const char* kZenoSurvivalSweep = R"JSON({
  "command": "realistic-sweep",
  "seed": 11,
  "system": {"kind": "spin"},
  "coupling": {"shape": "sin2", "tau": 1.0, "dt": 0.00048828125},
  "pointer": {"cells": 256, "lo": -2.0, "hi": 3.0, "sigma": 0.25},
  "states": [{"preset": "ket_plus"}],
  "observable": {"preset": "p0"},
  "protection": {"scheme": "zeno", "chi": "self"},
  "sweep": {"parameter": "n_projections", "values": [16, 32, 64, 128, 256, 512, 1024]},
  "runs": 256
})JSON";

const char* kZenoOverlapSweep = R"JSON({
  "command": "realistic-sweep",
  "seed": 13,
  "system": {"kind": "spin"},
  "coupling": {"shape": "sin2", "tau": 1.0, "dt": 0.00048828125},
  "pointer": {"cells": 256, "lo": -2.0, "hi": 3.0, "sigma": 0.05},
  "states": [{"preset": "ket0"}, {"preset": "ket_plus"}],
  "observable": {"preset": "p0"},
  "protection": {"scheme": "zeno", "chi": "self"},
  "sweep": {"parameter": "n_projections",
            "values": [1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024]},
  "runs": 10000
})JSON";

const char* kReconstructSuite = R"JSON({
  "command": "reconstruct",
  "seed": 17,
  "system": {"kind": "grid1d", "cells": 128, "x_min": -8.125, "x_max": 7.875,
             "potential": "harmonic"},
  "regions": 64,
  "coupling": {"shape": "sin2", "tau": 100.0, "dt": 0.1},
  "pointer": {"cells": 48, "lo": -1.5, "hi": 2.0, "sigma": 0.2},
  "protection": {"scheme": "energy_gap", "level": 0},
  "cases": [
    {"label": "ho0_exact", "state": {"preset": "eigenlevel", "level": 0}, "mode": "exact"},
    {"label": "ho0_protective", "state": {"preset": "eigenlevel", "level": 0},
     "mode": "protective"},
    {"label": "ho1_exact", "state": {"preset": "eigenlevel", "level": 1}, "mode": "exact"},
    {"label": "ho2_exact", "state": {"preset": "eigenlevel", "level": 2}, "mode": "exact"},
    {"label": "boosted_exact",
     "state": {"preset": "boosted_gaussian", "x0": 0.0, "sigma": 1.0, "k": 1.0},
     "mode": "exact"}
  ]
})JSON";

const char* kOntCheckKs = R"JSON({
  "command": "ont-check",
  "seed": 23,
  "model": {"kind": "ks", "resolution": 10000},
  "tolerance": 1e-6
})JSON";

const std::map<std::string, const char*>& preset_map() {
  static const std::map<std::string, const char*> presets = {
      {"spin_p0_ideal", kSpinP0Ideal},
      {"random_qubit_shift", kRandomQubitShift},
      {"zeno_survival_sweep", kZenoSurvivalSweep},
      {"zeno_overlap_sweep", kZenoOverlapSweep},
      {"reconstruct_suite", kReconstructSuite},
      {"ont_check_ks", kOntCheckKs},
  };
  return presets;
}

}  // namespace

const std::vector<PresetInfo>& list_presets() {
  static const std::vector<PresetInfo> infos = {
      {"spin_p0_ideal", "ideal protective spin readouts: <P0> = 1 for |0>, 1/2 for |+>", false},
      {"random_qubit_shift", "pointer shift vs <A> for seeded random qubit states", false},
      {"zeno_survival_sweep", "projection count vs survival for Zeno-protected |+>", false},
      {"zeno_overlap_sweep", "readout-histogram overlap of |0> vs |+> across N", false},
      {"reconstruct_suite", "density/flux measurement and wavefunction reconstruction", false},
      {"ont_check_ks", "ontological-model reproduction, overlap, and consistency checks", false},
      {"numerical_hygiene", "integrator order fit, protection independence, norm drift", true},
      {"all-acceptance", "every bundled scenario plus the hygiene gates", true},
  };
  return infos;
}

bool is_preset(const std::string& name) {
  for (const auto& p : list_presets())
    if (p.name == name) return true;
  return false;
}

bool is_builtin_preset(const std::string& name) {
  for (const auto& p : list_presets())
    if (p.name == name) return p.builtin;
  return false;
}

std::string preset_text(const std::string& name) {
  const auto it = preset_map().find(name);
  if (it == preset_map().end())
    throw ConfigError("no config-backed preset named '" + name + "'");
  return it->second;
}

ExperimentConfig preset_config(const std::string& name) {
  return parse_config_text(preset_text(name));
}

}  // namespace pmsim
