#include "pmsim/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "pmsim/hilbert.hpp"

namespace pmsim {

namespace {

using nlohmann::json;

class Validator {
 public:
  std::vector<std::string> violations;

  void fail(const std::string& path, const std::string& msg) {
    violations.push_back(path + ": " + msg);
  }

  // unknown-key rejection plus required-key presence; returns false when j is
  // not an object at all
  bool object(const json& j, const std::string& path, std::initializer_list<const char*> required,
              std::initializer_list<const char*> optional = {}) {
    if (!j.is_object()) {
      fail(path, "must be an object");
      return false;
    }
    std::set<std::string> allowed;
    for (const char* k : required) allowed.insert(k);
    for (const char* k : optional) allowed.insert(k);
    for (const auto& [key, value] : j.items())
      if (allowed.count(key) == 0) fail(path + "." + key, "unknown key");
    bool ok = true;
    for (const char* k : required)
      if (!j.contains(k)) {
        fail(path + "." + k, "required key is missing");
        ok = false;
      }
    return ok;
  }

  bool real(const json& j, const std::string& path) {
    if (j.is_number()) return true;
    fail(path, "must be a number");
    return false;
  }

  bool positive_real(const json& j, const std::string& path) {
    if (!real(j, path)) return false;
    if (j.get<double>() > 0.0) return true;
    fail(path, "must be positive");
    return false;
  }

  bool integer(const json& j, const std::string& path, std::int64_t lo) {
    if (!j.is_number_integer() || (j.is_number_float())) {
      fail(path, "must be an integer");
      return false;
    }
    if (j.get<std::int64_t>() < lo) {
      fail(path, "must be at least " + std::to_string(lo));
      return false;
    }
    return true;
  }

  bool text(const json& j, const std::string& path) {
    if (j.is_string()) return true;
    fail(path, "must be a string");
    return false;
  }

  bool one_of(const json& j, const std::string& path, std::initializer_list<const char*> values) {
    if (!text(j, path)) return false;
    const auto s = j.get<std::string>();
    std::string all;
    for (const char* v : values) {
      if (s == v) return true;
      all += all.empty() ? v : std::string(", ") + v;
    }
    fail(path, "unknown value '" + s + "'; valid: " + all);
    return false;
  }

  // [re, im] pair
  bool complex_pair(const json& j, const std::string& path) {
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) return true;
    fail(path, "must be a [re, im] number pair");
    return false;
  }

  bool axis3(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() ||
        !j[2].is_number()) {
      fail(path, "must be a [x, y, z] number triple");
      return false;
    }
    const double n2 = j[0].get<double>() * j[0].get<double>() +
                      j[1].get<double>() * j[1].get<double>() +
                      j[2].get<double>() * j[2].get<double>();
    if (n2 <= 0.0) {
      fail(path, "must be a nonzero vector");
      return false;
    }
    return true;
  }
};

Eigen::Index system_dim(const json& root) {
  if (!root.contains("system") || !root["system"].is_object()) return -1;
  const auto& sys = root["system"];
  if (!sys.contains("kind") || !sys["kind"].is_string()) return -1;
  if (sys["kind"] == "spin") return 2;
  if (sys["kind"] == "grid1d" && sys.contains("cells") && sys["cells"].is_number_integer())
    return sys["cells"].get<Eigen::Index>();
  return -1;
}

void check_system(Validator& v, const json& j, const std::string& path, bool want_grid) {
  if (want_grid) {
    if (!v.object(j, path, {"kind", "cells", "x_min", "x_max"}, {"potential"})) return;
    v.one_of(j["kind"], path + ".kind", {"grid1d"});
    if (v.integer(j["cells"], path + ".cells", 8)) {
      if (j["cells"].get<std::int64_t>() > 4096) v.fail(path + ".cells", "must be at most 4096");
    }
    if (v.real(j["x_min"], path + ".x_min") && v.real(j["x_max"], path + ".x_max") &&
        !(j["x_min"].get<double>() < j["x_max"].get<double>()))
      v.fail(path + ".x_max", "must exceed x_min");
    if (j.contains("potential")) v.one_of(j["potential"], path + ".potential", {"harmonic"});
  } else {
    if (!v.object(j, path, {"kind"})) return;
    v.one_of(j["kind"], path + ".kind", {"spin"});
  }
}

void check_coupling(Validator& v, const json& j, const std::string& path) {
  if (!v.object(j, path, {"tau", "dt"}, {"shape"})) return;
  if (j.contains("shape")) v.one_of(j["shape"], path + ".shape", {"sin2", "smooth_rect"});
  const bool tau_ok = v.positive_real(j["tau"], path + ".tau");
  const bool dt_ok = v.positive_real(j["dt"], path + ".dt");
  if (tau_ok && dt_ok) {
    const double tau = j["tau"].get<double>();
    const double dt = j["dt"].get<double>();
    const double steps = tau / dt;
    if (std::abs(steps - std::llround(steps)) > 1e-9 * steps)
      v.fail(path + ".dt", "must divide tau into whole steps; choose dt = tau/k");
    if (steps < 100.0 * (1.0 - 1e-12))
      v.fail(path + ".dt", "must be at most tau/100 for a converged integration");
  }
}

void check_pointer(Validator& v, const json& j, const std::string& path) {
  if (!v.object(j, path, {"cells", "lo", "hi"}, {"sigma", "center"})) return;
  if (v.integer(j["cells"], path + ".cells", 8)) {
    if (j["cells"].get<std::int64_t>() > 4096) v.fail(path + ".cells", "must be at most 4096");
  }
  double lo = 0.0;
  double hi = 0.0;
  bool span_ok = false;
  if (v.real(j["lo"], path + ".lo") && v.real(j["hi"], path + ".hi")) {
    lo = j["lo"].get<double>();
    hi = j["hi"].get<double>();
    span_ok = lo < hi;
    if (!span_ok) v.fail(path + ".hi", "must exceed lo");
  }
  if (j.contains("sigma")) v.positive_real(j["sigma"], path + ".sigma");
  if (j.contains("center") && v.real(j["center"], path + ".center") && span_ok) {
    const double c = j["center"].get<double>();
    if (c < lo || c > hi) v.fail(path + ".center", "must lie inside [lo, hi]");
  }
}

void check_state(Validator& v, const json& j, const std::string& path, bool grid,
                 Eigen::Index dim) {
  if (!j.is_object()) {
    v.fail(path, "must be an object");
    return;
  }
  if (j.contains("amplitudes")) {
    if (!v.object(j, path, {"amplitudes"})) return;
    const auto& a = j["amplitudes"];
    if (!a.is_array()) {
      v.fail(path + ".amplitudes", "must be an array of [re, im] pairs");
      return;
    }
    if (dim >= 0 && static_cast<Eigen::Index>(a.size()) != dim) {
      v.fail(path + ".amplitudes",
             "length must equal the system dimension (" + std::to_string(dim) + ")");
      return;
    }
    double n2 = 0.0;
    bool pairs_ok = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!v.complex_pair(a[i], path + ".amplitudes[" + std::to_string(i) + "]")) {
        pairs_ok = false;
        continue;
      }
      n2 += a[i][0].get<double>() * a[i][0].get<double>() +
            a[i][1].get<double>() * a[i][1].get<double>();
    }
    if (pairs_ok && n2 <= 0.0) v.fail(path + ".amplitudes", "must not be all zero");
    return;
  }
  if (!j.contains("preset")) {
    v.fail(path, "needs either a preset or explicit amplitudes");
    return;
  }
  if (!v.text(j["preset"], path + ".preset")) return;
  const auto preset = j["preset"].get<std::string>();
  if (grid) {
    if (preset == "eigenlevel") {
      if (v.object(j, path, {"preset", "level"})) {
        if (v.integer(j["level"], path + ".level", 0) && dim >= 0 &&
            j["level"].get<Eigen::Index>() >= dim)
          v.fail(path + ".level", "must be below the grid dimension");
      }
    } else if (preset == "gaussian") {
      if (v.object(j, path, {"preset", "x0", "sigma"})) {
        v.real(j["x0"], path + ".x0");
        v.positive_real(j["sigma"], path + ".sigma");
      }
    } else if (preset == "boosted_gaussian") {
      if (v.object(j, path, {"preset", "x0", "sigma", "k"})) {
        v.real(j["x0"], path + ".x0");
        v.positive_real(j["sigma"], path + ".sigma");
        v.real(j["k"], path + ".k");
      }
    } else {
      v.fail(path + ".preset",
             "unknown preset '" + preset + "'; valid: eigenlevel, gaussian, boosted_gaussian");
    }
    return;
  }
  if (preset == "ket0" || preset == "ket1" || preset == "ket_plus" || preset == "ket_minus") {
    v.object(j, path, {"preset"});
  } else if (preset == "bloch") {
    if (v.object(j, path, {"preset", "theta", "phi"})) {
      v.real(j["theta"], path + ".theta");
      v.real(j["phi"], path + ".phi");
    }
  } else if (preset == "random") {
    if (v.object(j, path, {"preset", "index"})) v.integer(j["index"], path + ".index", 0);
  } else {
    v.fail(path + ".preset", "unknown preset '" + preset +
                                 "'; valid: ket0, ket1, ket_plus, ket_minus, bloch, random");
  }
}

void check_observable(Validator& v, const json& j, const std::string& path, Eigen::Index dim) {
  if (!j.is_object()) {
    v.fail(path, "must be an object");
    return;
  }
  if (j.contains("matrix")) {
    if (!v.object(j, path, {"matrix"})) return;
    const auto& m = j["matrix"];
    if (!m.is_array() || (dim >= 0 && static_cast<Eigen::Index>(m.size()) != dim)) {
      v.fail(path + ".matrix", "must be a square array matching the system dimension");
      return;
    }
    bool shape_ok = true;
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (!m[r].is_array() || m[r].size() != m.size()) {
        v.fail(path + ".matrix[" + std::to_string(r) + "]", "must hold one [re, im] per column");
        shape_ok = false;
        continue;
      }
      for (std::size_t c = 0; c < m[r].size(); ++c)
        if (!v.complex_pair(m[r][c], path + ".matrix[" + std::to_string(r) + "][" +
                                         std::to_string(c) + "]"))
          shape_ok = false;
    }
    if (shape_ok) {
      double residue = 0.0;
      for (std::size_t r = 0; r < m.size(); ++r)
        for (std::size_t c = 0; c < m.size(); ++c) {
          const double dre = m[r][c][0].get<double>() - m[c][r][0].get<double>();
          const double dim_ = m[r][c][1].get<double>() + m[c][r][1].get<double>();
          residue = std::max(residue, std::hypot(dre, dim_));
        }
      if (residue > 1e-12) v.fail(path + ".matrix", "must be hermitian (residue above 1e-12)");
    }
    return;
  }
  if (!j.contains("preset")) {
    v.fail(path, "needs either a preset or an explicit matrix");
    return;
  }
  if (!v.text(j["preset"], path + ".preset")) return;
  const auto preset = j["preset"].get<std::string>();
  if (preset == "p0" || preset == "p1") {
    v.object(j, path, {"preset"});
  } else if (preset == "sigma") {
    if (v.object(j, path, {"preset", "axis"})) v.axis3(j["axis"], path + ".axis");
  } else if (preset == "random_hermitian") {
    if (v.object(j, path, {"preset", "index"})) v.integer(j["index"], path + ".index", 0);
  } else {
    v.fail(path + ".preset",
           "unknown preset '" + preset + "'; valid: p0, p1, sigma, random_hermitian");
  }
}

void check_zeno_segments(Validator& v, const json& root, std::int64_t n, const std::string& npath) {
  // dt must tile each inter-projection segment so Zeno and gap runs share a
  // step grid
  if (!root.contains("coupling") || !root["coupling"].is_object()) return;
  const auto& c = root["coupling"];
  if (!c.contains("tau") || !c["tau"].is_number() || !c.contains("dt") || !c["dt"].is_number())
    return;
  const double tau = c["tau"].get<double>();
  const double dt = c["dt"].get<double>();
  if (tau <= 0.0 || dt <= 0.0) return;
  const double per = tau / static_cast<double>(n) / dt;
  if (std::abs(per - std::llround(per)) > 1e-9 * std::max(per, 1.0))
    v.fail("coupling.dt", "must divide tau/n_projections for " + npath + " = " +
                              std::to_string(n) + "; choose dt = tau/(" + std::to_string(n) +
                              "*k)");
}

void check_protection(Validator& v, const json& j, const std::string& path, const json& root,
                      bool grid, Eigen::Index dim,
                      std::initializer_list<const char*> schemes) {
  if (!j.is_object()) {
    v.fail(path, "must be an object");
    return;
  }
  if (!j.contains("scheme")) {
    v.fail(path + ".scheme", "required key is missing");
    return;
  }
  if (!v.one_of(j["scheme"], path + ".scheme", schemes)) return;
  const auto scheme = j["scheme"].get<std::string>();
  if (scheme == "none") {
    v.object(j, path, {"scheme"});
  } else if (scheme == "magnetic") {
    if (!v.object(j, path, {"scheme", "axis", "omega"})) return;
    v.positive_real(j["omega"], path + ".omega");
    if (j["axis"].is_string()) {
      if (j["axis"] != "state")
        v.fail(path + ".axis", "string form must be 'state' (align with the prepared state)");
    } else {
      v.axis3(j["axis"], path + ".axis");
    }
  } else if (scheme == "zeno") {
    if (root.contains("sweep")) {
      if (!v.object(j, path, {"scheme", "chi"})) return;
    } else {
      if (!v.object(j, path, {"scheme", "chi", "n_projections"})) return;
      if (v.integer(j["n_projections"], path + ".n_projections", 1))
        check_zeno_segments(v, root, j["n_projections"].get<std::int64_t>(),
                            path + ".n_projections");
    }
    if (j["chi"].is_string()) {
      if (j["chi"] != "self")
        v.fail(path + ".chi", "string form must be 'self' (protect the prepared state)");
    } else {
      check_state(v, j["chi"], path + ".chi", grid, dim);
    }
  } else if (scheme == "energy_gap") {
    if (!v.object(j, path, {"scheme", "level"})) return;
    if (v.integer(j["level"], path + ".level", 0) && dim >= 0 &&
        j["level"].get<Eigen::Index>() >= dim)
      v.fail(path + ".level", "must be below the system dimension");
  }
}

void check_output(Validator& v, const json& j, const std::string& path) {
  if (!v.object(j, path, {}, {"path", "format"})) return;
  if (j.contains("path")) v.text(j["path"], path + ".path");
  if (j.contains("format")) v.one_of(j["format"], path + ".format", {"json", "csv"});
}

void check_composite_budget(Validator& v, const json& root) {
  const Eigen::Index sys = system_dim(root);
  if (sys < 0 || !root.contains("pointer") || !root["pointer"].is_object()) return;
  const auto& p = root["pointer"];
  if (!p.contains("cells") || !p["cells"].is_number_integer()) return;
  const Eigen::Index total = sys * p["cells"].get<Eigen::Index>();
  if (total > kMaxCompositeDim)
    v.fail("pointer.cells", "system x pointer dimension " + std::to_string(total) +
                                " exceeds the composite cap " + std::to_string(kMaxCompositeDim));
}

void validate_protective(Validator& v, const json& j) {
  if (!v.object(j, "config", {"command", "system", "coupling", "pointer", "cases"},
                {"seed", "output"}))
    return;
  check_system(v, j["system"], "system", false);
  check_coupling(v, j["coupling"], "coupling");
  check_pointer(v, j["pointer"], "pointer");
  check_composite_budget(v, j);
  const Eigen::Index dim = system_dim(j);
  if (!j["cases"].is_array() || j["cases"].empty()) {
    v.fail("cases", "must be a nonempty array");
    return;
  }
  for (std::size_t i = 0; i < j["cases"].size(); ++i) {
    const std::string path = "cases[" + std::to_string(i) + "]";
    const auto& c = j["cases"][i];
    if (!v.object(c, path, {"label", "state", "observable", "protection"})) continue;
    v.text(c["label"], path + ".label");
    check_state(v, c["state"], path + ".state", false, dim);
    check_observable(v, c["observable"], path + ".observable", dim);
    check_protection(v, c["protection"], path + ".protection", j, false, dim,
                     {"none", "magnetic", "zeno"});
  }
}

void validate_realistic_sweep(Validator& v, const json& j) {
  if (!v.object(j, "config",
                {"command", "system", "coupling", "pointer", "states", "observable", "protection",
                 "sweep", "runs"},
                {"seed", "output"}))
    return;
  check_system(v, j["system"], "system", false);
  check_coupling(v, j["coupling"], "coupling");
  check_pointer(v, j["pointer"], "pointer");
  check_composite_budget(v, j);
  const Eigen::Index dim = system_dim(j);
  if (!j["states"].is_array() || j["states"].empty()) {
    v.fail("states", "must be a nonempty array");
  } else {
    for (std::size_t i = 0; i < j["states"].size(); ++i)
      check_state(v, j["states"][i], "states[" + std::to_string(i) + "]", false, dim);
  }
  check_observable(v, j["observable"], "observable", dim);
  check_protection(v, j["protection"], "protection", j, false, dim, {"zeno"});
  v.integer(j["runs"], "runs", 1);
  if (v.object(j["sweep"], "sweep", {"parameter", "values"})) {
    v.one_of(j["sweep"]["parameter"], "sweep.parameter", {"n_projections"});
    const auto& vals = j["sweep"]["values"];
    if (!vals.is_array() || vals.empty()) {
      v.fail("sweep.values", "must be a nonempty array of integers");
    } else {
      for (std::size_t i = 0; i < vals.size(); ++i) {
        const std::string path = "sweep.values[" + std::to_string(i) + "]";
        if (v.integer(vals[i], path, 1))
          check_zeno_segments(v, j, vals[i].get<std::int64_t>(), path);
      }
    }
  }
}

void validate_reconstruct(Validator& v, const json& j) {
  if (!v.object(j, "config",
                {"command", "system", "regions", "coupling", "pointer", "protection", "cases"},
                {"seed", "output"}))
    return;
  check_system(v, j["system"], "system", true);
  check_coupling(v, j["coupling"], "coupling");
  check_pointer(v, j["pointer"], "pointer");
  check_composite_budget(v, j);
  const Eigen::Index dim = system_dim(j);
  if (v.integer(j["regions"], "regions", 2) && dim >= 0 &&
      dim % j["regions"].get<Eigen::Index>() != 0)
    v.fail("regions", "must divide the cell count " + std::to_string(dim));
  check_protection(v, j["protection"], "protection", j, true, dim, {"energy_gap"});
  if (!j["cases"].is_array() || j["cases"].empty()) {
    v.fail("cases", "must be a nonempty array");
    return;
  }
  for (std::size_t i = 0; i < j["cases"].size(); ++i) {
    const std::string path = "cases[" + std::to_string(i) + "]";
    const auto& c = j["cases"][i];
    if (!v.object(c, path, {"label", "state", "mode"})) continue;
    v.text(c["label"], path + ".label");
    check_state(v, c["state"], path + ".state", true, dim);
    v.one_of(c["mode"], path + ".mode", {"exact", "protective"});
  }
}

void validate_ont_check(Validator& v, const json& j) {
  if (!v.object(j, "config", {"command", "model"}, {"seed", "output", "tolerance"})) return;
  if (v.object(j["model"], "model", {"kind", "resolution"})) {
    v.one_of(j["model"]["kind"], "model.kind", {"ks"});
    v.integer(j["model"]["resolution"], "model.resolution", 100);
  }
  if (j.contains("tolerance")) v.positive_real(j["tolerance"], "tolerance");
}

}  // namespace

std::vector<std::string> validate_config(const nlohmann::json& j) {
  Validator v;
  if (!j.is_object()) {
    v.fail("config", "must be a JSON object");
    return v.violations;
  }
  if (!j.contains("command") || !j["command"].is_string()) {
    v.fail("command", "required; one of: protective, realistic-sweep, reconstruct, ont-check");
    return v.violations;
  }
  if (j.contains("seed") && !j["seed"].is_number_unsigned())
    v.fail("seed", "must be a nonnegative integer");
  if (j.contains("output")) check_output(v, j["output"], "output");

  const auto command = j["command"].get<std::string>();
  if (command == "protective") {
    validate_protective(v, j);
  } else if (command == "realistic-sweep") {
    validate_realistic_sweep(v, j);
  } else if (command == "reconstruct") {
    validate_reconstruct(v, j);
  } else if (command == "ont-check") {
    validate_ont_check(v, j);
  } else {
    v.fail("command", "unknown command '" + command +
                          "'; valid: protective, realistic-sweep, reconstruct, ont-check");
  }
  return v.violations;
}

ExperimentConfig parse_config(const nlohmann::json& j) {
  auto violations = validate_config(j);
  if (!violations.empty()) {
    std::string msg = "invalid config";
    for (const auto& s : violations) msg += "\n  - " + s;
    ConfigError err(msg);
    err.violations = std::move(violations);
    throw err;
  }
  ExperimentConfig cfg{j};
  auto& d = cfg.data;
  if (!d.contains("seed")) d["seed"] = 0;
  if (!d.contains("output")) d["output"] = nlohmann::json::object();
  if (!d["output"].contains("path")) d["output"]["path"] = "";
  if (!d["output"].contains("format")) d["output"]["format"] = "json";
  if (d.contains("coupling") && !d["coupling"].contains("shape")) d["coupling"]["shape"] = "sin2";
  if (d.contains("system") && d["system"]["kind"] == "grid1d" &&
      !d["system"].contains("potential"))
    d["system"]["potential"] = "harmonic";
  if (d.contains("pointer") && !d["pointer"].contains("center")) d["pointer"]["center"] = 0.0;
  if (d["command"] == "ont-check" && !d.contains("tolerance")) d["tolerance"] = 1e-6;
  return cfg;
}

ExperimentConfig parse_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("cannot read config file: " + path);
  return parse_config_text(buf.str());
}

}  // namespace pmsim
