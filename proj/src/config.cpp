#include "msde/config.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "msde/builtin_models.hpp"
#include "msde/errors.hpp"

namespace msde {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) {
    fail(path, "expected an object");
  }
}

void check_keys(const json& j, const std::string& prefix,
                const std::set<std::string>& allowed) {
  for (const auto& item : j.items()) {
    if (allowed.find(item.key()) == allowed.end()) {
      const std::string where =
          prefix.empty() ? item.key() : prefix + "." + item.key();
      fail(where, "unknown key");
    }
  }
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) {
    fail(path, "expected a number");
  }
  return j.get<double>();
}

long get_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) {
    fail(path, "expected an integer");
  }
  return j.get<long>();
}

std::uint64_t get_seed(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) {
    return j.get<std::uint64_t>();
  }
  if (j.is_number_integer() && j.get<long long>() >= 0) {
    return static_cast<std::uint64_t>(j.get<long long>());
  }
  fail(path, "expected a nonnegative integer");
}

std::vector<double> get_number_array(const json& j, const std::string& path) {
  if (!j.is_array()) {
    fail(path, "expected an array of numbers");
  }
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_number()) {
      fail(path, "expected an array of numbers");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<long> get_integer_array(const json& j, const std::string& path) {
  if (!j.is_array()) {
    fail(path, "expected an array of integers");
  }
  std::vector<long> out;
  out.reserve(j.size());
  for (const auto& e : j) {
    out.push_back(get_integer(e, path));
  }
  return out;
}

std::vector<int> get_level_array(const json& j, const std::string& path) {
  const auto raw = get_integer_array(j, path);
  if (raw.empty()) {
    fail(path, "must not be empty");
  }
  std::vector<int> out;
  out.reserve(raw.size());
  long prev = 0;
  for (long v : raw) {
    if (v < 1 || v <= prev) {
      fail(path, "must be strictly increasing positive integers");
    }
    prev = v;
    out.push_back(static_cast<int>(v));
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    throw ConfigError("config: not valid JSON");
  }
  expect_object(j, "config");
  check_keys(j, "",
             {"schema_version", "model", "grid", "truncation", "malliavin",
              "mc", "convergence", "outputs", "experiments"});

  ExperimentConfig cfg;

  if (!j.contains("schema_version")) {
    fail("schema_version", "required");
  }
  if (get_integer(j["schema_version"], "schema_version") != 1) {
    fail("schema_version", "unsupported value (expected 1)");
  }

  if (!j.contains("model")) {
    fail("model", "required");
  }
  {
    const json& jm = j["model"];
    expect_object(jm, "model");
    check_keys(jm, "model", {"name", "params"});
    if (!jm.contains("name") || !jm["name"].is_string()) {
      fail("model.name", "expected a string");
    }
    cfg.model.name = jm["name"].get<std::string>();
    const auto& names = builtin_model_names();
    if (std::find(names.begin(), names.end(), cfg.model.name) == names.end()) {
      std::string known;
      for (const auto& n : names) {
        if (!known.empty()) {
          known += ", ";
        }
        known += n;
      }
      fail("model.name",
           "unknown model '" + cfg.model.name + "' (known: " + known + ")");
    }
    std::set<std::string> allowed;
    if (cfg.model.name == "ou") {
      allowed = {"dim", "K", "sigma0", "k1", "xi", "x0"};
    } else {
      allowed = {"kappa", "a", "c", "x0"};
    }
    if (jm.contains("params")) {
      expect_object(jm["params"], "model.params");
      check_keys(jm["params"], "model.params", allowed);
      for (const auto& item : jm["params"].items()) {
        const std::string path = "model.params." + item.key();
        if (item.key() == "x0") {
          cfg.model.has_x0 = true;
          if (item.value().is_number()) {
            cfg.model.x0 = {item.value().get<double>()};
          } else {
            cfg.model.x0 = get_number_array(item.value(), path);
          }
          if (cfg.model.x0.empty()) {
            fail(path, "must not be empty");
          }
        } else {
          cfg.model.scalars[item.key()] = get_number(item.value(), path);
        }
      }
    }
  }

  if (j.contains("grid")) {
    const json& jg = j["grid"];
    expect_object(jg, "grid");
    check_keys(jg, "grid", {"horizon", "steps"});
    double horizon = 1.0;
    long steps = 500;
    if (jg.contains("horizon")) {
      horizon = get_number(jg["horizon"], "grid.horizon");
    }
    if (jg.contains("steps")) {
      steps = get_integer(jg["steps"], "grid.steps");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
      fail("grid.horizon", "must be a positive finite number");
    }
    if (steps < 1) {
      fail("grid.steps", "must be at least 1");
    }
    cfg.grid = TimeGrid(horizon, steps);
  }

  if (j.contains("truncation")) {
    const json& jt = j["truncation"];
    expect_object(jt, "truncation");
    check_keys(jt, "truncation",
               {"xi", "levels", "n_start", "n_max", "cert_samples"});
    if (jt.contains("xi")) {
      cfg.truncation.xi = get_number(jt["xi"], "truncation.xi");
      if (!(cfg.truncation.xi > 0.0)) {
        fail("truncation.xi", "must be positive");
      }
    }
    if (jt.contains("levels")) {
      cfg.truncation.levels = get_level_array(jt["levels"], "truncation.levels");
    }
    if (jt.contains("n_start")) {
      const long v = get_integer(jt["n_start"], "truncation.n_start");
      if (v < 1) {
        fail("truncation.n_start", "must be at least 1");
      }
      cfg.truncation.n_start = static_cast<int>(v);
    }
    if (jt.contains("n_max")) {
      const long v = get_integer(jt["n_max"], "truncation.n_max");
      if (v < cfg.truncation.n_start) {
        fail("truncation.n_max", "must be >= truncation.n_start");
      }
      cfg.truncation.n_max = static_cast<int>(v);
    }
    if (jt.contains("cert_samples")) {
      cfg.truncation.cert_samples =
          get_integer(jt["cert_samples"], "truncation.cert_samples");
      if (cfg.truncation.cert_samples < 8) {
        fail("truncation.cert_samples", "must be at least 8");
      }
    }
  }

  if (j.contains("malliavin")) {
    const json& jv = j["malliavin"];
    expect_object(jv, "malliavin");
    check_keys(jv, "malliavin",
               {"orders", "steps", "output_times", "eps", "direction"});
    if (jv.contains("orders")) {
      const auto raw = get_integer_array(jv["orders"], "malliavin.orders");
      if (raw.empty()) {
        fail("malliavin.orders", "must not be empty");
      }
      cfg.malliavin.orders.clear();
      long prev = 0;
      for (long v : raw) {
        if ((v != 1 && v != 2) || v <= prev) {
          fail("malliavin.orders",
               "must be a strictly increasing subset of [1, 2]");
        }
        prev = v;
        cfg.malliavin.orders.push_back(static_cast<int>(v));
      }
    }
    if (jv.contains("steps")) {
      cfg.malliavin.steps = get_integer(jv["steps"], "malliavin.steps");
      if (cfg.malliavin.steps < 1) {
        fail("malliavin.steps", "must be at least 1");
      }
    }
    if (jv.contains("output_times")) {
      cfg.malliavin.output_times =
          get_integer_array(jv["output_times"], "malliavin.output_times");
      long prev = -1;
      for (long v : cfg.malliavin.output_times) {
        if (v < 0 || v > cfg.malliavin.steps || v <= prev) {
          fail("malliavin.output_times",
               "must be strictly increasing indices within the field grid");
        }
        prev = v;
      }
    }
    if (jv.contains("eps")) {
      cfg.malliavin.eps = get_number(jv["eps"], "malliavin.eps");
      if (!(cfg.malliavin.eps > 0.0)) {
        fail("malliavin.eps", "must be positive");
      }
    }
    if (jv.contains("direction")) {
      cfg.malliavin.direction =
          get_number_array(jv["direction"], "malliavin.direction");
      if (cfg.malliavin.direction.empty()) {
        fail("malliavin.direction", "must not be empty");
      }
    }
  }

  if (j.contains("mc")) {
    const json& jm = j["mc"];
    expect_object(jm, "mc");
    check_keys(jm, "mc", {"samples", "seed0", "p", "hnorm_samples"});
    if (jm.contains("samples")) {
      cfg.mc.samples = get_integer(jm["samples"], "mc.samples");
      if (cfg.mc.samples < 2) {
        fail("mc.samples", "must be at least 2");
      }
    }
    if (jm.contains("seed0")) {
      cfg.mc.seed0 = get_seed(jm["seed0"], "mc.seed0");
    }
    if (jm.contains("p")) {
      cfg.mc.p = get_number_array(jm["p"], "mc.p");
      if (cfg.mc.p.empty()) {
        fail("mc.p", "must not be empty");
      }
      for (double v : cfg.mc.p) {
        if (!(v >= 2.0) || v != std::floor(v) ||
            static_cast<long>(v) % 2 != 0) {
          fail("mc.p", "entries must be even integers >= 2");
        }
      }
    }
    if (jm.contains("hnorm_samples")) {
      cfg.mc.hnorm_samples =
          get_integer(jm["hnorm_samples"], "mc.hnorm_samples");
      if (cfg.mc.hnorm_samples < 2) {
        fail("mc.hnorm_samples", "must be at least 2");
      }
    }
  }

  if (j.contains("convergence")) {
    const json& jc = j["convergence"];
    expect_object(jc, "convergence");
    check_keys(jc, "convergence", {"levels", "n_ref", "samples"});
    if (jc.contains("levels")) {
      cfg.convergence.levels =
          get_level_array(jc["levels"], "convergence.levels");
    }
    if (jc.contains("n_ref")) {
      const long v = get_integer(jc["n_ref"], "convergence.n_ref");
      if (v < 1) {
        fail("convergence.n_ref", "must be at least 1");
      }
      cfg.convergence.n_ref = static_cast<int>(v);
    }
    if (jc.contains("samples")) {
      cfg.convergence.samples =
          get_integer(jc["samples"], "convergence.samples");
      if (cfg.convergence.samples != 0 && cfg.convergence.samples < 2) {
        fail("convergence.samples", "must be 0 (inherit) or at least 2");
      }
    }
  }

  if (j.contains("outputs")) {
    const json& jo = j["outputs"];
    expect_object(jo, "outputs");
    check_keys(jo, "outputs", {"dir"});
    if (jo.contains("dir")) {
      if (!jo["dir"].is_string()) {
        fail("outputs.dir", "expected a string");
      }
      cfg.out_dir = jo["dir"].get<std::string>();
    }
  }

  if (j.contains("experiments")) {
    const json& je = j["experiments"];
    if (!je.is_array()) {
      fail("experiments", "expected an array of strings");
    }
    static const std::set<std::string> known = {
        "hypothesis", "cutoff_cert", "simulate", "malliavin",
        "oracles",    "moments",     "convergence"};
    cfg.experiments.clear();
    for (const auto& e : je) {
      if (!e.is_string()) {
        fail("experiments", "expected an array of strings");
      }
      const std::string name = e.get<std::string>();
      if (known.find(name) == known.end()) {
        fail("experiments", "unknown experiment '" + name + "'");
      }
      if (std::find(cfg.experiments.begin(), cfg.experiments.end(), name) !=
          cfg.experiments.end()) {
        fail("experiments", "duplicate entry '" + name + "'");
      }
      cfg.experiments.push_back(name);
    }
    if (cfg.experiments.empty()) {
      fail("experiments", "must not be empty");
    }
  }

  return cfg;
}

ModelSpec build_model(const ModelConfig& mc) {
  auto get = [&mc](const char* key, double dflt) {
    auto it = mc.scalars.find(key);
    return it == mc.scalars.end() ? dflt : it->second;
  };
  if (mc.name == "ou") {
    OuParams p;
    const double dim_raw = get("dim", 1.0);
    if (!(dim_raw >= 1.0) || dim_raw != std::floor(dim_raw)) {
      throw ConfigError("model.params.dim: must be a positive integer");
    }
    p.dim = static_cast<int>(dim_raw);
    p.K = get("K", p.K);
    p.sigma0 = get("sigma0", p.sigma0);
    p.k1 = get("k1", p.k1);
    p.xi = get("xi", p.xi);
    if (mc.has_x0) {
      p.x0 = mc.x0;
    } else if (p.dim != 1) {
      p.x0.assign(static_cast<std::size_t>(p.dim), 1.0);
    }
    return make_ou(p);
  }
  if (mc.name == "cubic") {
    CubicParams p;
    p.kappa = get("kappa", p.kappa);
    p.a = get("a", p.a);
    p.c = get("c", p.c);
    if (mc.has_x0) {
      if (mc.x0.size() != 1) {
        throw ConfigError("model.params.x0: cubic model is one-dimensional");
      }
      p.x0 = mc.x0[0];
    }
    return make_cubic(p);
  }
  if (mc.name == "coupled") {
    CoupledParams p;
    p.kappa = get("kappa", p.kappa);
    p.a = get("a", p.a);
    p.c = get("c", p.c);
    if (mc.has_x0) {
      if (mc.x0.size() != 2) {
        throw ConfigError("model.params.x0: coupled model needs 2 entries");
      }
      p.x0 = mc.x0;
    }
    return make_coupled(p);
  }
  throw ConfigError("unknown model: " + mc.name);
}

const std::vector<Preset>& bundled_presets() {
  static const std::vector<Preset> presets = {
      {"ou_smoke", "linear model, fast smoke run of every experiment",
       R"json({
  "schema_version": 1,
  "model": {"name": "ou", "params": {"K": 1.0, "sigma0": 1.0, "xi": 1.0}},
  "grid": {"horizon": 1.0, "steps": 1000},
  "truncation": {"levels": [1, 2, 4], "n_start": 1, "n_max": 64, "cert_samples": 2000},
  "malliavin": {"orders": [1, 2], "steps": 200, "eps": 0.0001},
  "mc": {"samples": 2000, "seed0": 1, "p": [2], "hnorm_samples": 32},
  "convergence": {"levels": [1, 2, 4], "n_ref": 8, "samples": 400},
  "experiments": ["hypothesis", "simulate", "malliavin", "oracles", "moments", "convergence"]
}
)json"},
      {"cubic_full",
       "cubic drift, full pipeline with certification and convergence",
       R"json({
  "schema_version": 1,
  "model": {"name": "cubic", "params": {"kappa": 0.5, "a": 0.5, "c": 0.25, "x0": 0.5}},
  "grid": {"horizon": 1.0, "steps": 500},
  "truncation": {"xi": 4.0, "levels": [1, 2, 3, 4, 5], "n_start": 1, "n_max": 4096, "cert_samples": 2000},
  "malliavin": {"orders": [1, 2], "steps": 250, "eps": 0.0001},
  "mc": {"samples": 2000, "seed0": 1, "p": [2], "hnorm_samples": 32},
  "convergence": {"levels": [1, 2, 4], "n_ref": 8, "samples": 500},
  "experiments": ["hypothesis", "cutoff_cert", "simulate", "malliavin", "oracles", "moments", "convergence"]
}
)json"},
      {"cutoff_cert", "cutoff certification sweep over six levels",
       R"json({
  "schema_version": 1,
  "model": {"name": "ou", "params": {"K": 1.0, "sigma0": 1.0}},
  "grid": {"horizon": 1.0, "steps": 100},
  "truncation": {"xi": 1.0, "levels": [1, 2, 3, 4, 5, 6], "cert_samples": 10000},
  "mc": {"samples": 100, "seed0": 7, "p": [2], "hnorm_samples": 8},
  "experiments": ["hypothesis", "cutoff_cert"]
}
)json"}};
  return presets;
}

ExperimentConfig load_config(const std::string& path_or_preset,
                             std::string* source_text) {
  std::string text;
  std::error_code ec;
  if (std::filesystem::is_regular_file(path_or_preset, ec)) {
    std::ifstream ifs(path_or_preset, std::ios::binary);
    if (!ifs) {
      throw ConfigError("cannot read config file: " + path_or_preset);
    }
    std::ostringstream ss;
    ss << ifs.rdbuf();
    text = ss.str();
  } else {
    const Preset* hit = nullptr;
    for (const auto& preset : bundled_presets()) {
      if (preset.name == path_or_preset) {
        hit = &preset;
        break;
      }
    }
    if (hit == nullptr) {
      std::string names;
      for (const auto& preset : bundled_presets()) {
        if (!names.empty()) {
          names += ", ";
        }
        names += preset.name;
      }
      throw ConfigError("config not found: '" + path_or_preset +
                        "' is neither a file nor a preset (presets: " + names +
                        ")");
    }
    text = hit->text;
  }
  if (source_text != nullptr) {
    *source_text = text;
  }
  return parse_config(text);
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_hash_hex(const std::string& text) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, fnv1a64(text));
  return std::string(buf);
}

}  // namespace msde
