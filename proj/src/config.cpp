#include "spde/config.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

namespace spde {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError(path + ": " + message);
}

void rejectUnknownKeys(const json& node, const std::string& path,
                       const std::set<std::string>& allowed) {
  if (!node.is_object()) fail(path, "expected an object");
  for (auto it = node.begin(); it != node.end(); ++it) {
    if (!allowed.count(it.key()))
      fail(path + "." + it.key(), "unknown key");
  }
}

template <typename T>
T readScalar(const json& node, const std::string& path, const char* key,
             T fallback) {
  if (!node.contains(key)) return fallback;
  try {
    return node.at(key).get<T>();
  } catch (const json::exception&) {
    fail(path + "." + key, "wrong type");
  }
}

template <typename T>
std::vector<T> readArray(const json& node, const std::string& path,
                         const char* key, std::vector<T> fallback) {
  if (!node.contains(key)) return fallback;
  try {
    return node.at(key).get<std::vector<T>>();
  } catch (const json::exception&) {
    fail(path + "." + key, "expected an array");
  }
}

void validate(const RunConfig& cfg) {
  const auto& p = cfg.problem;
  if (!(p.domain_b > p.domain_a))
    fail("problem.domain", "requires b > a");
  if (!(p.horizon > 0.0)) fail("problem.T", "must be positive");
  static const std::set<std::string> coeff_presets = {"constant", "time-sine",
                                                      "space-time-sine"};
  if (!coeff_presets.count(p.coefficients_preset))
    fail("problem.coefficients.preset",
         "unknown preset (constant | time-sine | space-time-sine)");
  if (!(p.q0 > 0.0)) fail("problem.coefficients.q0", "must be positive");
  if (p.ellipticity_floor < 0.0)
    fail("problem.coefficients.ellipticity_floor", "must be >= 0");
  static const std::set<std::string> x0_presets = {"zero", "sine", "sine-mix"};
  if (!x0_presets.count(p.x0_preset))
    fail("problem.x0.preset", "unknown preset (zero | sine | sine-mix)");
  static const std::set<std::string> f_presets = {"zero", "bounded", "linear"};
  if (!f_presets.count(p.nonlinearity_preset))
    fail("problem.nonlinearity.preset",
         "unknown preset (zero | bounded | linear)");

  const auto& n = cfg.noise;
  if (!(n.hurst > 0.5) || !(n.hurst < 1.0)) {
    std::ostringstream msg;
    msg << "must lie in the open interval (1/2, 1), got " << n.hurst;
    fail("noise.H", msg.str());
  }
  if (n.n_modes < 0) fail("noise.n_modes", "must be >= 0");
  if (n.trace_scale < 0.0) fail("noise.trace_scale", "must be >= 0");
  static const std::set<std::string> amp_presets = {"constant", "cosine"};
  if (!amp_presets.count(n.amplitude_preset))
    fail("noise.amplitude.preset", "unknown preset (constant | cosine)");
  if (n.jump_lambda < 0.0) fail("noise.jump.lambda", "must be >= 0");
  if (n.jump_mark_sd < 0.0) fail("noise.jump.mark_sd", "must be >= 0");
  if (n.jump_profile_mode < 1) fail("noise.jump.profile_mode", "must be >= 1");

  const auto& d = cfg.discretization;
  if (d.scheme != "smti" && d.scheme != "implicit")
    fail("discretization.scheme", "must be 'smti' or 'implicit'");
  if (d.n_interior < 1) fail("discretization.n_interior", "must be >= 1");
  if (cfg.study.mode == "temporal") {
    if (d.m_list.empty()) fail("discretization.M", "must not be empty");
    for (int m : d.m_list) {
      if (m < 1) fail("discretization.M", "entries must be >= 1");
      if (m >= d.m_ref)
        fail("discretization.M_ref",
             "must be strictly finer than every study resolution");
      if (d.m_ref % m != 0) {
        std::ostringstream msg;
        msg << "must be divisible by every study resolution; " << d.m_ref
            << " is not divisible by " << m;
        fail("discretization.M_ref", msg.str());
      }
    }
  } else {
    if (d.n_list.empty()) fail("discretization.n_list", "must not be empty");
    for (int nn : d.n_list) {
      if (nn < 1) fail("discretization.n_list", "entries must be >= 1");
      if (nn >= d.n_ref)
        fail("discretization.n_ref",
             "must be strictly finer than every study mesh");
      if ((d.n_ref + 1) % (nn + 1) != 0) {
        std::ostringstream msg;
        msg << "meshes must be nested: " << d.n_ref + 1
            << " elements not a multiple of " << nn + 1;
        fail("discretization.n_ref", msg.str());
      }
    }
    if (d.m_time < 1) fail("discretization.M_time", "must be >= 1");
  }

  const auto& s = cfg.study;
  if (s.mode != "temporal" && s.mode != "spatial")
    fail("study.mode", "must be 'temporal' or 'spatial'");
  if (s.samples < 1) fail("study.samples", "must be >= 1");

  static const std::set<std::string> known_formats = {"csv", "json"};
  for (const std::string& f : cfg.output.formats) {
    if (!known_formats.count(f)) fail("output.formats", "unknown format " + f);
  }
  for (double t : cfg.output.times) {
    if (t < 0.0 || t > p.horizon)
      fail("output.times", "snapshot times must lie in [0, T]");
  }
}

}  // namespace

RunConfig parseConfig(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  rejectUnknownKeys(root, "config",
                    {"problem", "noise", "discretization", "study", "output"});
  RunConfig cfg;

  if (root.contains("problem")) {
    const json& p = root.at("problem");
    rejectUnknownKeys(p, "problem",
                      {"domain", "T", "coefficients", "x0", "nonlinearity"});
    if (p.contains("domain")) {
      const json& dom = p.at("domain");
      rejectUnknownKeys(dom, "problem.domain", {"a", "b"});
      cfg.problem.domain_a = readScalar(dom, "problem.domain", "a", 0.0);
      cfg.problem.domain_b = readScalar(dom, "problem.domain", "b", 1.0);
    }
    cfg.problem.horizon = readScalar(p, "problem", "T", cfg.problem.horizon);
    if (p.contains("coefficients")) {
      const json& c = p.at("coefficients");
      rejectUnknownKeys(c, "problem.coefficients",
                        {"preset", "q0", "advection", "ellipticity_floor"});
      cfg.problem.coefficients_preset = readScalar<std::string>(
          c, "problem.coefficients", "preset", cfg.problem.coefficients_preset);
      cfg.problem.q0 = readScalar(c, "problem.coefficients", "q0", cfg.problem.q0);
      cfg.problem.advection =
          readScalar(c, "problem.coefficients", "advection", cfg.problem.advection);
      cfg.problem.ellipticity_floor = readScalar(
          c, "problem.coefficients", "ellipticity_floor", cfg.problem.ellipticity_floor);
    }
    if (p.contains("x0")) {
      const json& x = p.at("x0");
      rejectUnknownKeys(x, "problem.x0", {"preset", "amplitude"});
      cfg.problem.x0_preset =
          readScalar<std::string>(x, "problem.x0", "preset", cfg.problem.x0_preset);
      cfg.problem.x0_amplitude =
          readScalar(x, "problem.x0", "amplitude", cfg.problem.x0_amplitude);
    }
    if (p.contains("nonlinearity")) {
      const json& f = p.at("nonlinearity");
      rejectUnknownKeys(f, "problem.nonlinearity", {"preset", "scale"});
      cfg.problem.nonlinearity_preset = readScalar<std::string>(
          f, "problem.nonlinearity", "preset", cfg.problem.nonlinearity_preset);
      cfg.problem.nonlinearity_scale = readScalar(
          f, "problem.nonlinearity", "scale", cfg.problem.nonlinearity_scale);
    }
  }

  if (root.contains("noise")) {
    const json& n = root.at("noise");
    rejectUnknownKeys(n, "noise",
                      {"H", "n_modes", "decay_exponent", "trace_scale",
                       "amplitude", "jump"});
    cfg.noise.hurst = readScalar(n, "noise", "H", cfg.noise.hurst);
    cfg.noise.n_modes = readScalar(n, "noise", "n_modes", cfg.noise.n_modes);
    cfg.noise.decay_exponent =
        readScalar(n, "noise", "decay_exponent", cfg.noise.decay_exponent);
    cfg.noise.trace_scale =
        readScalar(n, "noise", "trace_scale", cfg.noise.trace_scale);
    if (n.contains("amplitude")) {
      const json& a = n.at("amplitude");
      rejectUnknownKeys(a, "noise.amplitude", {"preset", "value"});
      cfg.noise.amplitude_preset = readScalar<std::string>(
          a, "noise.amplitude", "preset", cfg.noise.amplitude_preset);
      cfg.noise.amplitude_value =
          readScalar(a, "noise.amplitude", "value", cfg.noise.amplitude_value);
    }
    if (n.contains("jump")) {
      const json& jmp = n.at("jump");
      rejectUnknownKeys(jmp, "noise.jump",
                        {"lambda", "mark_mean", "mark_sd", "profile_mode"});
      cfg.noise.jump_lambda =
          readScalar(jmp, "noise.jump", "lambda", cfg.noise.jump_lambda);
      cfg.noise.jump_mark_mean =
          readScalar(jmp, "noise.jump", "mark_mean", cfg.noise.jump_mark_mean);
      cfg.noise.jump_mark_sd =
          readScalar(jmp, "noise.jump", "mark_sd", cfg.noise.jump_mark_sd);
      cfg.noise.jump_profile_mode = readScalar(jmp, "noise.jump", "profile_mode",
                                               cfg.noise.jump_profile_mode);
    }
  }

  if (root.contains("discretization")) {
    const json& d = root.at("discretization");
    rejectUnknownKeys(d, "discretization",
                      {"scheme", "n_interior", "M", "M_ref", "n_list", "n_ref",
                       "M_time"});
    cfg.discretization.scheme =
        readScalar<std::string>(d, "discretization", "scheme", cfg.discretization.scheme);
    cfg.discretization.n_interior =
        readScalar(d, "discretization", "n_interior", cfg.discretization.n_interior);
    cfg.discretization.m_list =
        readArray(d, "discretization", "M", cfg.discretization.m_list);
    cfg.discretization.m_ref =
        readScalar(d, "discretization", "M_ref", cfg.discretization.m_ref);
    cfg.discretization.n_list =
        readArray(d, "discretization", "n_list", cfg.discretization.n_list);
    cfg.discretization.n_ref =
        readScalar(d, "discretization", "n_ref", cfg.discretization.n_ref);
    cfg.discretization.m_time =
        readScalar(d, "discretization", "M_time", cfg.discretization.m_time);
  }

  if (root.contains("study")) {
    const json& s = root.at("study");
    rejectUnknownKeys(s, "study", {"mode", "samples", "seed"});
    cfg.study.mode = readScalar<std::string>(s, "study", "mode", cfg.study.mode);
    cfg.study.samples = readScalar(s, "study", "samples", cfg.study.samples);
    cfg.study.seed = readScalar(s, "study", "seed", cfg.study.seed);
  }

  if (root.contains("output")) {
    const json& o = root.at("output");
    rejectUnknownKeys(o, "output", {"dir", "formats", "times"});
    cfg.output.dir = readScalar<std::string>(o, "output", "dir", cfg.output.dir);
    cfg.output.formats = readArray(o, "output", "formats", cfg.output.formats);
    cfg.output.times = readArray(o, "output", "times", cfg.output.times);
  }

  validate(cfg);
  return cfg;
}

std::string resolvedConfigJson(const RunConfig& cfg) {
  ordered_json j;
  j["problem"]["domain"]["a"] = cfg.problem.domain_a;
  j["problem"]["domain"]["b"] = cfg.problem.domain_b;
  j["problem"]["T"] = cfg.problem.horizon;
  j["problem"]["coefficients"]["preset"] = cfg.problem.coefficients_preset;
  j["problem"]["coefficients"]["q0"] = cfg.problem.q0;
  j["problem"]["coefficients"]["advection"] = cfg.problem.advection;
  j["problem"]["coefficients"]["ellipticity_floor"] = cfg.problem.ellipticity_floor;
  j["problem"]["x0"]["preset"] = cfg.problem.x0_preset;
  j["problem"]["x0"]["amplitude"] = cfg.problem.x0_amplitude;
  j["problem"]["nonlinearity"]["preset"] = cfg.problem.nonlinearity_preset;
  j["problem"]["nonlinearity"]["scale"] = cfg.problem.nonlinearity_scale;
  j["noise"]["H"] = cfg.noise.hurst;
  j["noise"]["n_modes"] = cfg.noise.n_modes;
  j["noise"]["decay_exponent"] = cfg.noise.decay_exponent;
  j["noise"]["trace_scale"] = cfg.noise.trace_scale;
  j["noise"]["amplitude"]["preset"] = cfg.noise.amplitude_preset;
  j["noise"]["amplitude"]["value"] = cfg.noise.amplitude_value;
  j["noise"]["jump"]["lambda"] = cfg.noise.jump_lambda;
  j["noise"]["jump"]["mark_mean"] = cfg.noise.jump_mark_mean;
  j["noise"]["jump"]["mark_sd"] = cfg.noise.jump_mark_sd;
  j["noise"]["jump"]["profile_mode"] = cfg.noise.jump_profile_mode;
  j["discretization"]["scheme"] = cfg.discretization.scheme;
  j["discretization"]["n_interior"] = cfg.discretization.n_interior;
  j["discretization"]["M"] = cfg.discretization.m_list;
  j["discretization"]["M_ref"] = cfg.discretization.m_ref;
  j["discretization"]["n_list"] = cfg.discretization.n_list;
  j["discretization"]["n_ref"] = cfg.discretization.n_ref;
  j["discretization"]["M_time"] = cfg.discretization.m_time;
  j["study"]["mode"] = cfg.study.mode;
  j["study"]["samples"] = cfg.study.samples;
  j["study"]["seed"] = cfg.study.seed;
  j["output"]["dir"] = cfg.output.dir;
  j["output"]["formats"] = cfg.output.formats;
  j["output"]["times"] = cfg.output.times;
  return j.dump();
}

ModelSpec buildModel(const RunConfig& cfg) {
  ModelSpec model;
  const double T = cfg.problem.horizon;
  const double a = cfg.problem.domain_a;
  const double b = cfg.problem.domain_b;

  if (cfg.problem.coefficients_preset == "constant") {
    model.ops = constantCoefficients(cfg.problem.q0);
  } else if (cfg.problem.coefficients_preset == "time-sine") {
    model.ops = timeSineCoefficients(cfg.problem.q0, T);
  } else {
    model.ops = spaceTimeSineCoefficients(cfg.problem.q0, a, b, T);
  }
  if (cfg.problem.ellipticity_floor > 0.0)
    model.ops.ellipticity_floor = cfg.problem.ellipticity_floor;
  if (cfg.problem.advection != 0.0)
    model.ops = withConstantAdvection(model.ops, cfg.problem.advection);

  if (cfg.problem.nonlinearity_preset == "zero") {
    model.F = zeroNonlinearity();
  } else if (cfg.problem.nonlinearity_preset == "bounded") {
    model.F = boundedNonlinearity(cfg.problem.nonlinearity_scale, T);
  } else {
    model.F = linearNonlinearity(cfg.problem.nonlinearity_scale);
  }

  if (cfg.noise.amplitude_preset == "constant") {
    model.phi = constantSchedule(cfg.noise.amplitude_value);
  } else {
    model.phi = cosineSchedule(cfg.noise.amplitude_value, T);
  }

  model.fbm = powerLawSpectrum(cfg.noise.hurst, cfg.noise.n_modes,
                               cfg.noise.decay_exponent, cfg.noise.trace_scale);

  model.jump.intensity = cfg.noise.jump_lambda;
  model.jump.mark_mean = cfg.noise.jump_mark_mean;
  model.jump.mark_sd = cfg.noise.jump_mark_sd;
  if (cfg.noise.jump_lambda > 0.0) {
    const int mode = cfg.noise.jump_profile_mode;
    const double len = b - a;
    model.jump.profile = [mode, a, len](double x) {
      return std::sin(mode * std::numbers::pi * (x - a) / len);
    };
  }

  const double amp = cfg.problem.x0_amplitude;
  const double len = b - a;
  if (cfg.problem.x0_preset == "zero") {
    model.x0 = nullptr;
  } else if (cfg.problem.x0_preset == "sine") {
    model.x0 = [amp, a, len](double x) {
      return amp * std::sin(std::numbers::pi * (x - a) / len);
    };
  } else {
    model.x0 = [amp, a, len](double x) {
      const double y = std::numbers::pi * (x - a) / len;
      return amp * (std::sin(y) + 0.5 * std::sin(3.0 * y));
    };
  }

  model.horizon = T;
  return model;
}

Scheme schemeFromConfig(const RunConfig& cfg) {
  return cfg.discretization.scheme == "smti" ? Scheme::Smti : Scheme::Implicit;
}

StudyMode studyModeFromConfig(const RunConfig& cfg) {
  return cfg.study.mode == "temporal" ? StudyMode::Temporal : StudyMode::Spatial;
}

double effectiveBeta(const RunConfig& cfg) {
  if (cfg.noise.n_modes == 0 || cfg.noise.trace_scale == 0.0) return 1.0;
  const double beta = 0.5 * (cfg.noise.decay_exponent - 1.0);
  return std::min(1.0, std::max(0.05, beta));
}

double theoreticalRate(const RunConfig& cfg) {
  const double h = cfg.noise.hurst;
  const double beta = effectiveBeta(cfg);
  if (studyModeFromConfig(cfg) == StudyMode::Temporal)
    return 0.5 * (2.0 * h + beta - 1.0);
  return std::min(2.0 * h + beta - 1.0, 2.0);
}

}  // namespace spde
