#include "twostep/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"

namespace twostep {

using json = nlohmann::json;

namespace {

struct ModeName {
  ControllerMode mode;
  std::string_view name;
};

constexpr ModeName kModeNames[] = {
    {ControllerMode::kKPlusRl, "K+RL"},     {ControllerMode::kK0PlusRl, "K0+RL"},
    {ControllerMode::kRlAlone, "RL-alone"}, {ControllerMode::kKAlone, "K-alone"},
    {ControllerMode::kK0Alone, "K0-alone"},
};

void reject_unknown(const json& obj, std::string_view section,
                    std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string(section) + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(std::string(section) + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, std::string_view section) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(section) + "." + key + ": " + e.what());
  }
}

Vec to_vec(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(where + ": expected numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Mat to_mat(const json& j, const std::string& where) {
  // Accept a bare number for 1 x 1 matrices.
  if (j.is_number()) return Mat::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a matrix (array of rows)");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  Mat m;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vec row = to_vec(j[r], where);
    if (cols < 0) {
      cols = row.size();
      m.resize(rows, cols);
    } else if (row.size() != cols) {
      throw ConfigError(where + ": ragged matrix rows");
    }
    m.row(r) = row.transpose();
  }
  return m;
}

json from_vec(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json from_mat(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(from_vec(m.row(r).transpose()));
  return rows;
}

void read_vec(const json& obj, const char* key, Vec& out, std::string_view section) {
  if (obj.contains(key)) out = to_vec(obj.at(key), std::string(section) + "." + key);
}

void read_mat(const json& obj, const char* key, Mat& out, std::string_view section) {
  if (obj.contains(key)) out = to_mat(obj.at(key), std::string(section) + "." + key);
}

std::string_view quadrature_name(Quadrature q) {
  return q == Quadrature::kAugmentedRk4 ? "augmented_rk4" : "trapezoid";
}

Quadrature parse_quadrature(const std::string& s) {
  if (s == "augmented_rk4") return Quadrature::kAugmentedRk4;
  if (s == "trapezoid") return Quadrature::kTrapezoid;
  throw ConfigError("step1.quadrature: expected 'augmented_rk4' or 'trapezoid', got '" + s + "'");
}

std::string_view critic_trace_name(CriticTrace t) {
  return t == CriticTrace::kPreviousState ? "previous" : "current";
}

CriticTrace parse_critic_trace(const std::string& s) {
  if (s == "previous") return CriticTrace::kPreviousState;
  if (s == "current") return CriticTrace::kCurrentState;
  throw ConfigError("step2.critic_trace: expected 'previous' or 'current', got '" + s + "'");
}

std::string_view actor_gradient_name(ActorGradient g) {
  return g == ActorGradient::kVarianceScaled ? "variance_scaled" : "score";
}

ActorGradient parse_actor_gradient(const std::string& s) {
  if (s == "variance_scaled") return ActorGradient::kVarianceScaled;
  if (s == "score") return ActorGradient::kScore;
  throw ConfigError("step2.actor_gradient: expected 'variance_scaled' or 'score', got '" + s +
                    "'");
}

}  // namespace

std::string_view to_string(ControllerMode mode) {
  for (const auto& entry : kModeNames) {
    if (entry.mode == mode) return entry.name;
  }
  return "?";
}

ControllerMode parse_mode(std::string_view name) {
  for (const auto& entry : kModeNames) {
    if (entry.name == name) return entry.mode;
  }
  throw ConfigError("unknown controller mode '" + std::string(name) +
                    "' (expected K+RL, K0+RL, RL-alone, K-alone or K0-alone)");
}

bool uses_rl(ControllerMode mode) {
  return mode == ControllerMode::kKPlusRl || mode == ControllerMode::kK0PlusRl ||
         mode == ControllerMode::kRlAlone;
}

std::string_view to_string(PlantPreset preset) {
  return preset == PlantPreset::kPendulum ? "pendulum" : "linear";
}

PlantPreset parse_plant(std::string_view name) {
  if (name == "pendulum") return PlantPreset::kPendulum;
  if (name == "linear") return PlantPreset::kLinear;
  throw ConfigError("unknown plant preset '" + std::string(name) +
                    "' (expected pendulum or linear)");
}

int BasisConfig::size() const {
  int n = 1;
  for (int k : points) n *= k;
  return n;
}

BasisGrid BasisConfig::build() const { return BasisGrid(lower, upper, points, widths); }

void ExperimentConfig::validate() const {
  pendulum.validate();
  const int n = 2;
  const int m = 1;
  step1.weights.validate();
  if (step1.weights.q.rows() != n || step1.weights.r.rows() != m) {
    throw ConfigError("step1: Q must be 2 x 2 and R 1 x 1 for the pendulum presets");
  }
  if (step1.k0.rows() != m || step1.k0.cols() != n) throw ConfigError("step1.K0 must be 1 x 2");
  if (step1.collection.l < min_windows(n, m)) {
    throw ConfigError("step1.l = " + std::to_string(step1.collection.l) +
                      " is below n(n+1)/2 + mn = " + std::to_string(min_windows(n, m)));
  }
  if (!(step1.collection.t_dc > 0.0)) throw ConfigError("step1.T_dc must be > 0");
  if (!(step1.collection.dt_sample > 0.0) ||
      step1.collection.dt_sample > step1.collection.t_dc) {
    throw ConfigError("step1.dt_sample must lie in (0, T_dc]");
  }
  if (step1.collection.x0.size() != 0 && step1.collection.x0.size() != n) {
    throw ConfigError("step1.x0 must have 2 entries");
  }
  if (!(step1.eps > 0.0)) throw ConfigError("step1.eps must be > 0");
  if (step1.max_iter < 1) throw ConfigError("step1.max_iter must be >= 1");

  step2.validate();
  if (step2.x0.size() != n) throw ConfigError("step2.x0 must have 2 entries");
  if (basis.lower.size() != n || basis.upper.size() != n ||
      static_cast<int>(basis.points.size()) != n) {
    throw ConfigError("basis: lower, upper and points need one entry per state (2)");
  }
  if (basis.widths.size() != 0 && basis.widths.size() != n) {
    throw ConfigError("basis.widths must be empty or have 2 entries");
  }
  for (int k : basis.points) {
    if (k < 1) throw ConfigError("basis.points entries must be >= 1");
  }

  if (sweep.n_sim < 1) throw ConfigError("sweep.n_sim must be >= 1");
  if (sweep.betas.empty() || sweep.sigma2s.empty() || sweep.modes.empty()) {
    throw ConfigError("sweep: betas, sigma2s and modes must be non-empty");
  }
  for (double b : sweep.betas) {
    if (!(b > 0.0 && b < 1.0)) throw ConfigError("sweep.betas entries must lie in (0, 1)");
  }
  for (double s : sweep.sigma2s) {
    if (!(s > 0.0)) throw ConfigError("sweep.sigma2s entries must be > 0");
  }
  for (ControllerMode mode : sweep.modes) {
    if (!uses_rl(mode)) {
      throw ConfigError("sweep.modes may only contain K+RL, K0+RL or RL-alone");
    }
  }
  if (sweep.threads < 0) throw ConfigError("sweep.threads must be >= 0");
}

ExperimentConfig parse_config_text(std::string_view text) {
  ExperimentConfig cfg;
  if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) {
    cfg.validate();
    return cfg;
  }

  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  reject_unknown(root, "config",
                 {"plant", "pendulum", "mode", "seed", "output_dir", "step1", "step2", "basis",
                  "sweep"});

  std::string name;
  if (root.contains("plant")) {
    read(root, "plant", name, "config");
    cfg.plant = parse_plant(name);
  }
  if (root.contains("mode")) {
    read(root, "mode", name, "config");
    cfg.mode = parse_mode(name);
  }
  read(root, "seed", cfg.seed, "config");
  if (root.contains("output_dir")) {
    read(root, "output_dir", name, "config");
    cfg.output_dir = name;
  }

  if (root.contains("pendulum")) {
    const json& p = root.at("pendulum");
    reject_unknown(p, "pendulum", {"length", "mass", "gravity", "friction"});
    read(p, "length", cfg.pendulum.length, "pendulum");
    read(p, "mass", cfg.pendulum.mass, "pendulum");
    read(p, "gravity", cfg.pendulum.gravity, "pendulum");
    read(p, "friction", cfg.pendulum.friction, "pendulum");
  }

  if (root.contains("step1")) {
    const json& s = root.at("step1");
    reject_unknown(s, "step1",
                   {"Q", "R", "K0", "l", "T_dc", "dt_sample", "eps", "max_iter", "x0",
                    "quadrature"});
    read_mat(s, "Q", cfg.step1.weights.q, "step1");
    read_mat(s, "R", cfg.step1.weights.r, "step1");
    read_mat(s, "K0", cfg.step1.k0, "step1");
    read(s, "l", cfg.step1.collection.l, "step1");
    read(s, "T_dc", cfg.step1.collection.t_dc, "step1");
    read(s, "dt_sample", cfg.step1.collection.dt_sample, "step1");
    read(s, "eps", cfg.step1.eps, "step1");
    read(s, "max_iter", cfg.step1.max_iter, "step1");
    read_vec(s, "x0", cfg.step1.collection.x0, "step1");
    if (s.contains("quadrature")) {
      read(s, "quadrature", name, "step1");
      cfg.step1.collection.quadrature = parse_quadrature(name);
    }
  }

  int n_features = -1;
  if (root.contains("step2")) {
    const json& s = root.at("step2");
    reject_unknown(s, "step2",
                   {"Ts", "T_epi", "x0", "gamma", "lambda_theta", "lambda_w", "alpha", "beta",
                    "sigma2", "N", "N_epi", "penalty_angle", "penalty_reward", "critic_trace",
                    "actor_gradient"});
    auto& p = cfg.step2;
    read(s, "Ts", p.ts, "step2");
    read(s, "T_epi", p.t_epi, "step2");
    read_vec(s, "x0", p.x0, "step2");
    read(s, "gamma", p.gamma, "step2");
    read(s, "lambda_theta", p.lambda_theta, "step2");
    read(s, "lambda_w", p.lambda_w, "step2");
    read(s, "alpha", p.alpha, "step2");
    read(s, "beta", p.beta, "step2");
    read(s, "sigma2", p.sigma2, "step2");
    read(s, "N", n_features, "step2");
    read(s, "N_epi", p.n_episodes, "step2");
    read(s, "penalty_angle", p.penalty_angle, "step2");
    read(s, "penalty_reward", p.penalty_reward, "step2");
    if (s.contains("critic_trace")) {
      read(s, "critic_trace", name, "step2");
      p.critic_trace = parse_critic_trace(name);
    }
    if (s.contains("actor_gradient")) {
      read(s, "actor_gradient", name, "step2");
      p.actor_gradient = parse_actor_gradient(name);
    }
  }

  if (root.contains("basis")) {
    const json& b = root.at("basis");
    reject_unknown(b, "basis", {"lower", "upper", "points", "widths"});
    read_vec(b, "lower", cfg.basis.lower, "basis");
    read_vec(b, "upper", cfg.basis.upper, "basis");
    read(b, "points", cfg.basis.points, "basis");
    read_vec(b, "widths", cfg.basis.widths, "basis");
  }

  if (root.contains("sweep")) {
    const json& s = root.at("sweep");
    reject_unknown(s, "sweep", {"betas", "sigma2s", "n_sim", "modes", "threads"});
    read(s, "betas", cfg.sweep.betas, "sweep");
    read(s, "sigma2s", cfg.sweep.sigma2s, "sweep");
    read(s, "n_sim", cfg.sweep.n_sim, "sweep");
    read(s, "threads", cfg.sweep.threads, "sweep");
    if (s.contains("modes")) {
      std::vector<std::string> names;
      read(s, "modes", names, "sweep");
      cfg.sweep.modes.clear();
      for (const auto& m : names) cfg.sweep.modes.push_back(parse_mode(m));
    }
  }

  // Step 2 rewards reuse the Step 1 weights.
  cfg.step2.weights = cfg.step1.weights;
  if (n_features >= 0 && n_features != cfg.basis.size()) {
    throw ConfigError("step2.N = " + std::to_string(n_features) +
                      " does not match the basis grid size " + std::to_string(cfg.basis.size()));
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  json root;
  root["plant"] = std::string(to_string(cfg.plant));
  root["mode"] = std::string(to_string(cfg.mode));
  root["seed"] = cfg.seed;
  root["output_dir"] = cfg.output_dir.string();
  root["pendulum"] = {{"length", cfg.pendulum.length},
                      {"mass", cfg.pendulum.mass},
                      {"gravity", cfg.pendulum.gravity},
                      {"friction", cfg.pendulum.friction}};
  const auto& c = cfg.step1.collection;
  root["step1"] = {{"Q", from_mat(cfg.step1.weights.q)},
                   {"R", from_mat(cfg.step1.weights.r)},
                   {"K0", from_mat(cfg.step1.k0)},
                   {"l", c.l},
                   {"T_dc", c.t_dc},
                   {"dt_sample", c.dt_sample},
                   {"eps", cfg.step1.eps},
                   {"max_iter", cfg.step1.max_iter},
                   {"x0", c.x0.size() == 0 ? from_vec(Vec::Zero(2)) : from_vec(c.x0)},
                   {"quadrature", std::string(quadrature_name(c.quadrature))}};
  const auto& p = cfg.step2;
  root["step2"] = {{"Ts", p.ts},
                   {"T_epi", p.t_epi},
                   {"x0", from_vec(p.x0)},
                   {"gamma", p.gamma},
                   {"lambda_theta", p.lambda_theta},
                   {"lambda_w", p.lambda_w},
                   {"alpha", p.alpha},
                   {"beta", p.beta},
                   {"sigma2", p.sigma2},
                   {"N", cfg.basis.size()},
                   {"N_epi", p.n_episodes},
                   {"penalty_angle", p.penalty_angle},
                   {"penalty_reward", p.penalty_reward},
                   {"critic_trace", std::string(critic_trace_name(p.critic_trace))},
                   {"actor_gradient", std::string(actor_gradient_name(p.actor_gradient))}};
  root["basis"] = {{"lower", from_vec(cfg.basis.lower)},
                   {"upper", from_vec(cfg.basis.upper)},
                   {"points", cfg.basis.points}};
  if (cfg.basis.widths.size() != 0) root["basis"]["widths"] = from_vec(cfg.basis.widths);
  json modes = json::array();
  for (ControllerMode m : cfg.sweep.modes) modes.push_back(std::string(to_string(m)));
  root["sweep"] = {{"betas", cfg.sweep.betas},
                   {"sigma2s", cfg.sweep.sigma2s},
                   {"n_sim", cfg.sweep.n_sim},
                   {"modes", modes},
                   {"threads", cfg.sweep.threads}};
  return root.dump(2) + "\n";
}

}  // namespace twostep
