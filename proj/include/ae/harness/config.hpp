#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ae/bandit/simulation.hpp"
#include "ae/env/gridworld.hpp"
#include "ae/error.hpp"
#include "ae/neural/agent.hpp"
#include "ae/tabular/agent.hpp"

namespace ae {

using Json = nlohmann::ordered_json;

enum class ExperimentKind { GridworldTabular, MinizorkDqn, BanditSim };
enum class Variant { Vanilla, Ae, OracleElim };

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::GridworldTabular: return "gridworld-tabular";
    case ExperimentKind::MinizorkDqn: return "minizork-dqn";
    case ExperimentKind::BanditSim: return "bandit-sim";
  }
  return "?";
}
inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::Vanilla: return "vanilla";
    case Variant::Ae: return "ae";
    case Variant::OracleElim: return "oracle-elim";
  }
  return "?";
}
inline std::optional<Variant> parse_variant(const std::string& s) {
  if (s == "vanilla") return Variant::Vanilla;
  if (s == "ae") return Variant::Ae;
  if (s == "oracle-elim") return Variant::OracleElim;
  return std::nullopt;
}

struct ZorkConfig {
  std::string world = "egg";  // bundled world name or path to a world file
  std::size_t take_distractors = 100;
  bool template_mode = false;
  bool hazards = false;
  std::optional<int> horizon;  // overrides the world's horizon
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::GridworldTabular;
  Variant variant = Variant::Ae;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::uint64_t episodes = 30000;   // gridworld-tabular
  std::size_t trials = 1000;        // bandit-sim
  std::uint64_t base_seed = 1;      // bandit-sim
  std::string out = "runs/out";
  GridConfig grid;
  std::optional<std::string> grid_map_path;
  TabularConfig tabular;
  ZorkConfig zork;
  nn::AgentConfig agent;
  BanditSimConfig bandit;

  void validate() const {
    if (seeds.empty()) throw ConfigError("seeds: at least one seed is required");
    if (kind == ExperimentKind::MinizorkDqn && variant == Variant::OracleElim)
      throw ConfigError("variant: oracle-elim is only available for gridworld-tabular");
    if (kind == ExperimentKind::GridworldTabular && episodes == 0) throw ConfigError("episodes: must be positive");
    if (kind == ExperimentKind::BanditSim && trials == 0) throw ConfigError("trials: must be positive");
    tabular.validate();
    agent.validate();
    bandit.validate();
  }
};

namespace detail {

/// Reads typed fields from a JSON object, reporting errors with the full
/// field path and rejecting unknown keys.
class FieldReader {
 public:
  FieldReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    used_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    out = convert<T>(*it, field(key));
  }

  template <typename T>
  void get_optional(const std::string& key, std::optional<T>& out) {
    used_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return;
    out = convert<T>(*it, field(key));
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  FieldReader child(const std::string& key) {
    used_.insert(key);
    static const Json kEmpty = Json::object();
    const auto it = j_.find(key);
    return FieldReader(it == j_.end() ? kEmpty : *it, field(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(field(it.key()) + ": unknown field");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where() const { return path_.empty() ? "<root>" : path_; }

  template <typename T>
  static T convert(const Json& v, const std::string& at) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(at + ": expected true or false");
      return v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(at + ": expected an integer");
      if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)
        throw ConfigError(at + ": expected a nonnegative integer");
      return v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "infinity") return std::numeric_limits<T>::infinity();
      }
      if (!v.is_number()) throw ConfigError(at + ": expected a number");
      return v.get<T>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(at + ": expected a string");
      return v.get<std::string>();
    } else {
      if (!v.is_array()) throw ConfigError(at + ": expected an array");
      T out;
      for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(convert<typename T::value_type>(v[i], at + "[" + std::to_string(i) + "]"));
      return out;
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

}  // namespace detail

inline ExperimentConfig parse_experiment(const Json& j) {
  ExperimentConfig c;
  detail::FieldReader r(j, "");
  std::string kind = to_string(c.kind), variant = to_string(c.variant);
  r.get("kind", kind);
  if (kind == "gridworld-tabular") c.kind = ExperimentKind::GridworldTabular;
  else if (kind == "minizork-dqn") c.kind = ExperimentKind::MinizorkDqn;
  else if (kind == "bandit-sim") c.kind = ExperimentKind::BanditSim;
  else throw ConfigError("kind: unknown experiment kind '" + kind + "'");
  r.get("variant", variant);
  const auto v = parse_variant(variant);
  if (!v) throw ConfigError("variant: unknown variant '" + variant + "'");
  c.variant = *v;
  r.get("seeds", c.seeds);
  r.get("episodes", c.episodes);
  r.get("trials", c.trials);
  r.get("base_seed", c.base_seed);
  r.get("out", c.out);

  {
    auto g = r.child("grid");
    g.get("width", c.grid.width);
    g.get("height", c.grid.height);
    g.get("categories", c.grid.k_categories);
    g.get("p_correct_same", c.grid.p_correct_same);
    g.get("p_correct_diff", c.grid.p_correct_diff);
    g.get("p_elim_invalid", c.grid.p_elim_invalid);
    g.get("p_elim_valid", c.grid.p_elim_valid);
    g.get("horizon", c.grid.horizon);
    g.get("rooms", c.grid.rooms);
    g.get("category_seed", c.grid.category_seed);
    g.get_optional("map", c.grid_map_path);
    if (c.grid_map_path) {
      try {
        c.grid.map = load_grid_map(*c.grid_map_path);
      } catch (const Error& e) {
        throw ConfigError("grid.map: " + std::string(e.what()));
      }
    }
    g.finish();
  }
  {
    auto t = r.child("tabular");
    t.get("ell", c.tabular.ell);
    t.get("epsilon", c.tabular.epsilon);
    t.get("epsilon_final", c.tabular.epsilon_final);
    t.get("epsilon_decay_steps", c.tabular.epsilon_decay_steps);
    t.get("gamma", c.tabular.gamma);
    t.get("lr_exponent", c.tabular.lr_exponent);
    t.get("radius_scale", c.tabular.radius_scale);
    std::string form = c.tabular.radius_form == RadiusForm::Uct ? "uct" : "as-printed";
    t.get("radius_form", form);
    if (form == "uct") c.tabular.radius_form = RadiusForm::Uct;
    else if (form == "as-printed") c.tabular.radius_form = RadiusForm::AsPrinted;
    else throw ConfigError("tabular.radius_form: expected 'uct' or 'as-printed'");
    t.finish();
  }
  {
    auto z = r.child("zork");
    z.get("world", c.zork.world);
    z.get("take_distractors", c.zork.take_distractors);
    z.get("template_mode", c.zork.template_mode);
    z.get("hazards", c.zork.hazards);
    z.get_optional("horizon", c.zork.horizon);
    z.finish();
  }
  {
    auto a = r.child("agent");
    auto& g = c.agent;
    a.get("gamma_train", g.gamma_train);
    a.get("gamma_eval", g.gamma_eval);
    a.get("epsilon_start", g.epsilon_start);
    a.get("epsilon_final", g.epsilon_final);
    a.get("epsilon_anneal_fraction", g.epsilon_anneal_fraction);
    a.get("minibatch", g.minibatch);
    a.get("target_sync", g.target_sync);
    a.get("bandit_refresh", g.bandit_refresh);
    a.get("replay_capacity", g.replay_capacity);
    a.get("lambda", g.lambda);
    a.get("beta", g.beta);
    a.get("ell", g.ell);
    a.get("lr_q", g.lr_q);
    a.get("lr_aen", g.lr_aen);
    a.get("grad_clip", g.grad_clip);
    a.get("train_every", g.train_every);
    a.get("hash_dim", g.hash_dim);
    a.get("q_hidden", g.q_hidden);
    a.get("aen_hidden", g.aen_hidden);
    a.get("total_steps", g.total_steps);
    a.get("eval_interval", g.eval_interval);
    a.get("eval_episodes", g.eval_episodes);
    a.finish();
  }
  {
    auto b = r.child("bandit");
    auto& s = c.bandit;
    b.get("dim", s.dim);
    b.get("num_states", s.num_states);
    b.get("num_arms", s.num_arms);
    b.get("num_valid", s.num_valid);
    b.get("steps", s.steps);
    b.get("noise", s.noise);
    b.get("delta", s.delta);
    b.get("lambda", s.lambda);
    b.get("ell", s.ell);
    b.get("u", s.u);
    std::string mode = s.beta_mode == BetaMode::ExactDet ? "exact-det" : "simplified-dim";
    b.get("beta_mode", mode);
    if (mode == "exact-det") s.beta_mode = BetaMode::ExactDet;
    else if (mode == "simplified-dim") s.beta_mode = BetaMode::SimplifiedDim;
    else throw ConfigError("bandit.beta_mode: expected 'exact-det' or 'simplified-dim'");
    b.get("checkpoints", s.checkpoints);
    b.finish();
  }
  r.finish();
  return c;
}

inline ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  Json j;
  try {
    j = Json::parse(is, nullptr, true, true);  // comments allowed
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_experiment(j);
}

/// Every field with its effective value, in the same shape the parser reads.
inline Json to_json(const ExperimentConfig& c) {
  auto num = [](double v) -> Json {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
  };
  Json j;
  j["kind"] = to_string(c.kind);
  j["variant"] = to_string(c.variant);
  j["seeds"] = c.seeds;
  j["episodes"] = c.episodes;
  j["trials"] = c.trials;
  j["base_seed"] = c.base_seed;
  j["out"] = c.out;
  auto& g = j["grid"];
  g["width"] = c.grid.width;
  g["height"] = c.grid.height;
  g["categories"] = c.grid.k_categories;
  g["p_correct_same"] = num(c.grid.p_correct_same);
  g["p_correct_diff"] = num(c.grid.p_correct_diff);
  g["p_elim_invalid"] = num(c.grid.p_elim_invalid);
  g["p_elim_valid"] = num(c.grid.p_elim_valid);
  g["horizon"] = c.grid.horizon;
  g["rooms"] = c.grid.rooms;
  g["category_seed"] = c.grid.category_seed;
  g["map"] = c.grid_map_path ? Json(*c.grid_map_path) : Json(nullptr);
  auto& t = j["tabular"];
  t["ell"] = num(c.tabular.ell);
  t["epsilon"] = num(c.tabular.epsilon);
  t["epsilon_final"] = num(c.tabular.epsilon_final);
  t["epsilon_decay_steps"] = c.tabular.epsilon_decay_steps;
  t["gamma"] = num(c.tabular.gamma);
  t["lr_exponent"] = num(c.tabular.lr_exponent);
  t["radius_scale"] = num(c.tabular.radius_scale);
  t["radius_form"] = c.tabular.radius_form == RadiusForm::Uct ? "uct" : "as-printed";
  auto& z = j["zork"];
  z["world"] = c.zork.world;
  z["take_distractors"] = c.zork.take_distractors;
  z["template_mode"] = c.zork.template_mode;
  z["hazards"] = c.zork.hazards;
  z["horizon"] = c.zork.horizon ? Json(*c.zork.horizon) : Json(nullptr);
  auto& a = j["agent"];
  const auto& ag = c.agent;
  a["gamma_train"] = num(ag.gamma_train);
  a["gamma_eval"] = num(ag.gamma_eval);
  a["epsilon_start"] = num(ag.epsilon_start);
  a["epsilon_final"] = num(ag.epsilon_final);
  a["epsilon_anneal_fraction"] = num(ag.epsilon_anneal_fraction);
  a["minibatch"] = ag.minibatch;
  a["target_sync"] = ag.target_sync;
  a["bandit_refresh"] = ag.bandit_refresh;
  a["replay_capacity"] = ag.replay_capacity;
  a["lambda"] = num(ag.lambda);
  a["beta"] = num(ag.beta);
  a["ell"] = num(ag.ell);
  a["lr_q"] = num(ag.lr_q);
  a["lr_aen"] = num(ag.lr_aen);
  a["grad_clip"] = num(ag.grad_clip);
  a["train_every"] = ag.train_every;
  a["hash_dim"] = ag.hash_dim;
  a["q_hidden"] = ag.q_hidden;
  a["aen_hidden"] = ag.aen_hidden;
  a["total_steps"] = ag.total_steps;
  a["eval_interval"] = ag.eval_interval;
  a["eval_episodes"] = ag.eval_episodes;
  auto& b = j["bandit"];
  const auto& bs = c.bandit;
  b["dim"] = bs.dim;
  b["num_states"] = bs.num_states;
  b["num_arms"] = bs.num_arms;
  b["num_valid"] = bs.num_valid;
  b["steps"] = bs.steps;
  b["noise"] = num(bs.noise);
  b["delta"] = num(bs.delta);
  b["lambda"] = num(bs.lambda);
  b["ell"] = num(bs.ell);
  b["u"] = num(bs.u);
  b["beta_mode"] = bs.beta_mode == BetaMode::ExactDet ? "exact-det" : "simplified-dim";
  b["checkpoints"] = bs.checkpoints;
  return j;
}

}  // namespace ae
