#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ae/env/world_spec.hpp"
#include "ae/error.hpp"

namespace ae::zork {

inline constexpr const char* kPadToken = "<null>";
inline constexpr std::size_t kDescriptorTokens = 50;
inline constexpr std::size_t kInventoryTokens = 15;

/// Where an object currently is. Encoded as -1 for inventory, [0, rooms)
/// for a room, and rooms + j for "inside object j".
using Location = int;
inline constexpr Location kInventory = -1;

struct GameState {
  std::size_t room = 0;
  std::vector<Location> location;         // per object
  std::vector<std::uint8_t> flags;        // per object, bitmask of Flag
  std::vector<std::uint8_t> fired;        // per event
  int score = 0;
  int steps = 0;
  bool dead = false;

  bool has_flag(std::size_t obj, Flag f) const { return (flags[obj] >> static_cast<int>(f)) & 1U; }
  void set_flag(std::size_t obj, Flag f, bool on) {
    const auto bit = static_cast<std::uint8_t>(1U << static_cast<int>(f));
    flags[obj] = on ? static_cast<std::uint8_t>(flags[obj] | bit) : static_cast<std::uint8_t>(flags[obj] & ~bit);
  }
  /// World-state identity ignoring the step counter.
  std::string key() const {
    std::string k;
    k.reserve(8 + location.size() * 2 + fired.size());
    k += std::to_string(room);
    k += dead ? 'D' : '|';
    for (auto l : location) k += static_cast<char>(l + 2);
    for (auto f : flags) k += static_cast<char>(f + 'a');
    for (auto f : fired) k += static_cast<char>(f + '0');
    return k;
  }
  bool operator==(const GameState&) const = default;
};

struct StepResult {
  GameState next;
  std::string observation;
  double reward = 0.0;
  int elim = 0;
  bool done = false;
  bool terminal = false;  // a terminal event fired or the player died
};

enum class CommandOrigin { Fixed, Template };

struct ActionSet {
  std::vector<std::string> commands;
  std::vector<CommandOrigin> origin;
  std::size_t size() const { return commands.size(); }
};

namespace detail {

inline std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || ch == '\'' || ch == '-') {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline std::string canonical_direction(const std::string& w) {
  static const std::pair<const char*, const char*> kAlias[] = {
      {"n", "north"}, {"s", "south"}, {"e", "east"}, {"w", "west"}, {"u", "up"}, {"d", "down"},
      {"ne", "northeast"}, {"nw", "northwest"}, {"se", "southeast"}, {"sw", "southwest"}};
  for (const auto& [a, full] : kAlias)
    if (w == a) return full;
  return w;
}

inline bool is_direction(const std::string& w) {
  static const char* kDirs[] = {"north", "south", "east", "west", "up", "down",
                                "northeast", "northwest", "southeast", "southwest"};
  return std::find_if(std::begin(kDirs), std::end(kDirs), [&](const char* d) { return w == d; }) != std::end(kDirs);
}

inline std::string canonical_verb(const std::string& w) {
  if (w == "get" || w == "grab" || w == "pick") return "take";
  if (w == "attack" || w == "fight" || w == "hit" || w == "slay") return "kill";
  if (w == "push" || w == "pull" || w == "shift") return "move";
  if (w == "x" || w == "inspect" || w == "read") return "examine";
  if (w == "l") return "look";
  if (w == "i" || w == "inv") return "inventory";
  if (w == "shut") return "close";
  return w;
}

}  // namespace detail

/// Rules engine over a WorldSpec. Stateless apart from the spec; all game
/// state lives in GameState values.
class Game {
 public:
  explicit Game(WorldSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    const auto nr = static_cast<Location>(spec_.rooms.size());
    initial_.room = *spec_.room_index(spec_.start_room);
    for (const auto& o : spec_.objects) {
      if (o.location == "inventory") {
        initial_.location.push_back(kInventory);
      } else if (auto r = spec_.room_index(o.location)) {
        initial_.location.push_back(static_cast<Location>(*r));
      } else {
        initial_.location.push_back(nr + static_cast<Location>(*spec_.object_index(o.location)));
      }
      std::uint8_t f = 0;
      for (auto fl : o.initial_flags) f = static_cast<std::uint8_t>(f | (1U << static_cast<int>(fl)));
      initial_.flags.push_back(f);
    }
    initial_.fired.assign(spec_.events.size(), 0);
    // Containment must be acyclic.
    for (std::size_t i = 0; i < spec_.objects.size(); ++i) {
      Location l = initial_.location[i];
      for (std::size_t hops = 0; l >= nr; ++hops) {
        if (hops > spec_.objects.size()) throw ConfigError("world '" + spec_.name + "': containment cycle");
        l = initial_.location[static_cast<std::size_t>(l - nr)];
      }
    }
    for (const auto& v : spec_.verbs) known_words_.insert(v);
    for (const auto& w : spec_.dictionary) known_words_.insert(w);
    for (const auto& o : spec_.objects)
      for (const auto& w : o.words) known_words_.insert(w);
  }

  const WorldSpec& spec() const { return spec_; }
  const GameState& initial_state() const { return initial_; }

  bool holds(const Condition& c, const GameState& s) const {
    for (const auto& a : c.atoms) {
      bool v = false;
      switch (a.kind) {
        case Atom::Kind::InRoom: v = spec_.rooms[s.room].id == a.subject; break;
        case Atom::Kind::Has: v = carried(s, *spec_.object_index(a.subject)); break;
        case Atom::Kind::FlagSet: v = s.has_flag(*spec_.object_index(a.subject), a.flag); break;
        case Atom::Kind::Fired: v = s.fired[*spec_.event_index(a.subject)] != 0; break;
      }
      if (v == a.negated) return false;
    }
    return true;
  }

  bool room_lit(const GameState& s) const {
    const auto& r = spec_.rooms[s.room];
    return !r.lit_when || holds(*r.lit_when, s);
  }

  /// True when the object is in the inventory, possibly nested in carried containers.
  bool carried(const GameState& s, std::size_t obj) const {
    const auto nr = static_cast<Location>(spec_.rooms.size());
    Location l = s.location[obj];
    while (l >= nr) l = s.location[static_cast<std::size_t>(l - nr)];
    return l == kInventory;
  }

  /// Whether the player can see and reach the object right now.
  bool reachable(const GameState& s, std::size_t obj) const {
    const auto& o = spec_.objects[obj];
    if (o.visible_when && !holds(*o.visible_when, s)) return false;
    const auto nr = static_cast<Location>(spec_.rooms.size());
    const bool lit = room_lit(s);
    Location l = s.location[obj];
    while (true) {
      if (l == kInventory) return true;
      if (l < nr) return lit && static_cast<std::size_t>(l) == s.room;
      const auto c = static_cast<std::size_t>(l - nr);
      if (spec_.objects[c].openable && !s.has_flag(c, Flag::Open)) return false;
      if (spec_.objects[c].visible_when && !holds(*spec_.objects[c].visible_when, s)) return false;
      l = s.location[c];
    }
  }

  std::string room_description(const GameState& s) const {
    const auto& r = spec_.rooms[s.room];
    if (!room_lit(s)) return "It is pitch black. You are likely to be eaten by a grue.";
    std::string out = r.title + ". " + r.desc;
    const auto nr = static_cast<Location>(spec_.rooms.size());
    for (std::size_t i = 0; i < spec_.objects.size(); ++i) {
      const auto& o = spec_.objects[i];
      if (o.scenery || carried(s, i) || !reachable(s, i)) continue;
      if (s.location[i] >= nr) {
        out += " The " + spec_.objects[static_cast<std::size_t>(s.location[i] - nr)].words.front() + " contains " +
               o.desc + ".";
      } else {
        out += " There is " + o.desc + " here.";
      }
    }
    return out;
  }

  std::string inventory_text(const GameState& s) const {
    std::string out;
    for (std::size_t i = 0; i < spec_.objects.size(); ++i) {
      if (s.location[i] != kInventory) continue;
      if (!out.empty()) out += ' ';
      out += spec_.objects[i].words.front();
    }
    return out;
  }

  /// Fixed-width token rendering: 50 descriptor tokens then 15 inventory tokens.
  std::vector<std::string> render_tokens(const GameState& s) const {
    auto desc = detail::tokenize(room_description(s));
    auto inv = detail::tokenize(inventory_text(s));
    desc.resize(kDescriptorTokens, kPadToken);
    inv.resize(kInventoryTokens, kPadToken);
    desc.insert(desc.end(), inv.begin(), inv.end());
    return desc;
  }

  std::string render_state_text(const GameState& s) const {
    const auto toks = render_tokens(s);
    std::string out;
    for (const auto& t : toks) {
      if (!out.empty()) out += ' ';
      out += t;
    }
    return out;
  }

  /// Execute one command. `hazard_rng` enables per-room death hazards when non-null.
  StepResult execute(const GameState& state, const std::string& command, std::mt19937_64* hazard_rng = nullptr) const {
    StepResult res;
    res.next = state;
    GameState& s = res.next;
    std::string feedback;
    if (state.dead || state.steps >= spec_.horizon) {
      res.done = true;
      res.elim = 1;
      res.observation = "The game is over.";
      return res;
    }
    const bool changed = apply(s, command, feedback);
    res.elim = changed ? 0 : 1;
    if (res.elim == 0 && feedback.empty()) feedback = "Done.";

    ++s.steps;
    res.reward = spec_.step_penalty;

    if (hazard_rng && !s.dead) {
      const double p = spec_.rooms[s.room].hazard;
      if (p > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(*hazard_rng) < p) {
        s.dead = true;
        feedback += " " + spec_.rooms[s.room].hazard_text;
      }
    }
    if (!s.dead) {
      for (std::size_t e = 0; e < spec_.events.size(); ++e) {
        if (s.fired[e] || !holds(spec_.events[e].when, s)) continue;
        s.fired[e] = 1;
        s.score += spec_.events[e].award;
        res.reward += spec_.events[e].award;
        if (!spec_.events[e].text.empty()) feedback += " " + spec_.events[e].text;
        if (spec_.events[e].terminal) res.terminal = true;
      }
    }
    if (s.dead) res.terminal = true;
    res.done = res.terminal || s.steps >= spec_.horizon;
    const std::string inv = inventory_text(s);
    res.observation = feedback + "\n" + (inv.empty() ? "You are empty-handed." : "You are carrying: " + inv + ".");
    return res;
  }

  ActionSet build_action_set(std::size_t n_take_distractors, bool template_mode) const {
    ActionSet set;
    std::set<std::string> seen;
    auto add = [&](const std::string& c, CommandOrigin o) {
      if (seen.insert(c).second) {
        set.commands.push_back(c);
        set.origin.push_back(o);
        return true;
      }
      return false;
    };
    for (const auto& f : spec_.fixed_actions) add(f, CommandOrigin::Fixed);
    if (template_mode) {
      for (const auto& v : spec_.verbs)
        for (const auto& w : spec_.dictionary) add(v + " " + w, CommandOrigin::Template);
      return set;
    }
    for (const auto& q : spec_.quest_objects()) {
      const auto& o = *spec_.object(q);
      if (o.takeable) add("take " + o.words.front(), CommandOrigin::Template);
    }
    std::size_t added = 0;
    for (const auto& w : spec_.dictionary) {
      if (added == n_take_distractors) break;
      if (add("take " + w, CommandOrigin::Template)) ++added;
    }
    if (added < n_take_distractors)
      throw ConfigError("world '" + spec_.name + "': dictionary has only " + std::to_string(added) +
                        " usable words, " + std::to_string(n_take_distractors) + " distractors requested");
    return set;
  }

 private:
  // Returns true when the world state changed or the command was a legal
  // observation; feedback is always filled.
  bool apply(GameState& s, const std::string& command, std::string& feedback) const {
    auto words = detail::tokenize(command);
    words.erase(std::remove_if(words.begin(), words.end(),
                               [](const std::string& w) { return w == "the" || w == "a" || w == "an"; }),
                words.end());
    if (words.empty()) {
      feedback = "I beg your pardon?";
      return false;
    }
    if (words.size() == 2 && words[0] == "go") words.erase(words.begin());
    if (words.size() == 1) words[0] = detail::canonical_direction(words[0]);

    const std::string joined = ae::zork::detail::join(words);
    for (const auto& ex : spec_.rooms[s.room].exits) {
      if (ex.command != joined) continue;
      if (!holds(ex.when, s)) {
        feedback = ex.blocked_text;
        return false;
      }
      s.room = *spec_.room_index(ex.target);
      feedback = room_description(s);
      return true;
    }
    if (words.size() == 1 && detail::is_direction(words[0])) {
      feedback = "You can't go that way.";
      return false;
    }

    const std::string verb = detail::canonical_verb(words[0]);
    if (!known_words_.count(words[0]) && !known_words_.count(verb)) {
      feedback = "I don't know the word \"" + words[0] + "\".";
      return false;
    }
    if (verb == "look" && words.size() == 1) {
      feedback = room_description(s);
      return true;
    }
    if (verb == "inventory" && words.size() == 1) {
      const auto inv = inventory_text(s);
      feedback = inv.empty() ? "You are empty-handed." : "You are carrying: " + inv + ".";
      return true;
    }
    if (words.size() == 1) {
      feedback = "What do you want to " + words[0] + "?";
      return false;
    }
    if (words.size() > 2) {
      feedback = "I don't understand that sentence.";
      return false;
    }
    const std::string& noun = words[1];
    if (!known_words_.count(noun)) {
      feedback = "I don't know the word \"" + noun + "\".";
      return false;
    }
    const auto obj = spec_.object_by_word(noun);
    const bool here = obj && reachable(s, *obj);
    if (verb == "climb" && !here) {
      feedback = "There are no " + noun + "s to climb.";
      return false;
    }
    if (!here) {
      feedback = "You can't see any " + noun + " here.";
      return false;
    }
    const std::size_t o = *obj;
    const auto& os = spec_.objects[o];
    for (const auto& g : os.guards) {
      if (g.verb == verb && !holds(g.when, s)) {
        feedback = g.text.empty() ? "You can't do that." : g.text;
        return false;
      }
    }
    const auto nr = static_cast<Location>(spec_.rooms.size());

    if (verb == "take") {
      if (s.location[o] == kInventory) return fail(feedback, "You already have that.");
      if (!os.takeable) return fail(feedback, "You can't take that.");
      s.location[o] = kInventory;
      feedback = "Taken.";
      return true;
    }
    if (verb == "drop") {
      if (s.location[o] != kInventory) return fail(feedback, "You aren't carrying that.");
      s.location[o] = static_cast<Location>(s.room);
      feedback = "Dropped.";
      return true;
    }
    if (verb == "open" || verb == "close") {
      const bool want = verb == "open";
      if (!os.openable) return fail(feedback, "You can't " + verb + " that.");
      if (s.has_flag(o, Flag::Open) == want) return fail(feedback, want ? "It is already open." : "It is already closed.");
      s.set_flag(o, Flag::Open, want);
      feedback = want ? "Opened." : "Closed.";
      if (want) {
        for (std::size_t i = 0; i < spec_.objects.size(); ++i)
          if (s.location[i] == nr + static_cast<Location>(o)) feedback += " Inside is " + spec_.objects[i].desc + ".";
      }
      return true;
    }
    if (verb == "light" || verb == "extinguish") {
      const bool want = verb == "light";
      if (!os.lightable) return fail(feedback, "You can't " + verb + " that.");
      if (s.has_flag(o, Flag::Lit) == want) return fail(feedback, want ? "It is already on." : "It is already off.");
      s.set_flag(o, Flag::Lit, want);
      feedback = want ? "The " + noun + " is now on." : "The " + noun + " is now off.";
      return true;
    }
    if (verb == "move") {
      if (!os.movable || s.has_flag(o, Flag::Moved)) return fail(feedback, "Moving the " + noun + " reveals nothing.");
      s.set_flag(o, Flag::Moved, true);
      feedback = "You move the " + noun + ".";
      return true;
    }
    if (verb == "kill") {
      if (!os.killable) return fail(feedback, "You can't attack that.");
      if (s.has_flag(o, Flag::Dead)) return fail(feedback, "It is already dead.");
      s.set_flag(o, Flag::Dead, true);
      feedback = "The " + noun + " is slain.";
      return true;
    }
    if (verb == "examine") {
      feedback = "You see " + os.desc + ".";
      return true;
    }
    if (verb == "climb") return fail(feedback, "You can't climb that.");
    return fail(feedback, "You can't " + words[0] + " that.");
  }

  static bool fail(std::string& feedback, std::string text) {
    feedback = std::move(text);
    return false;
  }

  WorldSpec spec_;
  GameState initial_;
  std::set<std::string> known_words_;
};

/// Step/reset surface over a Game and a fixed action set.
class ZorkEnv {
 public:
  struct Outcome {
    double reward = 0.0;
    int elim = 0;
    bool done = false;
    bool terminal = false;
  };

  ZorkEnv(const Game& game, ActionSet actions, bool hazards = false)
      : game_(&game), actions_(std::move(actions)), hazards_(hazards) {
    if (actions_.size() == 0) throw ConfigError("zork env: empty action set");
  }

  void reset(std::uint64_t seed) {
    rng_.seed(seed);
    state_ = game_->initial_state();
    last_observation_ = game_->room_description(state_);
  }

  Outcome step(std::size_t action) {
    if (action >= actions_.size()) throw InvalidArgument("zork env: action index out of range");
    auto r = game_->execute(state_, actions_.commands[action], hazards_ ? &rng_ : nullptr);
    state_ = std::move(r.next);
    last_observation_ = std::move(r.observation);
    return {r.reward, r.elim, r.done, r.terminal};
  }

  std::size_t num_actions() const { return actions_.size(); }
  const ActionSet& actions() const { return actions_; }
  const GameState& state() const { return state_; }
  const Game& game() const { return *game_; }
  std::string state_text() const { return game_->render_state_text(state_); }
  const std::string& observation() const { return last_observation_; }

 private:
  const Game* game_;
  ActionSet actions_;
  bool hazards_;
  std::mt19937_64 rng_;
  GameState state_;
  std::string last_observation_;
};

}  // namespace ae::zork
