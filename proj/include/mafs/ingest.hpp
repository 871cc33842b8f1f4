#pragma once

// Reading and writing tasks: Fast Downward SAS+ (v3) translations, the JSON
// task and partition formats, plan files, and a native instance generator.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mafs/model.hpp"
#include "mafs/oracle.hpp"

namespace mafs {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// --------------------------------------------------------------------------
// SAS+ v3

namespace detail {
class SasReader {
 public:
  explicit SasReader(std::string_view text) {
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(start, end - start);
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
        line.remove_suffix(1);
      lines_.emplace_back(line);
      start = end + 1;
    }
  }

  int line_no() const { return static_cast<int>(pos_); }  // 1-based number of the last line read

  std::string next() {
    if (pos_ >= lines_.size()) throw ParseError("unexpected end of file", line_no() + 1);
    return lines_[pos_++];
  }

  void expect(std::string_view token) {
    std::string got = next();
    if (got != token)
      throw ParseError("expected '" + std::string(token) + "', got '" + got + "'", line_no());
  }

  long long integer() {
    std::string s = next();
    return to_int(s);
  }

  std::vector<long long> integers(std::size_t count) {
    std::string s = next();
    std::istringstream in(s);
    std::vector<long long> out;
    std::string tok;
    while (in >> tok) out.push_back(to_int(tok));
    if (out.size() != count)
      throw ParseError("expected " + std::to_string(count) + " integers, got '" + s + "'",
                       line_no());
    return out;
  }

  // Effect lines have a variable count, so they are tokenized first.
  std::vector<long long> integer_row() {
    std::string s = next();
    std::istringstream in(s);
    std::vector<long long> out;
    std::string tok;
    while (in >> tok) out.push_back(to_int(tok));
    return out;
  }

  bool at_end() const {
    for (std::size_t i = pos_; i < lines_.size(); ++i)
      if (!lines_[i].empty()) return false;
    return true;
  }

 private:
  long long to_int(const std::string& s) {
    try {
      std::size_t used = 0;
      long long v = std::stoll(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ParseError("expected an integer, got '" + s + "'", line_no());
    }
  }

  std::vector<std::string> lines_;
  std::size_t pos_ = 0;
};
}  // namespace detail

inline Task parse_sas(std::string_view text) {
  detail::SasReader r(text);
  Task task;
  r.expect("begin_version");
  const long long version = r.integer();
  if (version != 3)
    throw UnsupportedError("unsupported SAS+ version " + std::to_string(version) +
                           " (only 3 is read)");
  r.expect("end_version");
  r.expect("begin_metric");
  const bool use_costs = r.integer() != 0;
  r.expect("end_metric");

  const long long nvars = r.integer();
  if (nvars < 0) throw ParseError("negative variable count", r.line_no());
  for (long long v = 0; v < nvars; ++v) {
    r.expect("begin_variable");
    Variable var;
    var.name = r.next();
    const long long layer = r.integer();
    if (layer != -1)
      throw UnsupportedError("variable '" + var.name + "' is derived (axiom layer " +
                             std::to_string(layer) + "); axioms are not supported");
    const long long dom = r.integer();
    if (dom < 1) throw ParseError("domain size must be positive", r.line_no());
    for (long long x = 0; x < dom; ++x) var.values.push_back(r.next());
    r.expect("end_variable");
    task.variables.push_back(std::move(var));
  }
  auto check_fact = [&](long long v, long long x) {
    if (v < 0 || v >= nvars) throw ParseError("variable " + std::to_string(v) + " out of range", r.line_no());
    if (x < 0 || x >= task.variables[v].domain_size())
      throw ParseError("value " + std::to_string(x) + " out of range", r.line_no());
    return Fact{static_cast<VarId>(v), static_cast<Value>(x)};
  };

  const long long nmutex = r.integer();
  for (long long m = 0; m < nmutex; ++m) {
    r.expect("begin_mutex_group");
    const long long k = r.integer();
    for (long long i = 0; i < k; ++i) {
      auto row = r.integers(2);
      check_fact(row[0], row[1]);
    }
    r.expect("end_mutex_group");
  }

  r.expect("begin_state");
  for (long long v = 0; v < nvars; ++v) {
    const long long x = r.integer();
    task.init.push_back(check_fact(v, x).val);
  }
  r.expect("end_state");

  r.expect("begin_goal");
  const long long ngoal = r.integer();
  for (long long i = 0; i < ngoal; ++i) {
    auto row = r.integers(2);
    task.goal.push_back(check_fact(row[0], row[1]));
  }
  r.expect("end_goal");

  const long long nops = r.integer();
  for (long long o = 0; o < nops; ++o) {
    r.expect("begin_operator");
    Action act;
    act.name = r.next();
    const long long nprevail = r.integer();
    for (long long i = 0; i < nprevail; ++i) {
      auto row = r.integers(2);
      act.pre.push_back(check_fact(row[0], row[1]));
    }
    const long long neff = r.integer();
    for (long long i = 0; i < neff; ++i) {
      auto row = r.integer_row();
      if (row.empty()) throw ParseError("empty effect line", r.line_no());
      if (row[0] != 0)
        throw UnsupportedError("operator '" + act.name + "' has a conditional effect (line " +
                               std::to_string(r.line_no()) + ")");
      if (row.size() != 4) throw ParseError("malformed effect line", r.line_no());
      const long long v = row[1], pre = row[2], post = row[3];
      if (pre != -1) act.pre.push_back(check_fact(v, pre));
      act.eff.push_back(check_fact(v, post));
    }
    const long long cost = r.integer();
    if (cost < 0) throw ParseError("negative operator cost", r.line_no());
    act.cost = use_costs ? cost : 1;
    r.expect("end_operator");
    std::sort(act.pre.begin(), act.pre.end());
    std::sort(act.eff.begin(), act.eff.end());
    for (std::size_t i = 1; i < act.pre.size(); ++i)
      if (act.pre[i].var == act.pre[i - 1].var)
        throw ParseError("operator '" + act.name + "' has two preconditions on one variable",
                         r.line_no());
    task.actions.push_back(std::move(act));
  }
  if (!r.at_end()) {
    const long long naxioms = r.integer();
    if (naxioms != 0) throw UnsupportedError("axioms are not supported");
  }
  task.agents.push_back({"agent0", std::nullopt});
  validate_task(task);
  return task;
}

// --------------------------------------------------------------------------
// JSON task format

namespace detail {
using ojson = nlohmann::ordered_json;

inline void require_keys(const nlohmann::json& j, const std::string& path,
                         std::initializer_list<const char*> required,
                         std::initializer_list<const char*> optional = {}) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  for (const char* k : required)
    if (!j.contains(k)) throw SchemaError(path, std::string("missing field '") + k + "'");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : required) known = known || it.key() == k;
    for (const char* k : optional) known = known || it.key() == k;
    if (!known) throw SchemaError(path + "/" + it.key(), "unknown field");
  }
}

inline const nlohmann::json& array_at(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array");
  return j;
}

inline long long int_at(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
  return j.get<long long>();
}

inline std::string string_at(const nlohmann::json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError(path, "expected a string");
  return j.get<std::string>();
}

inline std::vector<Fact> facts_at(const nlohmann::json& j, const std::string& path) {
  std::vector<Fact> out;
  const auto& arr = array_at(j, path);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = path + "/" + std::to_string(i);
    const auto& pair = array_at(arr[i], p);
    if (pair.size() != 2) throw SchemaError(p, "expected [var, value]");
    out.push_back({static_cast<VarId>(int_at(pair[0], p + "/0")),
                   static_cast<Value>(int_at(pair[1], p + "/1"))});
  }
  return out;
}

inline ojson facts_json(const std::vector<Fact>& facts) {
  ojson out = ojson::array();
  for (const auto& f : facts) out.push_back({f.var, f.val});
  return out;
}
}  // namespace detail

inline std::string dump_task_json(const Task& task) {
  using detail::ojson;
  ojson j;
  j["variables"] = ojson::array();
  for (const auto& v : task.variables) j["variables"].push_back({{"name", v.name}, {"domain", v.values}});
  j["init"] = task.init;
  j["goal"] = detail::facts_json(task.goal);
  j["actions"] = ojson::array();
  for (const auto& a : task.actions)
    j["actions"].push_back({{"name", a.name},
                            {"owner", a.owner},
                            {"pre", detail::facts_json(a.pre)},
                            {"eff", detail::facts_json(a.eff)},
                            {"cost", a.cost}});
  j["agents"] = ojson::array();
  for (const auto& ag : task.agents) {
    ojson e = {{"name", ag.name}};
    if (ag.address) e["address"] = *ag.address;
    j["agents"].push_back(e);
  }
  return j.dump(1) + "\n";
}

inline Task load_task_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("", std::string("malformed JSON: ") + e.what());
  }
  detail::require_keys(j, "", {"variables", "init", "goal", "actions", "agents"});
  Task task;
  const auto& vars = detail::array_at(j["variables"], "/variables");
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const std::string p = "/variables/" + std::to_string(i);
    detail::require_keys(vars[i], p, {"name", "domain"});
    Variable v;
    v.name = detail::string_at(vars[i]["name"], p + "/name");
    const auto& dom = detail::array_at(vars[i]["domain"], p + "/domain");
    for (std::size_t k = 0; k < dom.size(); ++k)
      v.values.push_back(detail::string_at(dom[k], p + "/domain/" + std::to_string(k)));
    task.variables.push_back(std::move(v));
  }
  const auto& init = detail::array_at(j["init"], "/init");
  for (std::size_t i = 0; i < init.size(); ++i)
    task.init.push_back(static_cast<Value>(detail::int_at(init[i], "/init/" + std::to_string(i))));
  task.goal = detail::facts_at(j["goal"], "/goal");
  const auto& acts = detail::array_at(j["actions"], "/actions");
  for (std::size_t i = 0; i < acts.size(); ++i) {
    const std::string p = "/actions/" + std::to_string(i);
    detail::require_keys(acts[i], p, {"name", "owner", "pre", "eff", "cost"});
    Action a;
    a.name = detail::string_at(acts[i]["name"], p + "/name");
    a.owner = static_cast<AgentId>(detail::int_at(acts[i]["owner"], p + "/owner"));
    a.pre = detail::facts_at(acts[i]["pre"], p + "/pre");
    a.eff = detail::facts_at(acts[i]["eff"], p + "/eff");
    a.cost = detail::int_at(acts[i]["cost"], p + "/cost");
    task.actions.push_back(std::move(a));
  }
  const auto& agents = detail::array_at(j["agents"], "/agents");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string p = "/agents/" + std::to_string(i);
    detail::require_keys(agents[i], p, {"name"}, {"address"});
    AgentInfo ag;
    ag.name = detail::string_at(agents[i]["name"], p + "/name");
    if (agents[i].contains("address"))
      ag.address = detail::string_at(agents[i]["address"], p + "/address");
    task.agents.push_back(std::move(ag));
  }
  validate_task(task);
  return task;
}

// --------------------------------------------------------------------------
// Partition files

struct PartitionRule {
  std::string name;
  std::optional<std::string> address;
  std::vector<std::string> prefixes;
  std::vector<std::string> names;
};

inline std::vector<PartitionRule> load_partition_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("", std::string("malformed JSON: ") + e.what());
  }
  detail::require_keys(j, "", {"agents"});
  const auto& agents = detail::array_at(j["agents"], "/agents");
  if (agents.empty()) throw SchemaError("/agents", "partition lists no agents");
  std::vector<PartitionRule> rules;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string p = "/agents/" + std::to_string(i);
    detail::require_keys(agents[i], p, {"name"}, {"address", "actions"});
    PartitionRule r;
    r.name = detail::string_at(agents[i]["name"], p + "/name");
    if (!seen.insert(r.name).second) throw SchemaError(p + "/name", "duplicate agent name");
    if (agents[i].contains("address"))
      r.address = detail::string_at(agents[i]["address"], p + "/address");
    if (agents[i].contains("actions")) {
      const auto& acts = agents[i]["actions"];
      detail::require_keys(acts, p + "/actions", {}, {"prefixes", "names"});
      for (const char* key : {"prefixes", "names"}) {
        if (!acts.contains(key)) continue;
        const std::string q = p + "/actions/" + key;
        const auto& arr = detail::array_at(acts[key], q);
        for (std::size_t k = 0; k < arr.size(); ++k) {
          auto s = detail::string_at(arr[k], q + "/" + std::to_string(k));
          (std::string_view(key) == "prefixes" ? r.prefixes : r.names).push_back(std::move(s));
        }
      }
    }
    rules.push_back(std::move(r));
  }
  return rules;
}

// Returns a copy of `task` whose agents and owners follow the partition.
inline Task parse_partition(std::string_view text, const Task& task) {
  const auto rules = load_partition_json(text);
  Task out = task;
  out.agents.clear();
  for (const auto& r : rules) out.agents.push_back({r.name, r.address});
  std::vector<std::string> unmatched;
  std::size_t unmatched_total = 0;
  for (auto& act : out.actions) {
    std::vector<AgentId> hits;
    for (AgentId k = 0; k < static_cast<AgentId>(rules.size()); ++k) {
      const auto& r = rules[k];
      bool hit = std::find(r.names.begin(), r.names.end(), act.name) != r.names.end();
      for (const auto& pre : r.prefixes) hit = hit || act.name.starts_with(pre);
      if (hit) hits.push_back(k);
    }
    if (hits.size() > 1)
      throw SchemaError("/agents", "action '" + act.name + "' matches both '" +
                                       rules[hits[0]].name + "' and '" + rules[hits[1]].name + "'");
    if (hits.empty()) {
      if (unmatched.size() < 10) unmatched.push_back(act.name);
      ++unmatched_total;
      continue;
    }
    act.owner = hits[0];
  }
  if (!unmatched.empty()) {
    std::string msg = std::to_string(unmatched_total) + " action(s) match no agent:";
    for (const auto& n : unmatched) msg += " '" + n + "'";
    if (unmatched_total > unmatched.size()) msg += " ...";
    throw SchemaError("/agents", msg);
  }
  validate_task(out);
  return out;
}

// --------------------------------------------------------------------------
// Plan files: one "(name)" per line, then "; cost = N".

inline std::string format_plan(const Task& task, const std::vector<ActionId>& plan) {
  std::string out;
  Cost cost = 0;
  for (ActionId a : plan) {
    out += "(" + task.actions[a].name + ")\n";
    cost += task.actions[a].cost;
  }
  out += "; cost = " + std::to_string(cost) + "\n";
  return out;
}

inline std::vector<ActionId> parse_plan(std::string_view text, const Task& task) {
  std::map<std::string, ActionId> by_name;
  for (ActionId a = 0; a < task.num_actions(); ++a) by_name.emplace(task.actions[a].name, a);
  std::vector<ActionId> plan;
  std::istringstream in{std::string(text)};
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == ';') continue;
    if (line.front() != '(' || line.back() != ')') throw ParseError("expected '(action name)'", no);
    auto it = by_name.find(line.substr(1, line.size() - 2));
    if (it == by_name.end()) throw ParseError("unknown action '" + line + "'", no);
    plan.push_back(it->second);
  }
  return plan;
}

// --------------------------------------------------------------------------
// Generator

struct GeneratorParams {
  std::string domain = "logistics";  // logistics | chain | random
  int num_agents = 2;
  int locations = 3;  // logistics: per truck
  int packages = 2;   // logistics
  int length = 3;     // chain: number of stage steps
  int variables = 3;  // random: public variables
  int actions = 4;    // random: public actions per agent
  bool random_costs = false;
  bool solvable = true;
  std::uint64_t seed = 1;
};

namespace detail {
// Portable bounded draw, so generated tasks do not depend on the standard
// library's distribution implementation.
inline std::uint64_t uniform(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  const std::uint64_t span = hi - lo + 1;
  if (span == 0) return rng();
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t x;
  do x = rng();
  while (x >= limit);
  return lo + x % span;
}

inline Cost draw_cost(std::mt19937_64& rng, bool random_costs) {
  return random_costs ? static_cast<Cost>(uniform(rng, 1, 10)) : 1;
}

inline Task generate_logistics(const GeneratorParams& p, std::mt19937_64& rng) {
  const int k = p.num_agents;
  const int n = p.locations;
  if (n < 2) throw std::invalid_argument("logistics needs at least 2 locations per truck");
  if (p.packages < 1) throw std::invalid_argument("logistics needs at least 1 package");
  // Truck i owns locations region[i]; consecutive trucks share one depot,
  // which is the last location of truck i and the first of truck i+1.
  std::vector<std::vector<int>> region(k);
  int next_loc = 0;
  for (int i = 0; i < k; ++i) {
    if (i > 0) region[i].push_back(region[i - 1].back());
    while (static_cast<int>(region[i].size()) < n) region[i].push_back(next_loc++);
  }
  const int num_locs = next_loc;
  // For unsolvable instances truck k-1 loses its depot (k > 1) or the goal
  // location of package 0 is cut off from every road (k == 1).
  const bool cut = !p.solvable;

  Task t;
  for (int i = 0; i < k; ++i) {
    Variable v{"at-truck" + std::to_string(i + 1), {}};
    for (int l : region[i]) v.values.push_back("loc" + std::to_string(l));
    t.variables.push_back(std::move(v));
    t.agents.push_back({"truck" + std::to_string(i + 1), std::nullopt});
  }
  auto pkg_value_in = [&](int truck) { return num_locs + truck; };
  for (int q = 0; q < p.packages; ++q) {
    Variable v{"at-pkg" + std::to_string(q + 1), {}};
    for (int l = 0; l < num_locs; ++l) v.values.push_back("loc" + std::to_string(l));
    for (int i = 0; i < k; ++i) v.values.push_back("in-truck" + std::to_string(i + 1));
    t.variables.push_back(std::move(v));
  }
  auto pkg_var = [&](int q) { return static_cast<VarId>(k + q); };

  // Road maps: a random spanning tree per region plus one extra edge.
  int isolated = -1;
  if (cut && k == 1) isolated = n - 1;
  for (int i = 0; i < k; ++i) {
    const auto& locs = region[i];
    const int m = static_cast<int>(locs.size());
    std::set<std::pair<int, int>> edges;
    for (int a = 1; a < m; ++a) {
      if (cut && i == k - 1 && k > 1 && a == 1) {
        // keep local indices 1.. connected among themselves but not to the depot
        continue;
      }
      int lo = (cut && i == k - 1 && k > 1) ? 1 : 0;
      if (isolated >= 0 && a == isolated) continue;
      const int hi = a - 1;
      if (hi < lo) continue;
      int b = static_cast<int>(uniform(rng, lo, hi));
      if (isolated >= 0 && b == isolated) b = 0;
      edges.insert({b, a});
    }
    if (m >= 3) {
      int a = static_cast<int>(uniform(rng, 0, m - 1));
      int b = static_cast<int>(uniform(rng, 0, m - 1));
      const bool touches_cut = (cut && i == k - 1 && k > 1 && (a == 0 || b == 0)) ||
                               (isolated >= 0 && (a == isolated || b == isolated));
      if (a != b && !touches_cut) edges.insert({std::min(a, b), std::max(a, b)});
    }
    const std::string truck = "truck" + std::to_string(i + 1);
    for (auto [a, b] : edges) {
      for (auto [from, to] : {std::pair{a, b}, std::pair{b, a}}) {
        Action act;
        act.name = "drive " + truck + " loc" + std::to_string(locs[from]) + " loc" +
                   std::to_string(locs[to]);
        act.owner = i;
        act.pre = {{static_cast<VarId>(i), from}};
        act.eff = {{static_cast<VarId>(i), to}};
        act.cost = draw_cost(rng, p.random_costs);
        t.actions.push_back(std::move(act));
      }
    }
    for (int q = 0; q < p.packages; ++q) {
      for (int li = 0; li < m; ++li) {
        const int l = locs[li];
        const std::string tail = " pkg" + std::to_string(q + 1) + " " + truck + " loc" + std::to_string(l);
        Action load{"load" + tail, i, {{static_cast<VarId>(i), li}, {pkg_var(q), l}},
                    {{pkg_var(q), pkg_value_in(i)}}, draw_cost(rng, p.random_costs)};
        Action unload{"unload" + tail, i, {{static_cast<VarId>(i), li}, {pkg_var(q), pkg_value_in(i)}},
                      {{pkg_var(q), l}}, draw_cost(rng, p.random_costs)};
        std::sort(load.pre.begin(), load.pre.end());
        std::sort(unload.pre.begin(), unload.pre.end());
        t.actions.push_back(std::move(load));
        t.actions.push_back(std::move(unload));
      }
    }
  }

  // Trucks start anywhere except a cut-off spot; packages start and end in
  // random places, package 0 always crossing from the first region to the last.
  for (int i = 0; i < k; ++i) {
    int li = static_cast<int>(uniform(rng, 0, n - 1));
    if (cut && i == k - 1 && k > 1 && li == 0) li = 1;
    if (isolated >= 0 && li == isolated) li = 0;
    t.init.push_back(li);
  }
  for (int q = 0; q < p.packages; ++q) {
    int from, to;
    if (q == 0) {
      from = region[0][static_cast<int>(uniform(rng, 0, (k == 1 ? n - 2 : n - 2)))];
      to = isolated >= 0 ? region[0][isolated]
                         : region[k - 1][static_cast<int>(uniform(rng, 1, n - 1))];
      if (k == 1 && isolated < 0 && to == from) to = region[0][n - 1];
    } else {
      from = static_cast<int>(uniform(rng, 0, num_locs - 1));
      to = static_cast<int>(uniform(rng, 0, num_locs - 1));
      if (isolated >= 0) {
        if (from == region[0][isolated]) from = region[0][0];
        if (to == region[0][isolated]) to = region[0][0];
      }
    }
    t.init.push_back(from);
    t.goal.push_back({pkg_var(q), to});
  }
  return t;
}

inline Task generate_chain(const GeneratorParams& p, std::mt19937_64& rng) {
  const int k = p.num_agents;
  const int n = p.length;
  if (n < 1) throw std::invalid_argument("chain needs length >= 1");
  Task t;
  Variable stage{"stage", {}};
  for (int i = 0; i <= n; ++i) stage.values.push_back("s" + std::to_string(i));
  t.variables.push_back(std::move(stage));
  for (int a = 0; a < k; ++a) {
    t.agents.push_back({"agent" + std::to_string(a + 1), std::nullopt});
    t.variables.push_back({"toggle" + std::to_string(a + 1), {"off", "on"}});
  }
  for (int i = 0; i < n; ++i) {
    if (!p.solvable && i == n - 1) continue;  // last step missing
    Action step{"step" + std::to_string(i), i % k, {{0, i}}, {{0, i + 1}},
                draw_cost(rng, p.random_costs)};
    t.actions.push_back(std::move(step));
  }
  for (int a = 0; a < k; ++a) {
    const VarId v = static_cast<VarId>(1 + a);
    const std::string who = std::to_string(a + 1);
    t.actions.push_back({"toggle-on" + who, a, {{v, 0}}, {{v, 1}}, draw_cost(rng, p.random_costs)});
    t.actions.push_back({"toggle-off" + who, a, {{v, 1}}, {{v, 0}}, draw_cost(rng, p.random_costs)});
  }
  t.init.assign(1 + k, 0);
  t.goal = {{0, n}};
  return t;
}

// One attempt; the caller resamples until solvability matches.
inline Task generate_random_once(const GeneratorParams& p, std::mt19937_64& rng) {
  const int k = p.num_agents;
  const int np = std::max(1, p.variables);
  Task t;
  for (int v = 0; v < np; ++v) {
    const int dom = static_cast<int>(uniform(rng, 2, 3));
    Variable var{"pub" + std::to_string(v), {}};
    for (int x = 0; x < dom; ++x) var.values.push_back("v" + std::to_string(x));
    t.variables.push_back(std::move(var));
  }
  for (int a = 0; a < k; ++a) {
    t.agents.push_back({"agent" + std::to_string(a + 1), std::nullopt});
    t.variables.push_back({"priv" + std::to_string(a + 1), {"p0", "p1", "p2"}});
  }
  for (const auto& v : t.variables) {
    (void)v;
    t.init.push_back(0);
  }
  for (int a = 0; a < k; ++a) {
    const VarId pv = static_cast<VarId>(np + a);
    const std::string who = std::to_string(a + 1);
    // private cycle on the agent's own variable
    for (int x = 0; x < 3; ++x)
      t.actions.push_back({"work" + who + "-" + std::to_string(x), a, {{pv, x}},
                           {{pv, (x + 1) % 3}}, draw_cost(rng, p.random_costs)});
    for (int j = 0; j < p.actions; ++j) {
      Action act;
      act.name = "act" + who + "-" + std::to_string(j);
      act.owner = a;
      act.cost = draw_cost(rng, p.random_costs);
      const VarId ev = static_cast<VarId>(uniform(rng, 0, np - 1));
      const Value ex = static_cast<Value>(uniform(rng, 0, t.variables[ev].domain_size() - 1));
      act.eff.push_back({ev, ex});
      act.pre.push_back({pv, static_cast<Value>(uniform(rng, 0, 2))});
      if (uniform(rng, 0, 1) == 1) {
        const VarId cv = static_cast<VarId>(uniform(rng, 0, np - 1));
        act.pre.push_back({cv, static_cast<Value>(uniform(rng, 0, t.variables[cv].domain_size() - 1))});
      }
      std::sort(act.pre.begin(), act.pre.end());
      t.actions.push_back(std::move(act));
    }
  }
  const int ngoal = static_cast<int>(uniform(rng, 1, std::min(2, np)));
  std::set<VarId> used;
  while (static_cast<int>(t.goal.size()) < ngoal) {
    const VarId v = static_cast<VarId>(uniform(rng, 0, np - 1));
    if (!used.insert(v).second) continue;
    t.goal.push_back({v, static_cast<Value>(uniform(rng, 1, t.variables[v].domain_size() - 1))});
  }
  std::sort(t.goal.begin(), t.goal.end());
  return t;
}
}  // namespace detail

inline Task generate_instance(const GeneratorParams& p) {
  if (p.num_agents < 1) throw std::invalid_argument("num_agents must be >= 1");
  std::mt19937_64 rng(p.seed);
  Task t;
  if (p.domain == "logistics") {
    t = detail::generate_logistics(p, rng);
  } else if (p.domain == "chain") {
    t = detail::generate_chain(p, rng);
  } else if (p.domain == "random") {
    for (int attempt = 0;; ++attempt) {
      if (attempt == 1000)
        throw std::invalid_argument("random: no instance with the requested solvability found");
      t = detail::generate_random_once(p, rng);
      const auto r = oracle_optimal_cost(t, 100'000);
      if (r.status == OracleStatus::kTooLarge) continue;
      if ((r.status == OracleStatus::kSolved) == p.solvable) break;
    }
  } else {
    throw std::invalid_argument("unknown domain '" + p.domain + "'");
  }
  validate_task(t);
  return t;
}

}  // namespace mafs
