#pragma once

// Benchmark suites: instances x planner configs x seeds, one RunReport per
// cell, plus the aggregate rows and the A*/PP-A* expansion comparison.
//
// Suite JSON:
//   {
//     "instances": [ {"name": "l1", "task": "l1.json"},
//                    {"name": "g1", "generate": {"domain": "logistics", "agents": 3, "seed": 4}} ],
//     "configs":   [ {"algorithm": "astar", "heuristic": "hmax"},
//                    {"algorithm": "pp-astar", "pruning": "pb"},
//                    {"algorithm": "mad-astar", "privacy": "token"} ],
//     "seeds": [1, 2],
//     "timeout": 60,
//     "memory_limit": 1073741824
//   }

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mafs/ingest.hpp"
#include "mafs/planner.hpp"

namespace mafs {

struct SuiteInstance {
  std::string name;
  Task task;
};

struct SuiteConfig {
  PlannerConfig planner;
  std::string label;
};

struct Suite {
  std::vector<SuiteInstance> instances;
  std::vector<SuiteConfig> configs;
  std::vector<std::uint64_t> seeds{1};
};

namespace detail {
inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline GeneratorParams generator_params(const nlohmann::json& g, const std::string& path) {
  require_keys(g, path, {},
               {"domain", "agents", "locations", "packages", "length", "variables", "actions",
                "random_costs", "solvable", "seed"});
  GeneratorParams p;
  if (g.contains("domain")) p.domain = string_at(g["domain"], path + "/domain");
  if (g.contains("agents")) p.num_agents = static_cast<int>(int_at(g["agents"], path + "/agents"));
  if (g.contains("locations")) p.locations = static_cast<int>(int_at(g["locations"], path + "/locations"));
  if (g.contains("packages")) p.packages = static_cast<int>(int_at(g["packages"], path + "/packages"));
  if (g.contains("length")) p.length = static_cast<int>(int_at(g["length"], path + "/length"));
  if (g.contains("variables")) p.variables = static_cast<int>(int_at(g["variables"], path + "/variables"));
  if (g.contains("actions")) p.actions = static_cast<int>(int_at(g["actions"], path + "/actions"));
  if (g.contains("random_costs")) p.random_costs = g["random_costs"].get<bool>();
  if (g.contains("solvable")) p.solvable = g["solvable"].get<bool>();
  if (g.contains("seed")) p.seed = static_cast<std::uint64_t>(int_at(g["seed"], path + "/seed"));
  return p;
}
}  // namespace detail

inline Suite parse_suite(std::string_view text, const std::filesystem::path& base_dir = ".") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("", std::string("malformed JSON: ") + e.what());
  }
  detail::require_keys(j, "", {"instances", "configs"}, {"seeds", "timeout", "memory_limit"});
  Suite s;
  const auto& insts = detail::array_at(j["instances"], "/instances");
  for (std::size_t i = 0; i < insts.size(); ++i) {
    const std::string p = "/instances/" + std::to_string(i);
    detail::require_keys(insts[i], p, {"name"}, {"task", "generate", "partition"});
    SuiteInstance si;
    si.name = detail::string_at(insts[i]["name"], p + "/name");
    if (insts[i].contains("task") == insts[i].contains("generate"))
      throw SchemaError(p, "exactly one of 'task' and 'generate' is required");
    if (insts[i].contains("task")) {
      const auto file = base_dir / detail::string_at(insts[i]["task"], p + "/task");
      const std::string body = detail::slurp(file);
      si.task = file.extension() == ".sas" ? parse_sas(body) : load_task_json(body);
    } else {
      si.task = generate_instance(detail::generator_params(insts[i]["generate"], p + "/generate"));
    }
    if (insts[i].contains("partition"))
      si.task = parse_partition(
          detail::slurp(base_dir / detail::string_at(insts[i]["partition"], p + "/partition")), si.task);
    s.instances.push_back(std::move(si));
  }
  double timeout = 60.0;
  std::size_t memory = std::size_t{1} << 30;
  if (j.contains("timeout")) timeout = j["timeout"].get<double>();
  if (j.contains("memory_limit")) memory = j["memory_limit"].get<std::size_t>();
  const auto& cfgs = detail::array_at(j["configs"], "/configs");
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    const std::string p = "/configs/" + std::to_string(i);
    detail::require_keys(cfgs[i], p, {"algorithm"},
                         {"heuristic", "pruning", "privacy", "timing", "max_delay", "label"});
    SuiteConfig c;
    auto field = [&](const char* key, auto parse) {
      const std::string q = p + "/" + key;
      try {
        return parse(detail::string_at(cfgs[i][key], q));
      } catch (const std::invalid_argument& e) {
        throw SchemaError(q, e.what());
      }
    };
    c.planner.algorithm = field("algorithm", parse_algorithm);
    if (cfgs[i].contains("heuristic")) c.planner.heuristic = field("heuristic", parse_heuristic_kind);
    if (cfgs[i].contains("privacy")) c.planner.privacy = field("privacy", parse_privacy_mode);
    if (cfgs[i].contains("pruning")) {
      const auto pr = detail::string_at(cfgs[i]["pruning"], p + "/pruning");
      if (pr != "pb" && pr != "none") throw SchemaError(p + "/pruning", "expected 'pb' or 'none'");
      c.planner.pb_pruning = pr == "pb";
    }
    if (cfgs[i].contains("timing")) {
      const auto t = detail::string_at(cfgs[i]["timing"], p + "/timing");
      if (t != "lazy" && t != "eager") throw SchemaError(p + "/timing", "expected 'lazy' or 'eager'");
      c.planner.timing = t == "eager" ? SendTiming::kEager : SendTiming::kLazy;
    }
    if (cfgs[i].contains("max_delay"))
      c.planner.max_delay = static_cast<std::uint64_t>(detail::int_at(cfgs[i]["max_delay"], p + "/max_delay"));
    c.planner.timeout_seconds = timeout;
    c.planner.memory_limit_bytes = memory;
    c.label = cfgs[i].contains("label") ? detail::string_at(cfgs[i]["label"], p + "/label")
                                        : std::string(algorithm_name(c.planner.algorithm));
    s.configs.push_back(std::move(c));
  }
  if (j.contains("seeds")) {
    s.seeds.clear();
    for (const auto& x : detail::array_at(j["seeds"], "/seeds")) s.seeds.push_back(x.get<std::uint64_t>());
    if (s.seeds.empty()) throw SchemaError("/seeds", "no seeds");
  }
  return s;
}

struct DominanceCheck {
  std::string instance;
  std::uint64_t seed = 0;
  std::string heuristic;
  std::uint64_t astar = 0;
  std::uint64_t ppastar = 0;
  bool holds() const { return ppastar <= astar; }
};

struct AggregateRow {
  std::string config;
  std::size_t solved = 0;
  std::size_t cells = 0;
  double geomean_seconds = 0;  // over solved cells
  std::uint64_t total_messages = 0;
};

struct BenchReport {
  std::vector<RunReport> rows;
  std::vector<std::string> labels;  // config label per row
  std::vector<bool> revalidated;    // plan file read back and checked
  std::vector<DominanceCheck> dominance;
  std::vector<AggregateRow> aggregates;
};

// Runs every cell. When plans_dir is set, each solved plan is written there
// and the row only counts as valid if the file reads back into a valid plan.
inline BenchReport run_bench(const Suite& suite, const std::filesystem::path& plans_dir = {}) {
  BenchReport rep;
  if (!plans_dir.empty()) std::filesystem::create_directories(plans_dir);
  for (const auto& inst : suite.instances) {
    const Classification cls = classify(inst.task);
    for (std::uint64_t seed : suite.seeds) {
      const std::size_t first_row = rep.rows.size();
      for (const auto& cfg : suite.configs) {
        PlannerConfig pc = cfg.planner;
        pc.seed = seed;
        RunReport r;
        try {
          r = run_planner(inst.task, cls, pc, inst.name);
        } catch (const std::exception& e) {
          // a cell never takes the suite down with it
          r.instance = inst.name;
          r.algorithm = algorithm_name(pc.algorithm);
          r.heuristic = heuristic_name(pc.effective_heuristic());
          r.agents = inst.task.num_agents();
          r.seed = seed;
          r.outcome = Outcome::kRunning;
          std::cerr << "cell " << inst.name << "/" << cfg.label << " failed: " << e.what() << "\n";
        }
        bool ok = r.outcome != Outcome::kSolved || r.plan_valid;
        if (r.outcome == Outcome::kSolved && !plans_dir.empty()) {
          const auto file = plans_dir / (inst.name + "__" + cfg.label + "__" + std::to_string(seed) + ".plan");
          {
            std::ofstream out(file);
            out << format_plan(inst.task, r.plan);
          }
          const PlanCheck again = validate_plan(inst.task, parse_plan(detail::slurp(file), inst.task));
          ok = again.valid && r.cost && again.cost == *r.cost;
        }
        rep.rows.push_back(std::move(r));
        rep.labels.push_back(cfg.label);
        rep.revalidated.push_back(ok);
      }
      // efficiency and dominance within this (instance, seed) block
      const RunReport* central = nullptr;
      for (std::size_t i = first_row; i < rep.rows.size(); ++i)
        if (rep.rows[i].algorithm == "astar" && rep.rows[i].outcome == Outcome::kSolved) {
          central = &rep.rows[i];
          break;
        }
      for (std::size_t i = first_row; i < rep.rows.size(); ++i) {
        auto& r = rep.rows[i];
        if (central && (r.algorithm == "mafs" || r.algorithm == "mad-astar") &&
            r.outcome == Outcome::kSolved && r.seconds > 0)
          r.efficiency = (central->seconds / r.seconds) / r.agents;
      }
      for (std::size_t i = first_row; i < rep.rows.size(); ++i) {
        const Outcome done = rep.rows[i].outcome;
        if (rep.rows[i].algorithm != "astar" || (done != Outcome::kSolved && done != Outcome::kUnsolvable))
          continue;
        for (std::size_t k = first_row; k < rep.rows.size(); ++k) {
          const auto& pp = rep.rows[k];
          if (pp.algorithm != "pp-astar" || pp.heuristic != rep.rows[i].heuristic || pp.outcome != done)
            continue;
          rep.dominance.push_back(
              {inst.name, seed, pp.heuristic, rep.rows[i].total_expansions(), pp.total_expansions()});
        }
      }
    }
  }
  for (const auto& cfg : suite.configs) {
    AggregateRow a;
    a.config = cfg.label;
    double log_sum = 0;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
      if (rep.labels[i] != cfg.label) continue;
      ++a.cells;
      a.total_messages += rep.rows[i].messages;
      if (rep.rows[i].outcome == Outcome::kSolved) {
        ++a.solved;
        log_sum += std::log(std::max(rep.rows[i].seconds, 1e-6));
      }
    }
    if (a.solved) a.geomean_seconds = std::exp(log_sum / static_cast<double>(a.solved));
    rep.aggregates.push_back(a);
  }
  return rep;
}

inline nlohmann::ordered_json bench_json(const BenchReport& b) {
  nlohmann::ordered_json j;
  j["rows"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < b.rows.size(); ++i) {
    auto r = report_json(b.rows[i]);
    r["config"] = b.labels[i];
    r["revalidated"] = static_cast<bool>(b.revalidated[i]);
    j["rows"].push_back(std::move(r));
  }
  j["aggregates"] = nlohmann::ordered_json::array();
  for (const auto& a : b.aggregates)
    j["aggregates"].push_back({{"config", a.config},
                               {"cells", a.cells},
                               {"solved", a.solved},
                               {"geomean_seconds", a.geomean_seconds},
                               {"total_messages", a.total_messages}});
  auto& d = j["dominance"];
  d = nlohmann::ordered_json::object();
  std::size_t holds = 0, strict = 0;
  d["pairs"] = nlohmann::ordered_json::array();
  for (const auto& c : b.dominance) {
    holds += c.holds();
    strict += c.ppastar < c.astar;
    d["pairs"].push_back({{"instance", c.instance},
                          {"seed", c.seed},
                          {"heuristic", c.heuristic},
                          {"astar", c.astar},
                          {"pp_astar", c.ppastar},
                          {"holds", c.holds()}});
  }
  d["checked"] = b.dominance.size();
  d["holds"] = holds;
  d["strictly_fewer"] = strict;
  return j;
}

inline std::string bench_table(const BenchReport& b) {
  std::ostringstream out;
  auto row = [&](const std::vector<std::string>& cells) {
    static constexpr int kWidth[] = {18, 12, 9, 6, 11, 8, 10, 12, 10, 10};
    for (std::size_t i = 0; i < cells.size(); ++i)
      out << (i < 1 ? std::left : std::right) << std::setw(kWidth[i]) << cells[i] << (i + 1 < cells.size() ? " " : "");
    out << "\n";
  };
  auto fixed = [](double v, int prec) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(prec) << v;
    return s.str();
  };
  row({"instance", "config", "heur", "agents", "outcome", "cost", "time(s)", "expanded", "messages",
       "efficiency"});
  for (std::size_t i = 0; i < b.rows.size(); ++i) {
    const auto& r = b.rows[i];
    row({r.instance, b.labels[i], r.heuristic, std::to_string(r.agents),
         r.outcome == Outcome::kRunning ? "error" : outcome_name(r.outcome),
         r.cost ? std::to_string(*r.cost) : "-", fixed(r.seconds, 3),
         std::to_string(r.total_expansions()), std::to_string(r.messages),
         r.efficiency ? fixed(*r.efficiency, 2) : "-"});
  }
  out << "\n";
  for (const auto& a : b.aggregates)
    out << std::left << std::setw(12) << a.config << " solved " << a.solved << "/" << a.cells
        << "  geo-mean time " << fixed(a.geomean_seconds, 4) << " s  total messages "
        << a.total_messages << "\n";
  if (!b.dominance.empty()) {
    std::size_t holds = 0, strict = 0;
    for (const auto& c : b.dominance) {
      holds += c.holds();
      strict += c.ppastar < c.astar;
    }
    out << "pp-astar <= astar expansions on " << holds << "/" << b.dominance.size()
        << " pairs, strictly fewer on " << strict << "\n";
  }
  return out.str();
}

}  // namespace mafs
