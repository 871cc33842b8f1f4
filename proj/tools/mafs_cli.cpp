// mafs: generate, classify, plan, validate, oracle, bench, serve-agent.

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "mafs/bench.hpp"
#include "mafs/ingest.hpp"
#include "mafs/oracle.hpp"
#include "mafs/planner.hpp"
#include "mafs/tcp_transport.hpp"
#include "mafs/validate.hpp"

extern char** environ;

namespace fs = std::filesystem;
using namespace mafs;

namespace {

std::string read_file(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  return detail::slurp(path);
}

void write_file(const std::string& path, const std::string& body) {
  if (path.empty() || path == "-") {
    std::cout << body;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << body;
}

struct TaskSource {
  std::string path;
  std::string partition;
  bool sas = false;

  void add(CLI::App* app) {
    app->add_option("task", path, "task file (JSON, or SAS+ with --sas or a .sas extension)")->required();
    app->add_option("--partition", partition, "partition JSON assigning actions to agents");
    app->add_flag("--sas", sas, "read the task as a SAS+ translator file");
  }

  Task load() const {
    const std::string body = read_file(path);
    Task t = sas || fs::path(path).extension() == ".sas" ? parse_sas(body) : load_task_json(body);
    if (!partition.empty()) t = parse_partition(read_file(partition), t);
    return t;
  }
};

struct PlanOptions {
  std::string algorithm = "mad-astar";
  std::string heuristic;
  std::string transport = "sim";
  std::string privacy = "plain";
  std::string pruning = "pb";
  std::string roster;
  std::uint64_t seed = 1;
  double timeout = 60.0;
  std::size_t memory_limit = std::size_t{1} << 30;
  bool eager = false;
  bool robustness = false;
  std::uint64_t max_delay = 3;

  void add(CLI::App* app) {
    app->add_option("--algorithm", algorithm)
        ->check(CLI::IsMember({"mafs", "mad-astar", "astar", "pp-astar"}))
        ->capture_default_str();
    app->add_option("--heuristic", heuristic, "hmax|hadd|ff|goalcount|blind")
        ->check(CLI::IsMember({"hmax", "hadd", "ff", "goalcount", "blind"}));
    app->add_option("--seed", seed)->capture_default_str();
    app->add_option("--timeout", timeout, "seconds")->capture_default_str();
    app->add_option("--memory-limit", memory_limit, "bytes")->capture_default_str();
    app->add_option("--privacy", privacy)
        ->check(CLI::IsMember({"plain", "token", "multi-token"}))
        ->capture_default_str();
    app->add_option("--pruning", pruning, "pp-astar pruning rule")
        ->check(CLI::IsMember({"pb", "none"}))
        ->capture_default_str();
    app->add_flag("--eager", eager, "send states when generated instead of when expanded");
    app->add_flag("--robustness", robustness, "track participating agents");
    app->add_option("--max-delay", max_delay, "simulated network delay bound (ticks)")->capture_default_str();
  }

  PlannerConfig config() const {
    PlannerConfig c;
    c.algorithm = parse_algorithm(algorithm);
    if (!heuristic.empty()) c.heuristic = parse_heuristic_kind(heuristic);
    c.pb_pruning = pruning == "pb";
    c.seed = seed;
    c.timeout_seconds = timeout;
    c.memory_limit_bytes = memory_limit;
    c.privacy = parse_privacy_mode(privacy);
    c.timing = eager ? SendTiming::kEager : SendTiming::kLazy;
    c.max_delay = max_delay;
    c.robustness = robustness;
    return c;
  }
};

// Addresses by agent, from the roster (a partition JSON with address fields)
// or from the task's own agent table.
std::vector<std::string> roster_addresses(const Task& task, const std::string& roster) {
  std::vector<std::string> out(task.num_agents());
  if (!roster.empty()) {
    const auto rules = load_partition_json(read_file(roster));
    for (const auto& r : rules) {
      AgentId k = -1;
      for (AgentId a = 0; a < task.num_agents(); ++a)
        if (task.agents[a].name == r.name) k = a;
      if (k < 0) throw SchemaError("/agents", "roster names unknown agent '" + r.name + "'");
      if (!r.address) throw SchemaError("/agents", "roster entry '" + r.name + "' has no address");
      out[k] = *r.address;
    }
  } else {
    for (AgentId a = 0; a < task.num_agents(); ++a)
      if (task.agents[a].address) out[a] = *task.agents[a].address;
  }
  for (AgentId a = 0; a < task.num_agents(); ++a)
    if (out[a].empty()) throw SchemaError("/agents", "no address for agent '" + task.agents[a].name + "'");
  return out;
}

// ---------------------------------------------------------------------------

int cmd_gen(const GeneratorParams& p, const std::string& out) {
  write_file(out, dump_task_json(generate_instance(p)) + "\n");
  return 0;
}

int cmd_classify(const Task& task) {
  const Classification cls = classify(task);
  nlohmann::ordered_json j;
  j["agents"] = nlohmann::ordered_json::array();
  for (AgentId k = 0; k < task.num_agents(); ++k) {
    nlohmann::ordered_json a;
    a["name"] = task.agents[k].name;
    a["private_variables"] = nlohmann::ordered_json::array();
    for (VarId v : cls.private_vars(k)) a["private_variables"].push_back(task.variables[v].name);
    std::size_t pub = 0, priv = 0;
    for (ActionId x = 0; x < task.num_actions(); ++x)
      if (task.actions[x].owner == k) (cls.action_public[x] ? pub : priv)++;
    a["public_actions"] = pub;
    a["private_actions"] = priv;
    j["agents"].push_back(std::move(a));
  }
  j["public_variables"] = nlohmann::ordered_json::array();
  for (VarId v : cls.public_vars()) j["public_variables"].push_back(task.variables[v].name);
  j["public_actions"] = nlohmann::ordered_json::array();
  for (ActionId x = 0; x < task.num_actions(); ++x)
    if (cls.action_public[x]) j["public_actions"].push_back(task.actions[x].name);
  auto fact_json = [&](const Fact& f) {
    return nlohmann::ordered_json{{"variable", task.variables[f.var].name}, {"value", f.val}};
  };
  j["untouched_facts"] = nlohmann::ordered_json::array();
  for (const auto& f : cls.untouched_facts) j["untouched_facts"].push_back(fact_json(f));
  j["goal_only_facts"] = nlohmann::ordered_json::array();
  for (const auto& f : cls.goal_only_facts) {
    j["goal_only_facts"].push_back(fact_json(f));
    std::cerr << "warning: goal fact " << task.variables[f.var].name << "=" << f.val
              << " is touched by no action\n";
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

void emit_result(const Task& task, const RunReport& rep, const std::string& plan_out,
                 const std::string& report_out) {
  if (rep.outcome == Outcome::kSolved) write_file(plan_out, format_plan(task, rep.plan));
  if (!report_out.empty()) write_file(report_out, report_json(rep).dump(2) + "\n");
  std::cerr << rep.algorithm << ": " << outcome_name(rep.outcome);
  if (rep.cost) std::cerr << ", cost " << *rep.cost;
  std::cerr << ", " << rep.total_expansions() << " expansions, " << rep.messages << " messages, "
            << rep.seconds << " s\n";
}

// Socket mode: one serve-agent process per agent on auto-assigned loopback
// ports (or on the roster's addresses), then collect agent 0's report.
RunReport plan_over_tcp(const Task& task, const PlanOptions& opt) {
  if (!is_distributed(parse_algorithm(opt.algorithm)))
    throw std::invalid_argument("--transport tcp needs mafs or mad-astar");
  const fs::path dir = fs::temp_directory_path() /
                       ("mafs-" + std::to_string(::getpid()) + "-" + std::to_string(opt.seed));
  fs::create_directories(dir);
  Task deployed = task;
  if (!opt.roster.empty()) {
    const auto addrs = roster_addresses(task, opt.roster);
    for (AgentId k = 0; k < task.num_agents(); ++k) deployed.agents[k].address = addrs[k];
  } else {
    for (auto& a : deployed.agents) a.address = "127.0.0.1:" + std::to_string(pick_free_port());
  }
  const std::string task_file = (dir / "task.json").string();
  write_file(task_file, dump_task_json(deployed));

  const PlannerConfig cfg = opt.config();
  std::vector<pid_t> pids;
  for (AgentId k = 0; k < task.num_agents(); ++k) {
    std::vector<std::string> args = {"mafs",
                                     "serve-agent",
                                     task_file,
                                     "--agent",
                                     std::to_string(k),
                                     "--algorithm",
                                     opt.algorithm,
                                     "--heuristic",
                                     heuristic_name(cfg.effective_heuristic()),
                                     "--privacy",
                                     opt.privacy,
                                     "--seed",
                                     std::to_string(opt.seed),
                                     "--timeout",
                                     std::to_string(opt.timeout),
                                     "--report",
                                     (dir / ("agent" + std::to_string(k) + ".json")).string()};
    if (opt.eager) args.push_back("--eager");
    if (opt.robustness) args.push_back("--robustness");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    pid_t pid = 0;
    if (::posix_spawn(&pid, "/proc/self/exe", nullptr, nullptr, argv.data(), environ) != 0)
      throw std::runtime_error("cannot spawn serve-agent");
    pids.push_back(pid);
  }
  bool failed = false;
  for (pid_t pid : pids) {
    int status = 0;
    ::waitpid(pid, &status, 0);
    if (!WIFEXITED(status) || (WEXITSTATUS(status) != 0 && WEXITSTATUS(status) != 10 &&
                               WEXITSTATUS(status) != 20 && WEXITSTATUS(status) != 30))
      failed = true;
  }
  if (failed) throw std::runtime_error("a serve-agent process failed (see its stderr)");

  RunReport rep;
  rep.algorithm = opt.algorithm;
  rep.heuristic = heuristic_name(cfg.effective_heuristic());
  rep.agents = task.num_agents();
  rep.seed = opt.seed;
  for (AgentId k = 0; k < task.num_agents(); ++k) {
    const auto j = nlohmann::json::parse(read_file((dir / ("agent" + std::to_string(k) + ".json")).string()));
    rep.expansions.push_back(j.at("expansions").get<std::uint64_t>());
    rep.messages += j.at("messages").get<std::uint64_t>();
    rep.bytes += j.at("bytes").get<std::uint64_t>();
    rep.seconds = std::max(rep.seconds, j.at("seconds").get<double>());
    if (k == 0) {
      const std::string out = j.at("outcome").get<std::string>();
      for (Outcome o : {Outcome::kSolved, Outcome::kUnsolvable, Outcome::kTimeout, Outcome::kMemory})
        if (out == outcome_name(o)) rep.outcome = o;
      for (const auto& name : j.at("plan")) {
        for (ActionId a = 0; a < task.num_actions(); ++a)
          if (task.actions[a].name == name.get<std::string>()) {
            rep.plan.push_back(a);
            break;
          }
      }
    }
  }
  if (rep.outcome == Outcome::kSolved) {
    const PlanCheck c = validate_plan(task, rep.plan);
    rep.plan_valid = c.valid;
    rep.cost = c.cost;
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  return rep;
}

int cmd_plan(const Task& task, const PlanOptions& opt, const std::string& plan_out,
             const std::string& report_out, const std::string& transport) {
  RunReport rep;
  if (transport == "tcp") {
    rep = plan_over_tcp(task, opt);
  } else {
    rep = run_planner(task, classify(task), opt.config());
  }
  if (rep.outcome == Outcome::kSolved && !rep.plan_valid)
    throw std::logic_error("planner returned an invalid plan");
  emit_result(task, rep, plan_out, report_out);
  return exit_code(rep.outcome);
}

int cmd_serve_agent(const Task& task, AgentId id, const PlanOptions& opt, const std::string& report_out) {
  const Classification cls = classify(task);
  const auto addresses = roster_addresses(task, opt.roster);
  const PlannerConfig pc = opt.config();
  if (!is_distributed(pc.algorithm)) throw std::invalid_argument("serve-agent runs mafs or mad-astar");
  AgentConfig ac;
  ac.mode = pc.algorithm == Algorithm::kMafs ? SearchMode::kSatisficing : SearchMode::kOptimal;
  ac.heuristic = pc.effective_heuristic();
  ac.privacy = pc.privacy;
  ac.timing = pc.timing;
  ac.robustness = pc.robustness;
  ac.seed = pc.seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(id);

  TcpEndpoint ep(id, addresses, 20.0, pc.robustness);
  ep.start();
  Agent agent(task, cls, id, ep, ac);
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  Outcome outcome = Outcome::kRunning;
  while (!agent.finished()) {
    if (!agent.step()) ep.wait(std::chrono::milliseconds(20));
    if (elapsed() > pc.timeout_seconds) {
      outcome = Outcome::kTimeout;
      break;
    }
    if (resident_bytes() > pc.memory_limit_bytes) {
      outcome = Outcome::kMemory;
      break;
    }
  }
  if (agent.finished()) outcome = agent.outcome();
  const double seconds = elapsed();
  ep.close();

  nlohmann::ordered_json j;
  j["agent"] = task.agents[id].name;
  j["outcome"] = outcome_name(outcome);
  j["plan"] = nlohmann::ordered_json::array();
  for (ActionId a : agent.plan()) j["plan"].push_back(task.actions[a].name);
  j["expansions"] = agent.stats().expansions;
  j["messages"] = ep.stats().messages_sent;
  j["bytes"] = ep.stats().bytes_sent;
  j["seconds"] = seconds;
  write_file(report_out, j.dump(2) + "\n");
  return exit_code(outcome);
}

int cmd_validate(const Task& task, const std::string& plan_path) {
  const PlanCheck c = validate_plan(task, parse_plan(read_file(plan_path), task));
  if (c.valid) {
    std::cout << "valid, cost " << c.cost << "\n";
    return 0;
  }
  if (c.failed_step)
    std::cout << "invalid at step " << *c.failed_step << ": " << c.reason << "\n";
  else
    std::cout << "invalid: " << c.reason << "\n";
  return 1;
}

int cmd_oracle(const Task& task, std::size_t limit, const std::string& plan_out) {
  const OracleResult r = oracle_optimal_cost(task, limit);
  switch (r.status) {
    case OracleStatus::kSolved:
      std::cout << "cost " << r.cost << " (" << r.states << " states)\n";
      if (!plan_out.empty()) write_file(plan_out, format_plan(task, r.plan));
      return 0;
    case OracleStatus::kUnsolvable:
      std::cout << "unsolvable (" << r.states << " states)\n";
      return 10;
    case OracleStatus::kTooLarge:
      std::cout << "too large (more than " << limit << " states)\n";
      return 30;
  }
  return 1;
}

int cmd_bench(const std::string& suite_path, const std::string& json_out, const std::string& plans_dir) {
  const Suite suite = parse_suite(read_file(suite_path), fs::path(suite_path).parent_path());
  const BenchReport rep = run_bench(suite, plans_dir);
  std::cout << bench_table(rep);
  if (!json_out.empty()) write_file(json_out, bench_json(rep).dump(2) + "\n");
  for (bool ok : rep.revalidated)
    if (!ok) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent forward search planner"};
  app.require_subcommand(1);

  GeneratorParams gen;
  bool unsolvable = false;
  std::string gen_out = "-";
  auto* g = app.add_subcommand("gen", "generate a task");
  g->add_option("--domain", gen.domain)->check(CLI::IsMember({"logistics", "chain", "random"}))->capture_default_str();
  g->add_option("--agents", gen.num_agents)->capture_default_str();
  g->add_option("--locations", gen.locations, "logistics: locations per truck")->capture_default_str();
  g->add_option("--packages", gen.packages, "logistics")->capture_default_str();
  g->add_option("--length", gen.length, "chain: steps")->capture_default_str();
  g->add_option("--variables", gen.variables, "random: public variables")->capture_default_str();
  g->add_option("--actions", gen.actions, "random: public actions per agent")->capture_default_str();
  g->add_flag("--random-costs", gen.random_costs);
  g->add_flag("--unsolvable", unsolvable);
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("-o,--output", gen_out)->capture_default_str();

  TaskSource cls_src;
  auto* c = app.add_subcommand("classify", "report private and public facts, variables and actions");
  cls_src.add(c);

  TaskSource plan_src;
  PlanOptions plan_opt;
  std::string plan_out = "-", plan_report, transport = "sim";
  auto* p = app.add_subcommand("plan", "solve a task");
  plan_src.add(p);
  plan_opt.add(p);
  p->add_option("--transport", transport)->check(CLI::IsMember({"sim", "tcp"}))->capture_default_str();
  p->add_option("--roster", plan_opt.roster, "partition JSON with agent addresses (tcp)");
  p->add_option("-o,--plan", plan_out, "plan file")->capture_default_str();
  p->add_option("--report", plan_report, "RunReport JSON");

  TaskSource val_src;
  std::string val_plan;
  auto* v = app.add_subcommand("validate", "check a plan against a task");
  val_src.add(v);
  v->add_option("plan", val_plan)->required();

  TaskSource or_src;
  std::size_t or_limit = kDefaultStateLimit;
  std::string or_plan;
  auto* o = app.add_subcommand("oracle", "optimal cost by exhaustive uniform-cost search");
  or_src.add(o);
  o->add_option("--limit", or_limit, "state limit")->capture_default_str();
  o->add_option("-o,--plan", or_plan, "write an optimal plan");

  std::string suite_path, bench_json_out, bench_plans;
  auto* b = app.add_subcommand("bench", "run a benchmark suite");
  b->add_option("suite", suite_path)->required();
  b->add_option("--json", bench_json_out, "report JSON output");
  b->add_option("--plans", bench_plans, "directory for plan files");

  TaskSource srv_src;
  PlanOptions srv_opt;
  AgentId srv_id = 0;
  std::string srv_report = "-";
  auto* s = app.add_subcommand("serve-agent", "run one agent over TCP");
  srv_src.add(s);
  srv_opt.add(s);
  s->add_option("--agent", srv_id, "agent index")->required();
  s->add_option("--roster", srv_opt.roster, "partition JSON with agent addresses");
  s->add_option("--report", srv_report, "per-agent result JSON")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  ::signal(SIGPIPE, SIG_IGN);
  try {
    if (*g) {
      gen.solvable = !unsolvable;
      return cmd_gen(gen, gen_out);
    }
    if (*c) return cmd_classify(cls_src.load());
    if (*p) return cmd_plan(plan_src.load(), plan_opt, plan_out, plan_report, transport);
    if (*v) return cmd_validate(val_src.load(), val_plan);
    if (*o) return cmd_oracle(or_src.load(), or_limit, or_plan);
    if (*b) return cmd_bench(suite_path, bench_json_out, bench_plans);
    if (*s) {
      const Task t = srv_src.load();
      if (srv_id < 0 || srv_id >= t.num_agents()) throw std::invalid_argument("--agent out of range");
      return cmd_serve_agent(t, srv_id, srv_opt, srv_report);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
