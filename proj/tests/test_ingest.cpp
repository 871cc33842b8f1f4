#include <gtest/gtest.h>

#include "mafs/ingest.hpp"
#include "oracles.hpp"

using namespace mafs;

namespace {

std::string sas_file(int metric, int cost, const std::string& extra_op_lines = "") {
  return "begin_version\n3\nend_version\n"
         "begin_metric\n" + std::to_string(metric) + "\nend_metric\n"
         "1\n"
         "begin_variable\nvar0\n-1\n2\nAtom at(a)\nAtom at(b)\nend_variable\n"
         "0\n"
         "begin_state\n0\nend_state\n"
         "begin_goal\n1\n0 1\nend_goal\n"
         "1\n"
         "begin_operator\nmove a b\n0\n1\n" + extra_op_lines + "0 0 0 1\n" + std::to_string(cost) +
         "\nend_operator\n"
         "0\n";
}

// Two variables, a prevail condition and a mutex group.
const char* kTwoVarSas = R"(begin_version
3
end_version
begin_metric
1
end_metric
2
begin_variable
truck
-1
2
Atom at(t, a)
Atom at(t, b)
end_variable
begin_variable
pkg
-1
3
Atom at(p, a)
Atom at(p, b)
Atom in(p, t)
end_variable
1
begin_mutex_group
2
1 0
1 1
end_mutex_group
begin_state
0
0
end_state
begin_goal
1
1 1
end_goal
4
begin_operator
drive a b
0
1
0 0 0 1
3
end_operator
begin_operator
drive b a
0
1
0 0 1 0
3
end_operator
begin_operator
load a
1
0 0
1
0 1 0 2
1
end_operator
begin_operator
unload b
1
0 1
1
0 1 2 1
1
end_operator
0
)";

GeneratorParams chain_params() {
  GeneratorParams p;
  p.domain = "chain";
  p.num_agents = 1;
  p.length = 3;
  p.seed = 1;
  return p;
}

}  // namespace

TEST(Sas, OneVariableUnitCostWithoutMetric) {
  const Task t = parse_sas(sas_file(0, 7));
  ASSERT_EQ(t.num_actions(), 1);
  EXPECT_EQ(t.actions[0].cost, 1);
  EXPECT_EQ(t.actions[0].name, "move a b");
  EXPECT_EQ(t.actions[0].pre, (std::vector<Fact>{{0, 0}}));
  EXPECT_EQ(t.actions[0].eff, (std::vector<Fact>{{0, 1}}));
  EXPECT_EQ(t.num_agents(), 1);
}

TEST(Sas, MetricSelectsOperatorCost) {
  EXPECT_EQ(parse_sas(sas_file(1, 7)).actions[0].cost, 7);
}

TEST(Sas, PrevailFoldedAndMutexIgnored) {
  const Task t = parse_sas(kTwoVarSas);
  ASSERT_EQ(t.num_vars(), 2);
  ASSERT_EQ(t.num_actions(), 4);
  EXPECT_EQ(t.actions[2].pre, (std::vector<Fact>{{0, 0}, {1, 0}}));
  EXPECT_EQ(t.actions[2].eff, (std::vector<Fact>{{1, 2}}));
  EXPECT_EQ(oracle::optimal_cost(t), std::optional<Cost>(5));
}

TEST(Sas, UnconditionalEffectWithoutPrecondition) {
  std::string s = sas_file(0, 1);
  s.replace(s.find("0 0 0 1\n"), 8, "0 0 -1 1\n");
  const Task t = parse_sas(s);
  EXPECT_TRUE(t.actions[0].pre.empty());
  EXPECT_EQ(t.actions[0].eff, (std::vector<Fact>{{0, 1}}));
}

TEST(Sas, VersionOtherThanThreeUnsupported) {
  std::string s = sas_file(0, 1);
  s.replace(s.find("\n3\n"), 3, "\n4\n");
  EXPECT_THROW(parse_sas(s), UnsupportedError);
}

TEST(Sas, ConditionalEffectUnsupported) {
  std::string s = sas_file(0, 1);
  s.replace(s.find("0 0 0 1\n"), 8, "1 0 0 0 0 1\n");
  EXPECT_THROW(parse_sas(s), UnsupportedError);
}

TEST(Sas, MalformedSectionReportsLine) {
  std::string s = sas_file(0, 1);
  s.replace(s.find("begin_state"), 11, "begin_stat");
  try {
    parse_sas(s);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_GT(e.line(), 0);
  }
}

TEST(Sas, DumpOfParsedTaskRoundTrips) {
  const Task t = parse_sas(kTwoVarSas);
  const std::string once = dump_task_json(t);
  EXPECT_EQ(dump_task_json(load_task_json(once)), once);
}

TEST(Json, RoundTripOnGeneratorOutputs) {
  for (const char* d : {"logistics", "chain", "random"}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      GeneratorParams p;
      p.domain = d;
      p.num_agents = 2 + static_cast<int>(seed % 2);
      p.seed = seed;
      p.random_costs = seed % 2;
      const Task t = generate_instance(p);
      EXPECT_EQ(load_task_json(dump_task_json(t)), t);
    }
  }
}

TEST(Json, UnknownFieldRejectedWithPath) {
  auto j = nlohmann::json::parse(dump_task_json(generate_instance(chain_params())));
  j["actions"][0]["colour"] = "red";
  try {
    load_task_json(j.dump());
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.path(), "/actions/0/colour");
  }
}

TEST(Json, WrongTypeRejectedWithPath) {
  auto j = nlohmann::json::parse(dump_task_json(generate_instance(chain_params())));
  j["actions"][1]["cost"] = "cheap";
  try {
    load_task_json(j.dump());
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.path(), "/actions/1/cost");
  }
}

TEST(Partition, PrefixAndNameRulesAssignTrucks) {
  GeneratorParams p;
  p.num_agents = 2;
  const Task t = generate_instance(p);
  nlohmann::json rules = {{"agents",
                           {{{"name", "t1"}, {"address", "127.0.0.1:7001"}, {"actions", {{"prefixes", {"drive truck1"}}}}},
                            {{"name", "t2"}, {"actions", {{"prefixes", {"drive truck2"}}}}}}}};
  for (const auto& a : t.actions) {
    if (a.name.starts_with("drive")) continue;
    rules["agents"][a.name.find("truck1") != std::string::npos ? 0 : 1]["actions"]["names"].push_back(a.name);
  }
  const Task u = parse_partition(rules.dump(), t);
  ASSERT_EQ(u.num_agents(), 2);
  EXPECT_EQ(u.agents[0].name, "t1");
  EXPECT_EQ(u.agents[0].address, std::optional<std::string>("127.0.0.1:7001"));
  for (const auto& a : u.actions) EXPECT_EQ(a.owner, a.name.find("truck1") != std::string::npos ? 0 : 1) << a.name;
}

TEST(Partition, EmptyRulesRejected) {
  const Task t = generate_instance(chain_params());
  EXPECT_THROW(parse_partition(R"({"agents": []})", t), SchemaError);
}

TEST(Partition, UnmatchedActionsListed) {
  const Task t = generate_instance(chain_params());
  try {
    parse_partition(R"({"agents": [{"name": "a", "actions": {"names": ["step0"]}}]})", t);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("step1"), std::string::npos);
  }
}

TEST(Partition, AmbiguousMatchRejected) {
  const Task t = generate_instance(chain_params());
  EXPECT_THROW(parse_partition(R"({"agents": [{"name": "a", "actions": {"prefixes": ["st", "tog"]}},
                                              {"name": "b", "actions": {"prefixes": ["step"]}}]})",
                               t),
               SchemaError);
}

TEST(PlanFile, FormatParseRoundTrip) {
  const Task t = parse_sas(kTwoVarSas);
  const std::vector<ActionId> plan{2, 0, 3};
  const std::string text = format_plan(t, plan);
  EXPECT_NE(text.find("; cost = 5"), std::string::npos);
  EXPECT_EQ(parse_plan(text, t), plan);
  EXPECT_THROW(parse_plan("(fly away)\n", t), ParseError);
}

TEST(Generator, ChainOneAgentCostThree) {
  const Task t = generate_instance(chain_params());
  EXPECT_EQ(oracle::optimal_cost(t), std::optional<Cost>(3));
}

TEST(Generator, DeterministicPerSeed) {
  for (const char* d : {"logistics", "chain", "random"}) {
    GeneratorParams p;
    p.domain = d;
    p.num_agents = 3;
    p.seed = 11;
    p.random_costs = true;
    EXPECT_EQ(dump_task_json(generate_instance(p)), dump_task_json(generate_instance(p))) << d;
  }
}

TEST(Generator, SolvabilityFlagMatchesOracle) {
  for (const char* d : {"logistics", "chain", "random"}) {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      for (bool solvable : {true, false}) {
        GeneratorParams p;
        p.domain = d;
        p.num_agents = 1 + static_cast<int>(seed % 3);
        p.seed = seed;
        p.solvable = solvable;
        const Task t = generate_instance(p);
        EXPECT_EQ(oracle::optimal_cost(t).has_value(), solvable) << d << " seed " << seed;
      }
    }
  }
}

TEST(Generator, EveryAgentHasPrivateAction) {
  for (const char* d : {"logistics", "chain", "random"}) {
    GeneratorParams p;
    p.domain = d;
    p.num_agents = 3;
    p.seed = 5;
    const Task t = generate_instance(p);
    const Classification cls = classify(t);
    for (AgentId k = 0; k < t.num_agents(); ++k) {
      bool has_private = false;
      for (ActionId a = 0; a < t.num_actions(); ++a)
        has_private |= t.actions[a].owner == k && !cls.action_public[a];
      EXPECT_TRUE(has_private) << d << " agent " << k;
    }
  }
}

TEST(Generator, RejectsInfeasibleParameters) {
  GeneratorParams p;
  p.num_agents = 0;
  EXPECT_THROW(generate_instance(p), std::invalid_argument);
  p.num_agents = 2;
  p.domain = "sokoban";
  EXPECT_THROW(generate_instance(p), std::invalid_argument);
}
