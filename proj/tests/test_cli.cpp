#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <string>
#include <unistd.h>

#include "nlohmann/json.hpp"
#include "test_util.hpp"

using nlohmann::json;

// Black-box tests: every case here drives the installed binary through a
// shell, asserting only on exit codes, stdout, and produced files.

namespace {

std::string bin() { return std::string(CLI_BIN); }

std::string fixture(const std::string& name) {
  return std::string(FIXTURE_DIR) + "/" + name;
}

std::string tmp_path(const std::string& name) {
  return "/tmp/skcli-" + std::to_string(getpid()) + "-" + name;
}

testutil::CommandResult run(const std::string& args) {
  return testutil::run_command(bin() + " " + args + " 2>/dev/null");
}

}  // namespace

TEST_CASE("exit codes: usage errors are 2, runtime failures 1, success 0") {
  CHECK(run("").exit_code == 2);                    // a subcommand is required
  CHECK(run("frobnicate").exit_code == 2);          // unknown subcommand
  CHECK(run("analyze").exit_code == 2);             // missing --model
  CHECK(run("--help").exit_code == 0);
  // A path that cannot be opened is operator error (2); a file whose
  // *content* is malformed is a runtime finding (1, covered below).
  CHECK(run("analyze --model /no/such/file").exit_code == 2);
  CHECK(run("validate --model " + fixture("fig3.model")).exit_code == 0);
}

TEST_CASE("validate: clean model passes, malformed and violating ones fail") {
  testutil::CommandResult ok = run("validate --model " + fixture("fig3.model"));
  CHECK(ok.exit_code == 0);
  CHECK(ok.output.find("valid") != std::string::npos);

  json empty = json::parse(
      run("validate --json --model " + fixture("fig3.model")).output);
  CHECK(empty.is_array());
  CHECK(empty.empty());

  std::string bad = tmp_path("bad.model");
  testutil::write_file(bad, "{ this is not json");
  CHECK(run("validate --model " + bad).exit_code == 1);

  // Structurally broken: a module claimed by no service.
  std::string orphan = tmp_path("orphan.model");
  testutil::write_file(orphan, R"({
    "services": [{"id": "app", "kind": "monolith", "modules": []}],
    "modules": [{"id": "m1", "layer": "business-logic", "context": "X"}],
    "databases": [], "edges": [], "foreign_keys": [], "data_access": [],
    "endpoints": {}, "routes": []
  })");
  CHECK(run("validate --model " + orphan).exit_code == 1);
}

TEST_CASE("analyze: ranking and scores, human and machine output") {
  testutil::CommandResult human =
      run("analyze --model " + fixture("fig3.model"));
  CHECK(human.exit_code == 0);
  CHECK(human.output.find("extraction order") != std::string::npos);
  CHECK(human.output.find("1. A") != std::string::npos);

  testutil::CommandResult machine =
      run("analyze --json --model " + fixture("fig3.model"));
  CHECK(machine.exit_code == 0);
  json j = json::parse(machine.output);  // whole stdout is one JSON document
  CHECK(j.at("ranking") ==
        json::array({"A", "B", "C", "F", "D", "E"}));
  REQUIRE(j.at("scores").size() == 6);
  CHECK(j.at("scores")[0].at("context") == "A");
  CHECK(j.at("scores")[0].at("total") == 1);

  // Advisory context inference groups tightly coupled modules.
  json inferred = json::parse(
      run("analyze --json --infer-contexts --threshold 1 --model " +
          fixture("fig3.model"))
          .output);
  const json& labels = inferred.at("proposed_contexts");
  CHECK(labels.size() == 12);
  CHECK(labels.at("b-logic") == labels.at("c-logic"));
  CHECK(labels.at("a-logic") != labels.at("b-logic"));
}

TEST_CASE("plan: generation, file output, and validation failures") {
  testutil::CommandResult js =
      run("plan --json --model " + fixture("fig3.model") + " --target A");
  CHECK(js.exit_code == 0);
  json plan = json::parse(js.output);
  CHECK(plan.at("target") == "A");
  CHECK(plan.at("steps").size() == 12);

  std::string out = tmp_path("plan.json");
  testutil::CommandResult wrote =
      run("plan --model " + fixture("fig3.model") + " --target A -o " + out);
  CHECK(wrote.exit_code == 0);
  CHECK(json::parse(testutil::read_file(out)).at("steps").size() == 12);

  CHECK(run("plan --model " + fixture("fig3.model") + " --target Z")
            .exit_code == 1);
  CHECK(run("plan --model " + fixture("fig3.model") +
            " --target A --shift 50 --shift 10")
            .exit_code == 1);
}

TEST_CASE("apply and rollback: file round-trips restore the prior state") {
  std::string plan = tmp_path("rt-plan.json");
  REQUIRE(run("plan --model " + fixture("fig3.model") + " --target A -o " +
              plan)
              .exit_code == 0);

  std::string s2 = tmp_path("s2.model");
  std::string s3 = tmp_path("s3.model");
  std::string rb = tmp_path("rb.model");
  REQUIRE(run("apply --model " + fixture("fig3.model") + " --plan " + plan +
              " --step 2 -o " + s2)
              .exit_code == 0);
  REQUIRE(run("apply --model " + fixture("fig3.model") + " --plan " + plan +
              " --step 3 -o " + s3)
              .exit_code == 0);
  REQUIRE(run("rollback --model " + fixture("fig3.model") + " --plan " + plan +
              " --step 3 -o " + rb)
              .exit_code == 0);
  // Rolling back step 3 lands exactly on the step-2 state.
  CHECK(testutil::read_file(rb) == testutil::read_file(s2));
  CHECK(testutil::read_file(rb) != testutil::read_file(s3));

  // Every intermediate model is loadable and structurally valid.
  CHECK(run("validate --model " + s3).exit_code == 0);
}

TEST_CASE("simulate: baseline metrics and full-plan equivalence") {
  testutil::CommandResult base =
      run("simulate --json --model " + fixture("fig3.model") + " --trace " +
          fixture("fig3.trace"));
  CHECK(base.exit_code == 0);
  json rep = json::parse(base.output);
  json golden = json::parse(testutil::read_file(fixture("fig3.golden.json")));
  CHECK(rep.at("metrics") == golden.at("baseline"));

  std::string plan = tmp_path("sim-plan.json");
  REQUIRE(run("plan --model " + fixture("fig3.model") + " --target A -o " +
              plan)
              .exit_code == 0);
  testutil::CommandResult mig =
      run("simulate --model " + fixture("fig3.model") + " --trace " +
          fixture("fig3.trace") + " --plan " + plan);
  CHECK(mig.exit_code == 0);
  CHECK(mig.output.find("migration completed") != std::string::npos);
  CHECK(mig.output.find("DIVERGED") == std::string::npos);

  // Fault injection: the corrupted step diverges, rolls back, and exits 1.
  testutil::CommandResult corrupt =
      run("simulate --model " + fixture("fig3.model") + " --trace " +
          fixture("fig3.trace") + " --plan " + plan + " --corrupt-step 5");
  CHECK(corrupt.exit_code == 1);
  CHECK(corrupt.output.find("DIVERGED") != std::string::npos);
  CHECK(corrupt.output.find("rolled back") != std::string::npos);
  CHECK(corrupt.output.find("migration halted") != std::string::npos);

  // Machine output stays pure JSON even on failure.
  testutil::CommandResult corrupt_json =
      run("simulate --json --model " + fixture("fig3.model") + " --trace " +
          fixture("fig3.trace") + " --plan " + plan + " --corrupt-step 5");
  CHECK(corrupt_json.exit_code == 1);
  json cj = json::parse(corrupt_json.output);
  CHECK_FALSE(cj.at("completed").get<bool>());

  // Horizontal replicas leave the report unchanged; zero is rejected.
  testutil::CommandResult r3 =
      run("simulate --json --replicas 3 --model " + fixture("fig3.model") +
          " --trace " + fixture("fig3.trace"));
  CHECK(r3.output == base.output);
  CHECK(run("simulate --replicas 0 --model " + fixture("fig3.model") +
            " --trace " + fixture("fig3.trace"))
            .exit_code == 1);
}

TEST_CASE("seed precedence: flag beats environment beats default") {
  std::string simulate = " simulate --json --model " + fixture("fig3.model") +
                         " --trace " + fixture("fig3.trace");
  auto digests = [&](const std::string& prefix,
                     const std::string& extra) -> std::string {
    testutil::CommandResult r = testutil::run_command(
        prefix + bin() + simulate + extra + " 2>/dev/null");
    REQUIRE(r.exit_code == 0);
    json doc = json::parse(r.output);
    std::string joined;
    for (const auto& resp : doc.at("responses")) {
      joined += resp.at("digest").get<std::string>();
      joined += ",";
    }
    return joined;
  };

  std::string flag5 = digests("env -u STRANGLERKIT_SEED ", " --seed 5");
  std::string env5 = digests("STRANGLERKIT_SEED=5 ", "");
  std::string both = digests("STRANGLERKIT_SEED=9 ", " --seed 5");
  std::string dflt = digests("env -u STRANGLERKIT_SEED ", "");
  std::string zero = digests("env -u STRANGLERKIT_SEED ", " --seed 0");

  CHECK(flag5 == env5);   // environment supplies the same seed
  CHECK(flag5 == both);   // explicit flag wins over the environment
  CHECK(dflt == zero);    // default seed is zero
  CHECK(flag5 != dflt);   // seeds actually change the digests
}

TEST_CASE("db subcommands: sync status, cutover, and isolation verification") {
  CHECK(run("db sync-status --model " + fixture("fig3.model")).output ==
        "no replica databases\n");
  CHECK(run("db verify --model " + fixture("fig3.model")).exit_code == 0);

  // Build the state just after sync convergence (plan steps 1..7).
  std::string plan = tmp_path("db-plan.json");
  std::string synced = tmp_path("synced.model");
  REQUIRE(run("plan --model " + fixture("fig3.model") + " --target A -o " +
              plan)
              .exit_code == 0);
  REQUIRE(run("apply --model " + fixture("fig3.model") + " --plan " + plan +
              " --step 7 -o " + synced)
              .exit_code == 0);
  testutil::CommandResult status = run("db sync-status --model " + synced);
  CHECK(status.output.find("svc-a-db") != std::string::npos);
  CHECK(status.output.find("converged") != std::string::npos);

  std::string cut = tmp_path("cut.model");
  REQUIRE(run("db cutover --context A --model " + synced + " -o " + cut)
              .exit_code == 0);
  testutil::CommandResult verify = run("db verify --model " + cut);
  CHECK(verify.exit_code == 0);
  CHECK(verify.output.find("fully isolated") != std::string::npos);

  // Cutover without a converged replica fails.
  CHECK(run("db cutover --context A --model " + fixture("fig3.model") +
            " -o /dev/null")
            .exit_code == 1);

  // A model with a service reaching across database ownership fails verify.
  std::string crossing = tmp_path("crossing.model");
  testutil::write_file(crossing, R"({
    "services": [
      {"id": "core", "kind": "monolith", "modules": ["cmod"], "database": "coredb"},
      {"id": "svc-a", "kind": "extracted", "modules": ["amod"], "database": "adb"}
    ],
    "modules": [
      {"id": "cmod", "layer": "business-logic", "context": "core"},
      {"id": "amod", "layer": "business-logic", "context": "A"}
    ],
    "databases": [
      {"id": "coredb", "tables": [{"name": "t_core", "columns": ["id"], "primary_key": "id"}]},
      {"id": "adb", "tables": [{"name": "t_a", "columns": ["id"], "primary_key": "id"}]}
    ],
    "edges": [], "foreign_keys": [],
    "data_access": [["amod", "t_core"], ["cmod", "t_core"], ["amod", "t_a"]],
    "endpoints": {"/a": "amod"},
    "routes": [{"path_prefix": "/", "legacy_target": "core"}]
  })");
  testutil::CommandResult bad = run("db verify --model " + crossing);
  CHECK(bad.exit_code == 1);
  CHECK(bad.output.find("cross-database data access") != std::string::npos);
  json bad_json =
      json::parse(run("db verify --json --model " + crossing).output);
  REQUIRE(bad_json.size() == 1);
  CHECK(bad_json[0].at("subject") == "amod");
}
