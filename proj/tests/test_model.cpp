#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "stranglerkit/hash.hpp"
#include "stranglerkit/model.hpp"
#include "test_util.hpp"

using namespace stranglerkit;

static std::string fixture(const char* name) {
  return testutil::read_file(std::string(FIXTURE_DIR) + "/" + name);
}

static bool has_violation(const std::vector<Violation>& vs,
                          const std::string& rule, const std::string& subject) {
  return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) {
    return v.rule == rule && v.subject == subject;
  });
}

TEST_CASE("hash: published test vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("hello") == 0xa430d84680aabd0bull);
}

TEST_CASE("hash: bucket is stable and in range") {
  for (int i = 0; i < 1000; ++i) {
    int b = bucket_of("key-" + std::to_string(i));
    CHECK(b >= 0);
    CHECK(b < 100);
    CHECK(b == bucket_of("key-" + std::to_string(i)));
  }
}

TEST_CASE("hash: digest fields are length-prefixed") {
  DigestBuilder one;
  one.add("ab");
  one.add("c");
  DigestBuilder two;
  two.add("a");
  two.add("bc");
  CHECK(one.value() != two.value());

  DigestBuilder seeded_a(1), seeded_b(2);
  seeded_a.add("x");
  seeded_b.add("x");
  CHECK(seeded_a.value() != seeded_b.value());
}

TEST_CASE("model: fixture round-trips through serialize/load") {
  SystemModel m = load_model(fixture("fig3.model"));
  CHECK(m.services.size() == 1);
  CHECK(m.modules.size() == 12);
  CHECK(m.databases.size() == 1);
  CHECK(m.databases[0].tables.size() == 8);
  CHECK(m.endpoints.size() == 6);

  SystemModel again = load_model(serialize(m));
  CHECK(again == m);
}

TEST_CASE("model: random models round-trip") {
  testutil::Rng rng(42);
  for (int i = 0; i < 25; ++i) {
    SystemModel m = testutil::random_model(rng);
    CHECK(validate(m).empty());
    SystemModel again = load_model(serialize(m));
    CHECK(again == m);
  }
}

TEST_CASE("model: malformed JSON raises a parse error") {
  CHECK_THROWS_WITH_AS(load_model("{nope"), doctest::Contains("ParseError"),
                       Error);
  CHECK_THROWS_AS(load_model("[1,2]"), Error);
  try {
    load_model("[]");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
  }
}

TEST_CASE("model: single-service documents default to a monolith") {
  SystemModel m = load_model(R"({
    "services": [{"id": "app", "modules": ["m"]}],
    "modules": [{"id": "m", "layer": "business-logic", "context": "core"}]
  })");
  CHECK(m.services[0].kind == ServiceKind::Monolith);

  SystemModel multi = load_model(R"({
    "services": [{"id": "app", "kind": "monolith", "modules": ["m"]},
                  {"id": "svc", "modules": ["n"]}],
    "modules": [{"id": "m", "layer": "business-logic", "context": "core"},
                 {"id": "n", "layer": "business-logic", "context": "other"}]
  })");
  CHECK(multi.services[1].kind == ServiceKind::Extracted);
}

// Each structural rule, triggered in isolation on a hand-built model.
TEST_CASE("validate: module membership rules") {
  SystemModel base = load_model(fixture("fig3.model"));

  SystemModel two = base;
  ServiceRecord extra;
  extra.id = "svc-x";
  extra.kind = ServiceKind::Extracted;
  extra.modules = {"a-logic"};
  two.services.push_back(extra);
  CHECK(has_violation(validate_structure(two), "module in two services",
                      "a-logic"));

  SystemModel orphan = base;
  orphan.modules.push_back(
      ModuleNode{"ghost", Layer::BusinessLogic, "A"});
  CHECK(has_violation(validate_structure(orphan), "module in no service",
                      "ghost"));

  SystemModel dup = base;
  dup.modules.push_back(dup.modules.front());
  CHECK(has_violation(validate_structure(dup), "duplicate module id",
                      dup.modules.front().id));
}

TEST_CASE("validate: database rules") {
  SystemModel base = load_model(fixture("fig3.model"));

  SystemModel twice = base;
  DatabaseRecord other;
  other.id = "otherdb";
  other.tables = {{"a_main", twice.databases[0].tables.at("a_main")}};
  twice.databases.push_back(other);
  twice.services[0].modules.push_back("extra");  // keep it the owner of monodb
  twice.services[0].modules.pop_back();
  // otherdb has no owner and duplicates a read-write table
  auto vs = validate_structure(twice);
  CHECK(has_violation(vs, "table in two databases", "a_main"));
  CHECK(has_violation(vs, "database unowned", "otherdb"));

  SystemModel replica_missing = base;
  DatabaseRecord rdb;
  rdb.id = "rdb";
  TableHosting h;
  h.def = TableDef{"phantom", {"id"}, "id", ""};
  h.mode = AccessMode::ReadOnlyReplica;
  rdb.tables.emplace("phantom", h);
  replica_missing.databases.push_back(rdb);
  CHECK(has_violation(validate_structure(replica_missing),
                      "replica of missing table", "phantom"));

  SystemModel mismatch = base;
  DatabaseRecord rdb2;
  rdb2.id = "rdb2";
  TableHosting h2 = base.databases[0].tables.at("a_main");
  h2.mode = AccessMode::ReadOnlyReplica;
  h2.def.columns.push_back("drift");
  rdb2.tables.emplace("a_main", h2);
  mismatch.databases.push_back(rdb2);
  CHECK(has_violation(validate_structure(mismatch), "replica mismatch",
                      "a_main"));

  SystemModel pk = base;
  pk.databases[0].tables.at("a_main").def.primary_key = "nope";
  CHECK(has_violation(validate_structure(pk), "primary key not a column",
                      "a_main"));

  SystemModel dupcol = base;
  dupcol.databases[0].tables.at("a_main").def.columns = {"id", "id"};
  CHECK(has_violation(validate_structure(dupcol), "duplicate column",
                      "a_main"));
}

TEST_CASE("validate: edge rules") {
  SystemModel base = load_model(fixture("fig3.model"));

  SystemModel self = base;
  self.edges.push_back(CallEdge{"a-ui", "a-ui", EdgeKind::Local, 1});
  CHECK(has_violation(validate_structure(self), "self edge", "a-ui->a-ui"));

  SystemModel zero = base;
  zero.edges[0].weight = 0;
  CHECK(has_violation(validate_structure(zero), "nonpositive edge weight",
                      "a-ui->a-logic"));

  SystemModel api = base;
  api.edges[0].kind = EdgeKind::Api;
  CHECK(has_violation(validate_structure(api), "api edge within service",
                      "a-ui->a-logic"));

  SystemModel ghost = base;
  ghost.edges.push_back(CallEdge{"a-ui", "ghost", EdgeKind::Local, 1});
  CHECK(has_violation(validate_structure(ghost), "unknown reference",
                      "a-ui->ghost"));
}

TEST_CASE("validate: foreign key and route rules") {
  SystemModel base = load_model(fixture("fig3.model"));

  SystemModel badcol = base;
  badcol.foreign_keys[0].from_column = "nope";
  CHECK(has_violation(validate_structure(badcol), "foreign key column missing",
                      "a_audit.nope->a_main"));

  SystemModel dup_route = base;
  dup_route.routes.push_back(dup_route.routes[0]);
  CHECK(has_violation(validate_structure(dup_route), "duplicate route prefix",
                      "/"));

  SystemModel shift = base;
  shift.routes[0].shift_percent = 40;  // no extracted target
  CHECK(has_violation(validate_structure(shift),
                      "shift without extracted target", "/"));

  SystemModel pct = base;
  pct.routes[0].shift_percent = 101;
  CHECK(has_violation(validate_structure(pct), "invalid shift percent", "/"));

  SystemModel ep = base;
  ep.endpoints["/zz"] = "ghost";
  CHECK(has_violation(validate_structure(ep), "endpoint module missing",
                      "/zz"));
}

TEST_CASE("validate: load_model rejects structurally invalid documents") {
  std::string doc = fixture("fig3.model");
  SystemModel m = load_model(doc);
  m.modules.push_back(ModuleNode{"ghost", Layer::BusinessLogic, "A"});
  try {
    load_model(serialize(m));
    FAIL("expected validation to reject the orphan module");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ValidationError);
    CHECK(std::string(e.what()).find("module in no service") !=
          std::string::npos);
  }
}

TEST_CASE("isolation: flags cross-database access and database-layer keys") {
  SystemModel m = load_model(R"({
    "services": [
      {"id": "monolith", "kind": "monolith", "modules": ["legacy"], "database": "monodb"},
      {"id": "svc-a", "kind": "extracted", "modules": ["amod"], "database": "adb"}
    ],
    "modules": [
      {"id": "legacy", "layer": "business-logic", "context": "core"},
      {"id": "amod", "layer": "business-logic", "context": "A"}
    ],
    "databases": [
      {"id": "monodb", "tables": [
        {"name": "t_core", "columns": ["id", "a_id"], "primary_key": "id"}]},
      {"id": "adb", "tables": [
        {"name": "t_a", "columns": ["id"], "primary_key": "id"}]}
    ],
    "data_access": [["legacy", "t_core"], ["amod", "t_a"]]
  })");
  CHECK(isolation_violations(m).empty());

  SystemModel crossing = m;
  crossing.data_access.insert({"amod", "t_core"});
  auto vs = isolation_violations(crossing);
  REQUIRE(vs.size() == 1);
  CHECK(vs[0].rule == "cross-database data access");
  CHECK(vs[0].subject == "amod");

  SystemModel fk = m;
  fk.foreign_keys.push_back(
      ForeignKey{"t_core", "a_id", "t_a", Enforcement::DatabaseLayer});
  auto fkvs = isolation_violations(fk);
  REQUIRE(fkvs.size() == 1);
  CHECK(fkvs[0].rule == "cross-database foreign key");
  CHECK(fkvs[0].subject == "t_core.a_id->t_a");

  // Hoisted to the business-logic layer, the same key is legal.
  fk.foreign_keys[0].enforcement = Enforcement::BusinessLogicLayer;
  CHECK(isolation_violations(fk).empty());

  // A read-only replica hosting is the sanctioned exemption.
  SystemModel replica = crossing;
  TableHosting h = replica.databases[0].tables.at("t_core");
  h.mode = AccessMode::ReadOnlyReplica;
  replica.databases[1].tables.emplace("t_core", h);
  CHECK(isolation_violations(replica).empty());
}

TEST_CASE("trace: fixture loads and binds") {
  SystemModel m = load_model(fixture("fig3.model"));
  WorkloadTrace t = load_trace(fixture("fig3.trace"));
  CHECK(t.size() == 24);
  CHECK(validate_trace(m, t).empty());

  WorkloadTrace unbound = t;
  unbound[0].endpoint = "/nope";
  auto vs = validate_trace(m, unbound);
  REQUIRE(vs.size() == 1);
  CHECK(vs[0].rule == "unbound endpoint");
}

TEST_CASE("trace: sequence numbers must strictly increase") {
  CHECK_THROWS_AS(
      load_trace(R"([
        {"seq": 2, "endpoint": "/a", "key": "k", "op": "read", "table": "t", "row_key": "r"},
        {"seq": 2, "endpoint": "/a", "key": "k", "op": "read", "table": "t", "row_key": "r"}
      ])"),
      Error);
  CHECK_THROWS_AS(load_trace(R"([{"seq": -1}])"), Error);
  CHECK(load_trace("[]").empty());
}
