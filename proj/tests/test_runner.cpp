#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <set>

#include "lcs/runner.hpp"

using namespace lcs;

namespace {

const Report& defaultPaperReport() {
  static const Report report = run(RunConfig{});
  return report;
}

const SectionResult* findSection(const Report& r, const std::string& name) {
  for (const SectionResult& s : r.sections)
    if (s.name == name) return &s;
  return nullptr;
}

}  // namespace

TEST_CASE("config parsing", "[runner]") {
  CHECK(parseConfig(json::parse(R"json({"preset":"paper"})json")).preset == "paper");
  CHECK_THROWS_AS(parseConfig(json::parse(R"json({"preset":"nope"})json")), std::invalid_argument);
  CHECK_THROWS_AS(parseConfig(json::parse(R"json({"sections":["identities","bogus"]})json")), std::invalid_argument);
  CHECK_THROWS_AS(parseConfig(json::parse(R"json({"caps":{"bogus_cap":3}})json")), std::invalid_argument);
  CHECK_THROWS_AS(parseConfig(json::parse(R"json({"unknown_top":1})json")), std::invalid_argument);
  CHECK_THROWS_AS(parseConfig(json::parse(R"json({"caps":{"class_cap":0}})json")), std::invalid_argument);
  CHECK_THROWS_AS(parseConfig(json::parse(R"json({"caps":{"class_cap":"seven"}})json")), std::invalid_argument);

  RunConfig cfg = parseConfig(json::parse(R"json({
    "group": {
      "rank": 2,
      "phi_images": ["y", "x*y^3"],
      "phi_inverse_images": ["y*x^-3", "x"],
      "presentation": ["a", "b"],
      "embedding": [{"gen": "a", "fiber": "x", "shift": 0},
                    {"gen": "b", "fiber": "1", "shift": 1}]
    },
    "caps": {"class_cap": 5},
    "sections": ["identities", "lcs"]
  })json"));
  CHECK(cfg.preset == "custom");
  CHECK(cfg.caps.classCap == 5);
  REQUIRE(cfg.custom.has_value());
  CHECK(cfg.custom->phiImages.size() == 2);
}

TEST_CASE("environment overrides", "[runner]") {
  Caps caps;
  setenv("LCS_CLASS_CAP", "5", 1);
  setenv("LCS_TENSOR_MAX", "6", 1);
  applyEnvOverrides(caps);
  unsetenv("LCS_CLASS_CAP");
  unsetenv("LCS_TENSOR_MAX");
  CHECK(caps.classCap == 5);
  CHECK(caps.tensorMax == 6);

  setenv("LCS_CLASS_CAP", "junk", 1);
  CHECK_THROWS_AS(applyEnvOverrides(caps), std::invalid_argument);
  unsetenv("LCS_CLASS_CAP");
}

TEST_CASE("default run passes every section", "[runner][slow]") {
  const Report& rep = defaultPaperReport();
  CHECK(rep.overall == "pass");
  CHECK(rep.sections.size() == 8);
  for (const SectionResult& s : rep.sections) {
    CAPTURE(s.name);
    CHECK(s.status == "pass");
  }
  CHECK(exitCode(rep) == 0);
}

TEST_CASE("exactly the two documented discrepancies are flagged", "[runner][slow]") {
  const Report& rep = defaultPaperReport();
  std::vector<std::string> flagged;
  for (const SectionResult& s : rep.sections)
    for (const CheckResult& c : s.checks)
      if (c.status == "flagged") flagged.push_back(c.name);
  REQUIRE(flagged.size() == 2);
  CHECK(flagged[0] == "tensor eigenvalue exponent range");
  CHECK(flagged[1] == "division direction");
}

TEST_CASE("claims match the documented list", "[runner][slow]") {
  const Report& rep = defaultPaperReport();
  std::set<std::string> seen;
  for (const SectionResult& s : rep.sections)
    for (const CheckResult& c : s.checks) seen.insert(c.claim);
  std::set<std::string> documented(documentedClaims().begin(), documentedClaims().end());
  CHECK(seen == documented);
}

TEST_CASE("reports are byte-deterministic", "[runner][slow]") {
  RunConfig cfg;
  cfg.sections = {"identities", "module", "norms", "homology", "witnesses"};
  std::string a = toJson(run(cfg), false).dump(2);
  std::string b = toJson(run(cfg), false).dump(2);
  CHECK(a == b);
}

TEST_CASE("contrast preset reports the violation as expected", "[runner]") {
  RunConfig cfg;
  cfg.preset = "contrast-resnilp-fail";
  cfg.sections = {"identities", "module"};
  Report rep = run(cfg);
  CHECK(rep.overall == "pass");
  CHECK(exitCode(rep) == 0);
  const SectionResult* module = findSection(rep, "module");
  REQUIRE(module);
  CHECK(module->status == "pass");
  bool sawViolation = false;
  for (const CheckResult& c : module->checks)
    if (c.data.contains("status") && c.data["status"] == "ViolationFound") sawViolation = true;
  CHECK(sawViolation);
}

TEST_CASE("tampered identities fail with exit code 1", "[runner]") {
  RunConfig cfg;
  GroupSpec spec;
  spec.rank = 2;
  spec.phiImages = {"y", "x*y^3"};
  spec.phiInverseImages = {{"y*x^-3", "x"}};
  spec.embedding = {{"a", "x", 0}, {"b", "1", 1}};
  spec.identities = {{"false commutation", "a*b", "b*a"}};
  cfg.preset = "custom";
  cfg.custom = spec;
  cfg.sections = {"identities"};
  Report rep = run(cfg);
  CHECK(rep.overall == "fail");
  CHECK(exitCode(rep) == 1);
  // the witness is the normal form of (ba)^-1 (ab)
  const CheckResult& check = rep.sections.at(0).checks.at(0);
  CHECK(check.status == "fail");
  CHECK(check.data["witness"] == "(x^-1*y, 0)");
}

TEST_CASE("resource limits downgrade sections to skipped", "[runner]") {
  RunConfig cfg;
  cfg.caps.exteriorSizeLimit = 1;  // even the 2x2 module checks cannot run
  cfg.sections = {"module"};
  Report rep = run(cfg);
  const SectionResult* module = findSection(rep, "module");
  REQUIRE(module);
  CHECK(module->status == "skipped");
  REQUIRE_FALSE(module->checks.empty());
  CHECK(module->checks.front().data.contains("diagnostic"));
  CHECK(rep.overall == "pass");  // skipped never silently passes a claim, and never fails the run
}

TEST_CASE("empty section list yields an empty passing report", "[runner]") {
  RunConfig cfg;
  cfg.sections = {};
  Report rep = run(cfg);
  CHECK(rep.sections.empty());
  CHECK(rep.overall == "pass");
  CHECK(exitCode(rep) == 0);
}

TEST_CASE("custom groups run the structural sections", "[runner]") {
  RunConfig cfg = parseConfig(json::parse(R"json({
    "group": {
      "rank": 2,
      "phi_images": ["y", "x*y^3"],
      "presentation": ["a", "b"],
      "embedding": [{"gen": "a", "fiber": "x", "shift": 0},
                    {"gen": "b", "fiber": "1", "shift": 1}],
      "identities": [{"name": "relation", "lhs": "a^(b^2)", "rhs": "a * a^3^b"}]
    },
    "caps": {"class_cap": 5},
    "sections": ["identities", "lcs"]
  })json"));
  Report rep = run(cfg);
  CHECK(rep.overall == "pass");
}

TEST_CASE("rank-3 groups skip the quadratic-only sections", "[runner]") {
  RunConfig cfg = parseConfig(json::parse(R"json({
    "group": {
      "rank": 3,
      "phi_images": ["x2", "x3", "x1*x2"],
      "presentation": ["a", "b"],
      "embedding": [{"gen": "a", "fiber": "x1", "shift": 0},
                    {"gen": "b", "fiber": "1", "shift": 1}]
    },
    "caps": {"class_cap": 4, "tensor_max": 3},
    "sections": ["tensor", "norms", "lcs"]
  })json"));
  Report rep = run(cfg);
  CHECK(rep.overall == "pass");
  CHECK(findSection(rep, "tensor")->checks.front().status == "skipped");
  CHECK(findSection(rep, "norms")->checks.front().status == "skipped");
  for (const CheckResult& c : findSection(rep, "lcs")->checks) CHECK(c.status == "pass");
}

TEST_CASE("json report shape", "[runner]") {
  RunConfig cfg;
  cfg.sections = {"norms"};
  Report rep = run(cfg);
  json with = toJson(rep, true);
  json without = toJson(rep, false);
  CHECK(with.contains("durations"));
  CHECK_FALSE(without.contains("durations"));
  CHECK(with["preset"] == "paper");
  CHECK(with["sections"][0]["name"] == "norms");
  CHECK(renderText(rep).find("norms") != std::string::npos);
}
