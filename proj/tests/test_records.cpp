#include <doctest.h>

#include <string>
#include <vector>

#include "fairaudit/error.hpp"
#include "fairaudit/records.hpp"
#include "testutil.hpp"

using namespace fairaudit;
using testutil::rec;

TEST_CASE("prediction set validates records") {
  CHECK_THROWS_AS(PredictionSet("m", {rec("", 0.5, 0)}), AuditError);
  CHECK_THROWS_AS(PredictionSet("m", {rec("a", 1.5, 0)}), AuditError);
  CHECK_THROWS_AS(PredictionSet("m", {rec("a", -0.1, 0)}), AuditError);
  CHECK_THROWS_AS(PredictionSet("m", {rec("a", 0.5, 2)}), AuditError);
  CHECK_THROWS_AS(PredictionSet("m", {rec("a", 0.5, 0, "")}), AuditError);
  CHECK_THROWS_AS(PredictionSet("m", {rec("a", 0.5, 0), rec("a", 0.6, 1)}), AuditError);
  CHECK_THROWS_AS(PredictionSet("", {rec("a", 0.5, 0)}), AuditError);
  CHECK_NOTHROW(PredictionSet("m", {rec("a", 0.0, 0), rec("b", 1.0, 1)}));
}

TEST_CASE("pairing accepts aligned sets and names the first mismatch") {
  PairedPredictions paired;
  paired.add(PredictionSet("a", {rec("r1", 0.2, 0), rec("r2", 0.7, 1, "g")}));
  paired.add(PredictionSet("b", {rec("r1", 0.3, 0), rec("r2", 0.6, 1, "g")}));
  CHECK(paired.n_methods() == 2);
  CHECK(paired.n_records() == 2);
  CHECK(paired.methods() == std::vector<std::string>{"a", "b"});
  CHECK(paired.set("b").records()[1].p == 0.6);
  CHECK_THROWS_AS(paired.set("zzz"), AuditError);

  PairedPredictions bad_label;
  bad_label.add(PredictionSet("a", {rec("r1", 0.2, 0)}));
  CHECK_THROWS_WITH_AS(bad_label.add(PredictionSet("b", {rec("r1", 0.2, 1)})),
                       doctest::Contains("r1"), AuditError);

  PairedPredictions bad_len;
  bad_len.add(PredictionSet("a", {rec("r1", 0.2, 0)}));
  CHECK_THROWS_AS(bad_len.add(PredictionSet("b", {rec("r1", 0.2, 0), rec("r2", 0.1, 0)})),
                  AuditError);

  PairedPredictions dup;
  dup.add(PredictionSet("a", {rec("r1", 0.2, 0)}));
  CHECK_THROWS_AS(dup.add(PredictionSet("a", {rec("r1", 0.2, 0)})), AuditError);
}

TEST_CASE("census counts per identity") {
  auto set = testutil::make_set("m", {
                                         rec("1", 0.1, 0),
                                         rec("2", 0.9, 1),
                                         rec("3", 0.2, 0, "g"),
                                         rec("4", 0.8, 1, "g"),
                                         rec("5", 0.7, 1, "g"),
                                     });
  auto c = census(set);
  CHECK(c.counts.size() == 2);
  CHECK(c.at("background").total == 2);
  CHECK(c.at("background").positives == 1);
  CHECK(c.at("g").total == 3);
  CHECK(c.at("g").positives == 2);
  CHECK(c.at("g").negatives == 1);
  CHECK(!c.has("other"));
  CHECK_THROWS_AS(c.at("other"), AuditError);
}

TEST_CASE("binarize puts the threshold itself on the positive side") {
  CHECK(binarize(0.5, 0.5) == 1);
  CHECK(binarize(0.4999, 0.5) == 0);
  CHECK(binarize(0.0, 0.0) == 1);
}

static PredictionSet sliced_fixture(int n_g, int g_pos, int n_small) {
  std::vector<PredictionRecord> rs;
  for (int i = 0; i < 200; ++i) rs.push_back(rec("b" + std::to_string(i), 0.1, i < 30 ? 1 : 0));
  for (int i = 0; i < n_g; ++i)
    rs.push_back(rec("g" + std::to_string(i), 0.5, i < g_pos ? 1 : 0, "g"));
  for (int i = 0; i < n_small; ++i)
    rs.push_back(rec("s" + std::to_string(i), 0.5, 0, "tiny"));
  return testutil::make_set("m", std::move(rs));
}

TEST_CASE("qualifying identities respect min_n inclusively") {
  auto at50 = census(sliced_fixture(50, 10, 10));
  CHECK(qualifying_identities(at50, 50) == std::vector<std::string>{"g"});
  CHECK(excluded_identities(at50, 50) == std::vector<std::string>{"tiny"});
  auto at49 = census(sliced_fixture(49, 10, 10));
  CHECK(qualifying_identities(at49, 50).empty());
}

TEST_CASE("make_slices emits background first, then per-identity slices") {
  auto set = sliced_fixture(60, 55, 5);
  auto slices = make_slices(set);
  REQUIRE(slices.size() == 4);
  CHECK(slices[0].name == "background");
  CHECK(slices[1].name == "g");
  CHECK(slices[2].name == "bpsn(g)");
  CHECK(slices[3].name == "bnsp(g)");
  CHECK(slices[0].indices.size() == 200);
  CHECK(slices[1].indices.size() == 60);
  // bpsn: subgroup negatives (5) + background positives (30).
  CHECK(slices[2].indices.size() == 35);
  // bnsp: subgroup positives (55) + background negatives (170).
  CHECK(slices[3].indices.size() == 225);
}

TEST_CASE("bnsp slice is withheld below the positives floor") {
  auto slices = make_slices(sliced_fixture(60, 49, 0));
  REQUIRE(slices.size() == 3);
  CHECK(slices[0].name == "background");
  CHECK(slices[1].name == "g");
  CHECK(slices[2].name == "bpsn(g)");
}

TEST_CASE("with_name keeps records and changes the label") {
  auto set = testutil::make_set("a", {rec("1", 0.4, 1)});
  auto renamed = set.with_name("b");
  CHECK(renamed.name() == "b");
  CHECK(renamed.records() == set.records());
}
