// Copyright 2026 The RelPrior Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "relprior/assets.h"
#include "relprior/corpus.h"
#include "support/synthetic.h"

namespace relprior {
namespace {

using nlohmann::json;

std::string TempFile(const std::string& name, const std::string& contents) {
  auto dir = std::filesystem::temp_directory_path() / "relprior_corpus_test";
  std::filesystem::create_directories(dir);
  auto path = dir / name;
  std::ofstream(path, std::ios::binary) << contents;
  return path.string();
}

json MinimalRecord() {
  return json::parse(R"({
    "title": "T",
    "sents": [["Ada", "Lovelace", "met", "Babbage", "."]],
    "vertexSet": [
      [{"name": "Ada Lovelace", "sent_id": 0, "pos": [0, 2], "type": "PER"}],
      [{"name": "Babbage", "sent_id": 0, "pos": [3, 4], "type": "PER"}]
    ],
    "labels": [{"h": 0, "t": 1, "r": "P26", "evidence": [0]}]
  })");
}

TEST_CASE("string helpers") {
  CHECK(CaseFold("New YORK") == "new york");
  CHECK(FoldAndCollapse("  New \t  York ") == "new york");
  CHECK(Trim("  a b \n") == "a b");
  CHECK(IsRelationCode("P17"));
  CHECK_FALSE(IsRelationCode("P"));
  CHECK_FALSE(IsRelationCode("p17"));
  CHECK_FALSE(IsRelationCode("P1a"));
}

TEST_CASE("bundled registry holds the 96 relations in numeric code order") {
  RelationRegistry reg = testing::BundledRegistry();
  CHECK(reg.size() == 96);
  CHECK(reg.NameOf("P17") == "country");
  CHECK(reg.NameOf("P27") == "country of citizenship");
  CHECK(reg.NameOf("P161") == "cast member");
  for (size_t i = 1; i < reg.size(); ++i) {
    CHECK(std::stoi(reg.entries()[i - 1].code.substr(1)) <
          std::stoi(reg.entries()[i].code.substr(1)));
  }
  CHECK(reg.FindByName("Country Of Citizenship")->code == "P27");
  CHECK(reg.FindByCode("P9999") == nullptr);
  CHECK(reg.IndexOf("P6") == 0u);
  CHECK_FALSE(reg.IndexOf("P9999").has_value());
}

TEST_CASE("registry rejects duplicates and empties") {
  CHECK_FALSE(RelationRegistry::Create({{"P1", "a"}, {"P1", "b"}}).ok());
  CHECK_FALSE(RelationRegistry::Create({{"P1", "a"}, {"P2", "A"}}).ok());
  CHECK_FALSE(RelationRegistry::Create({{"P1", ""}}).ok());
  CHECK_FALSE(RelationRegistry::Create({{"X1", "a"}}).ok());
  CHECK(RelationRegistry::Create({{"P1", "a"}, {"P2", "b"}}).ok());
}

TEST_CASE("alias table maps corrupted labels and checks targets") {
  RelationRegistry reg = testing::BundledRegistry(/*with_aliases=*/true);
  CHECK(reg.has_aliases());
  CHECK(reg.FindByAlias("nationality")->code == "P27");
  CHECK(reg.FindByAlias("NATIONALITY")->code == "P27");
  RelationRegistry plain = testing::BundledRegistry();
  CHECK_FALSE(plain.has_aliases());
  CHECK_FALSE(plain.SetAliases({{"x", "P99999"}}).ok());
}

TEST_CASE("registry file loading reports duplicate keys and empty files") {
  CHECK_FALSE(LoadRelationRegistry(TempFile("empty.json", ""), std::nullopt).ok());
  auto dup = LoadRelationRegistry(
      TempFile("dup.json", R"({"P1": "a", "P1": "b"})"), std::nullopt);
  CHECK_FALSE(dup.ok());
  auto ok = LoadRelationRegistry(TempFile("ok.json", R"({"P10": "b", "P9": "a"})"),
                                 TempFile("alias.json", R"({"bee": "P10"})"));
  REQUIRE(ok.ok());
  CHECK(ok->entries()[0].code == "P9");
  CHECK(ok->FindByAlias("bee")->code == "P10");
}

TEST_CASE("representative name is the longest mention, first on ties") {
  Entity e;
  e.mentions = {{"Eppler", 0, 0, 1, "PER"},
                {"Dieter Eppler", 0, 0, 2, "PER"},
                {"Dieter Epplar", 0, 0, 2, "PER"}};
  CHECK(RepresentativeName(e) == "Dieter Eppler");
}

TEST_CASE("corpus parsing round-trips through the record schema") {
  json records = json::array({MinimalRecord()});
  auto c = ParseCorpus(records, {});
  REQUIRE(c.ok());
  REQUIRE(c->docs.size() == 1);
  const Document& d = c->docs[0];
  CHECK(d.entities.size() == 2);
  CHECK(d.gold[0].r == "P26");
  CHECK(DocumentText(d) == "Ada Lovelace met Babbage .");
  auto again = ParseCorpus(CorpusToJson(c->docs), {});
  REQUIRE(again.ok());
  CHECK(again->docs == c->docs);
}

TEST_CASE("schema errors name the record, validation errors the field") {
  json bad = json::array({MinimalRecord(), json{{"title", 3}}});
  auto c = ParseCorpus(bad, {});
  REQUIRE_FALSE(c.ok());
  CHECK(std::string(c.status().message()).find("record 1") != std::string::npos);

  json rec = MinimalRecord();
  rec["labels"][0]["t"] = 5;
  auto v = ParseCorpus(json::array({rec}), {});
  REQUIRE_FALSE(v.ok());
  const std::string msg(v.status().message());
  CHECK(msg.find("'T'") != std::string::npos);
  CHECK(msg.find("labels[0]") != std::string::npos);

  json pos = MinimalRecord();
  pos["vertexSet"][1][0]["pos"] = json::array({3, 9});
  auto p = ParseCorpus(json::array({pos}), {});
  REQUIRE_FALSE(p.ok());
  CHECK(std::string(p.status().message()).find("vertexSet[1][0].pos") != std::string::npos);

  LoadOptions permissive;
  permissive.permissive = true;
  auto kept = ParseCorpus(json::array({MinimalRecord(), rec}), permissive);
  REQUIRE(kept.ok());
  CHECK(kept->docs.size() == 1);
  CHECK(kept->dropped == 1);
  CHECK(kept->drop_reasons.size() == 1);
}

TEST_CASE("gold is optional only when not expected") {
  json rec = MinimalRecord();
  rec.erase("labels");
  LoadOptions opts;
  CHECK_FALSE(ParseCorpus(json::array({rec}), opts).ok());
  opts.expect_gold = false;
  auto c = ParseCorpus(json::array({rec}), opts);
  REQUIRE(c.ok());
  CHECK(c->docs[0].gold.empty());
}

TEST_CASE("registry-aware loading rejects unknown relation codes") {
  RelationRegistry reg = testing::BundledRegistry();
  json rec = MinimalRecord();
  rec["labels"][0]["r"] = "P99999";
  LoadOptions opts;
  opts.registry = &reg;
  CHECK_FALSE(ParseCorpus(json::array({rec}), opts).ok());
}

TEST_CASE("candidate pairs are every ordered distinct pair in order") {
  Document d;
  d.entities.resize(4);
  auto pairs = CandidatePairs(d);
  CHECK(pairs.size() == 12);
  CHECK(std::is_sorted(pairs.begin(), pairs.end()));
  for (auto [h, t] : pairs) CHECK(h != t);
}

TEST_CASE("corpus statistics match a direct count over the raw records") {
  json raw = json::parse(assets::SelftestDocsJson());
  double ents = 0, sents = 0, triples = 0;
  for (const json& r : raw) {
    ents += r["vertexSet"].size();
    sents += r["sents"].size();
    triples += r["labels"].size();
  }
  const double n = static_cast<double>(raw.size());
  auto stats = ComputeCorpusStats(testing::FixtureDocs());
  REQUIRE(stats.ok());
  CHECK(stats->n_docs == raw.size());
  CHECK(stats->mean_entities == doctest::Approx(ents / n));
  CHECK(stats->mean_sentences == doctest::Approx(sents / n));
  CHECK(stats->mean_triples == doctest::Approx(triples / n));
  CHECK_FALSE(ComputeCorpusStats({}).ok());
}

TEST_CASE("synthetic corpora validate against the registry") {
  RelationRegistry reg = testing::BundledRegistry();
  testing::SyntheticOptions opts;
  opts.docs = 30;
  for (const Document& d : testing::SyntheticCorpus(reg, opts)) {
    CHECK(ValidateDocument(d, &reg).ok());
  }
}

}  // namespace
}  // namespace relprior
