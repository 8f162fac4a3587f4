// Copyright 2026 The Xmera Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "test_support.hpp"
#include "xmera/core.hpp"

namespace xmera {
namespace {

TEST(Normalize, SpecExamples) {
  EXPECT_EQ(normalize("  Beijing,  China "), "beijing, china");
  EXPECT_EQ(normalize("Portugal."), "portugal");
  EXPECT_EQ(normalize(""), "");
}

TEST(Normalize, KeepsInteriorPunctuationAndFoldsUnicode) {
  EXPECT_EQ(normalize("\"St. John's\""), "st. john's");
  EXPECT_EQ(normalize("ＡＢＣ"), "abc");                 // fullwidth, NFKC
  EXPECT_EQ(normalize("Straße"), "strasse");            // full case fold
  EXPECT_EQ(normalize("a \t\n b"), "a b");         // unicode whitespace run
  EXPECT_EQ(normalize("...!?"), "");
  EXPECT_EQ(normalize("Z\xc3\xbc" "rich"), normalize("Zu\xcc\x88" "rich"));  // composed vs decomposed
}

TEST(Normalize, IsIdempotent) {
  std::mt19937_64 rng(11);
  const std::string alphabet[] = {"a", "B", " ", "\t", ".", ",", "!", "é", "Ｚ",
                                  "ß", " ", "'", "-", "1", "İ", "ﬁ"};
  for (int trial = 0; trial < 2000; ++trial) {
    std::string s;
    const int len = static_cast<int>(rng() % 12);
    for (int i = 0; i < len; ++i) s += alphabet[rng() % std::size(alphabet)];
    const std::string once = normalize(s);
    ASSERT_EQ(normalize(once), once) << "input: " << s;
  }
}

TEST(Oracle, SpecExamples) {
  const Verdict beijing = oracle_check("Beijing", "Beijing, China");
  EXPECT_TRUE(beijing.correct);
  ASSERT_TRUE(beijing.matched_span);
  EXPECT_EQ(*beijing.matched_span, std::make_pair(std::size_t{0}, std::size_t{7}));

  const Verdict curie = oracle_check("Barbara McClintock", "Marie Curie");
  EXPECT_FALSE(curie.correct);
  EXPECT_FALSE(curie.matched_span);

  EXPECT_TRUE(oracle_check("X", "x.").correct);
}

TEST(Oracle, EmptyGoldThrows) {
  try {
    oracle_check(" .. ", "anything");
    FAIL() << "expected EmptyGold";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kEmptyGold);
  }
}

TEST(Oracle, SpanIsFirstOccurrenceInNormalizedAnswer) {
  const Verdict v = oracle_check("paris", "It is Paris, PARIS.");
  ASSERT_TRUE(v.matched_span);
  EXPECT_EQ(v.matched_span->first, 6u);
  EXPECT_EQ(v.matched_span->second, 11u);
}

TEST(Oracle, ReflexiveAndCaseAndPunctuationInvariant) {
  const std::vector<std::string> golds = {"Beijing", "Marie Curie", "1975", "São Paulo",
                                          "U.S.A"};
  for (const std::string& g : golds) {
    EXPECT_TRUE(oracle_check(g, g).correct) << g;
    std::string upper = g;
    std::transform(upper.begin(), upper.end(), upper.begin(), ::toupper);
    EXPECT_EQ(oracle_check(g, "The answer: " + g).correct,
              oracle_check("!" + upper + "?", "the answer: " + upper + ".").correct);
  }
}

TEST(Majority, SpecExamples) {
  EXPECT_EQ(majority_answer(std::vector<std::string>{"a", "a", "b"}), "a");
  EXPECT_EQ(majority_answer(std::vector<std::string>{"b", "a", "a", "b"}), "b");
  EXPECT_EQ(majority_answer(std::vector<std::string>{"A", "a."}), "A");
}

TEST(Majority, EmptyListThrows) {
  EXPECT_THROW(majority_answer(std::vector<std::string>{}), Error);
}

TEST(Majority, PermutationInvariantUnderStrictMajority) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::string> answers(6, "winner");
    const int others = static_cast<int>(rng() % 5);
    for (int i = 0; i < others; ++i) answers.push_back("other" + std::to_string(rng() % 3));
    std::shuffle(answers.begin(), answers.end(), rng);
    ASSERT_EQ(majority_answer(answers), "winner");
  }
}

TEST(Validate, QaSample) {
  QaSample s{"id", "Q?", "A", std::nullopt, std::nullopt, DatasetTag::kTQA};
  EXPECT_NO_THROW(validate(s));
  s.gold_answer = " . ";
  EXPECT_THROW(validate(s), Error);
  s.gold_answer = "A";
  s.source_fact = "fact";
  s.adversarial_context = "fact";
  EXPECT_THROW(validate(s), Error);
  s.adversarial_context = "";
  EXPECT_THROW(validate(s), Error);
}

TEST(Validate, Trace) {
  GenerationTrace t = testing::chosen_trace({0.5, 0.25});
  EXPECT_NO_THROW(validate(t));

  GenerationTrace positive = t;
  positive.positions[0].chosen_logprob = 0.1;
  positive.positions[0].topk[0].logprob = 0.1;
  EXPECT_THROW(validate(positive), Error);

  GenerationTrace unsorted = t;
  unsorted.positions[0] = testing::position_with({0.6, 0.3});
  std::swap(unsorted.positions[0].topk[0], unsorted.positions[0].topk[1]);
  EXPECT_THROW(validate(unsorted), Error);

  GenerationTrace empty;
  empty.answer_text = "words";
  EXPECT_THROW(validate(empty), Error);
}

TEST(DatasetTag, RoundTrip) {
  for (DatasetTag t : {DatasetTag::kTQA, DatasetTag::kHQA, DatasetTag::kNQ,
                       DatasetTag::kOther}) {
    EXPECT_EQ(parse_dataset_tag(to_string(t)), t);
  }
  EXPECT_THROW(parse_dataset_tag("SQuAD"), Error);
}

TEST(Seeds, DeriveIsStableAndKeySensitive) {
  EXPECT_EQ(derive_seed(1, "a"), derive_seed(1, "a"));
  EXPECT_NE(derive_seed(1, "a"), derive_seed(1, "b"));
  EXPECT_NE(derive_seed(1, "a"), derive_seed(2, "a"));
  EXPECT_NE(derive_seed(1, std::uint64_t{0}), derive_seed(1, std::uint64_t{1}));
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(7, i));
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(Seeds, UnitIntervalInRange) {
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const double u = unit_interval(mix64(i));
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Digest, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // namespace
}  // namespace xmera
