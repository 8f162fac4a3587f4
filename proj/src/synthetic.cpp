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

#include "xmera/synthetic.hpp"

#include <array>
#include <cctype>
#include <cstdio>
#include <random>
#include <unordered_set>

namespace xmera {
namespace {

constexpr std::array<std::string_view, 24> kSyllables = {
    "ka", "lo", "ven", "tar", "mi", "sol", "dre", "qua", "nor", "bel", "ith", "zan",
    "ro", "phe", "lun", "gar", "sei", "vo", "mar", "eth", "cai", "dun", "ori", "pel"};

struct Relation {
  std::string_view question;  // {s} is the subject
  std::string_view context;   // {s} subject, {o} object
  std::string_view subject_kind;
  std::string_view object_kind;
};

constexpr std::array<Relation, 6> kRelations = {{
    {"What is the capital of {s}?", "The capital of {s} is {o}.", "country", "city"},
    {"Who wrote the novel {s}?", "The novel {s} was written by {o}.", "title",
     "person"},
    {"Which river flows through the city of {s}?",
     "The river {o} flows through the city of {s}.", "city", "river"},
    {"Who founded the company {s}?", "The company {s} was founded by {o}.",
     "company", "person"},
    {"On which island is the volcano {s} located?",
     "The volcano {s} is located on the island of {o}.", "volcano", "island"},
    {"Who discovered the element {s}?", "The element {s} was discovered by {o}.",
     "element", "person"},
}};

class NameSource {
 public:
  explicit NameSource(std::uint64_t seed) : rng_(seed) {}

  std::string word(int syllables) {
    std::uniform_int_distribution<std::size_t> pick(0, kSyllables.size() - 1);
    std::string w;
    for (int i = 0; i < syllables; ++i) w += kSyllables[pick(rng_)];
    w[0] = static_cast<char>(w[0] - 'a' + 'A');
    return w;
  }

  // A name not seen before that neither contains nor is contained in any
  // previously issued name word.
  std::string fresh(std::string_view kind) {
    for (;;) {
      std::string name;
      if (kind == "person") {
        name = word(2) + " " + word(3);
      } else if (kind == "title") {
        name = "The " + word(2) + " of " + word(3);
      } else {
        name = word(3);
      }
      if (acceptable(name)) {
        issued_.push_back(lower(name));
        return name;
      }
    }
  }

 private:
  static std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  }

  bool acceptable(const std::string& name) {
    std::string cand = lower(name);
    if (seen_.contains(cand)) return false;
    for (const std::string& prior : issued_) {
      if (cand.find(prior) != std::string::npos || prior.find(cand) != std::string::npos) {
        return false;
      }
    }
    seen_.insert(cand);
    return true;
  }

  std::mt19937_64 rng_;
  std::vector<std::string> issued_;
  std::unordered_set<std::string> seen_;
};

std::string fill(std::string_view tmpl, const std::string& subject,
                 const std::string& object) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl.substr(i, 3) == "{s}") {
      out += subject;
      i += 2;
    } else if (tmpl.substr(i, 3) == "{o}") {
      out += object;
      i += 2;
    } else {
      out += tmpl[i];
    }
  }
  return out;
}

}  // namespace

SyntheticCorpus synthetic_corpus(std::size_t n, std::uint64_t seed) {
  constexpr std::array<DatasetTag, 3> kTags = {DatasetTag::kTQA, DatasetTag::kHQA,
                                               DatasetTag::kNQ};
  NameSource names(seed);
  SyntheticCorpus corpus;
  for (std::size_t i = 0; i < n; ++i) {
    const Relation& rel = kRelations[i % kRelations.size()];
    const std::string subject = names.fresh(rel.subject_kind);
    const std::string gold = names.fresh(rel.object_kind);
    const std::string wrong = names.fresh(rel.object_kind);
    char id[32];
    std::snprintf(id, sizeof id, "syn-%06zu", i);

    QaSample s;
    s.id = id;
    s.question = fill(rel.question, subject, gold);
    s.gold_answer = gold;
    s.source_fact = fill(rel.context, subject, gold);
    s.dataset_tag = kTags[i % kTags.size()];
    corpus.entries.push_back({s.question, gold, wrong, *s.source_fact, true});
    corpus.samples.push_back(std::move(s));
  }
  return corpus;
}

}  // namespace xmera
