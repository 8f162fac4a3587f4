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

#include <algorithm>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "xmera/victim.hpp"

namespace xmera {
namespace {

using nlohmann::json;

[[noreturn]] void malformed(const std::string& why) {
  throw Error(Errc::kMalformedProviderResponse, why);
}

const json& require(const json& object, const std::string& key,
                    const std::string& where) {
  if (!object.is_object() || !object.contains(key)) {
    malformed("missing field '" + key + "' in " + where);
  }
  return object.at(key);
}

double logprob_of(const json& entry, const std::string& where) {
  const json& lp = require(entry, "logprob", where);
  if (!lp.is_number()) malformed("non-numeric logprob in " + where);
  const double value = lp.get<double>();
  if (std::isnan(value) || value > 0.0) malformed("positive logprob in " + where);
  return value;
}

// Releases a semaphore slot on scope exit.
class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& s_;
};

}  // namespace

void validate(const VictimConfig& config) {
  if (config.top_k < 1 || config.top_k > static_cast<int>(kMaxTopK)) {
    throw Error(Errc::kInvalidArgument, "top_k must be in [1, 10]");
  }
  if (config.timeout.count() <= 0) {
    throw Error(Errc::kInvalidArgument, "timeout must be positive");
  }
  if (config.max_retries < 0 || config.max_concurrency < 1) {
    throw Error(Errc::kInvalidArgument,
                "max_retries must be >= 0 and max_concurrency >= 1");
  }
  if (config.kind == VictimKind::kRemote && config.endpoint.empty()) {
    throw Error(Errc::kInvalidArgument, "remote victim requires an endpoint");
  }
}

std::string build_chat_request(std::string_view query, const VictimConfig& config) {
  json request = {
      {"model", config.model_name},
      {"messages", json::array({{{"role", "user"}, {"content", query}}})},
      {config.wire.logprobs_field, true},
      {config.wire.top_logprobs_field, config.top_k},
      {"temperature", config.temperature},
  };
  return request.dump();
}

GenerationTrace parse_chat_completion(std::string_view body, int top_k,
                                      const WireProfile& wire) {
  const json doc = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) malformed("response is not JSON");
  const json& choices = require(doc, "choices", "response");
  if (!choices.is_array() || choices.empty()) malformed("empty choices");
  const json& choice = choices.at(0);
  const json& message = require(choice, "message", "choices[0]");
  const json& content = require(message, "content", "choices[0].message");
  if (!content.is_string()) malformed("message content is not a string");

  const json& logprobs = require(choice, wire.logprobs_field, "choices[0]");
  const json& items = require(logprobs, "content", "choices[0].logprobs");
  if (!items.is_array()) malformed("logprobs.content is not an array");

  GenerationTrace trace;
  trace.answer_text = content.get<std::string>();
  for (std::size_t t = 0; t < items.size(); ++t) {
    const std::string where = "logprobs.content[" + std::to_string(t) + "]";
    const json& item = items.at(t);
    const json& token = require(item, "token", where);
    if (!token.is_string()) malformed("non-string token in " + where);

    TokenPosition pos;
    pos.chosen_token = token.get<std::string>();
    pos.chosen_logprob = logprob_of(item, where);
    const json& top = require(item, wire.top_logprobs_field, where);
    if (!top.is_array()) malformed("top_logprobs is not an array in " + where);
    for (const json& alt : top) {
      const json& alt_token = require(alt, "token", where + ".top_logprobs");
      if (!alt_token.is_string()) malformed("non-string top-k token in " + where);
      pos.topk.push_back({alt_token.get<std::string>(),
                          logprob_of(alt, where + ".top_logprobs")});
    }
    std::stable_sort(pos.topk.begin(), pos.topk.end(),
                     [](const TokenLogprob& a, const TokenLogprob& b) {
                       return a.logprob > b.logprob;
                     });
    if (pos.topk.size() > static_cast<std::size_t>(top_k)) {
      pos.topk.resize(static_cast<std::size_t>(top_k));
    }
    if (pos.topk.empty()) pos.topk.push_back({pos.chosen_token, pos.chosen_logprob});
    trace.positions.push_back(std::move(pos));
  }
  if (trace.positions.empty() && !trace.answer_text.empty()) {
    malformed("answer without logprob positions");
  }
  try {
    validate(trace);
  } catch (const Error& e) {
    malformed(e.what());
  }
  return trace;
}

RemoteVictim::RemoteVictim(VictimConfig config)
    : config_(std::move(config)), slots_(1) {
  config_.kind = VictimKind::kRemote;
  validate(config_);
  // Split "scheme://host[:port]/prefix" into client base and path prefix.
  const std::size_t scheme_end = config_.endpoint.find("://");
  const std::size_t host_start =
      scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const std::size_t path_start = config_.endpoint.find('/', host_start);
  base_url_ = config_.endpoint.substr(0, path_start);
  std::string prefix =
      path_start == std::string::npos ? "" : config_.endpoint.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + config_.wire.path;
  // counting_semaphore has no resize; start at 1 and release the rest.
  slots_.release(config_.max_concurrency - 1);
}

GenerationTrace RemoteVictim::generate(std::string_view query,
                                       std::uint64_t /*call_seed*/) const {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw Error(Errc::kAuthError,
                "credential variable " + config_.api_key_env + " is not set");
  }
  const std::string body = build_chat_request(query, config_);

  SlotGuard slot(slots_);
  httplib::Client client(base_url_);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(
      config_.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());
  const httplib::Headers headers = {
      {"Authorization", std::string("Bearer ") + key}};

  Errc last_error = Errc::kUpstreamError;
  std::string last_detail;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(config_.backoff_base * (1 << (attempt - 1)));
    }
    auto result = client.Post(path_, headers, body, "application/json");
    if (!result) {
      const httplib::Error err = result.error();
      last_error = (err == httplib::Error::Read || err == httplib::Error::Write ||
                    err == httplib::Error::ConnectionTimeout)
                       ? Errc::kTimeout
                       : Errc::kUpstreamError;
      last_detail = httplib::to_string(err);
      continue;
    }
    const int status = result->status;
    if (status == 401 || status == 403) {
      throw Error(Errc::kAuthError, "provider rejected credentials (HTTP " +
                                        std::to_string(status) + ")");
    }
    if (status == 429) {
      last_error = Errc::kRateLimited;
      last_detail = "HTTP 429";
      continue;
    }
    if (status >= 500) {
      last_error = Errc::kUpstreamError;
      last_detail = "HTTP " + std::to_string(status);
      continue;
    }
    if (status != 200) {
      throw Error(Errc::kUpstreamError, "HTTP " + std::to_string(status));
    }
    return parse_chat_completion(result->body, config_.top_k, config_.wire);
  }
  throw Error(last_error, "gave up after " + std::to_string(config_.max_retries) +
                              " retries: " + last_detail);
}

std::unique_ptr<Victim> make_victim(const VictimConfig& config, MockKnowledge kb) {
  if (config.kind == VictimKind::kRemote) {
    return std::make_unique<RemoteVictim>(config);
  }
  return std::make_unique<MockVictim>(std::move(kb), config.model_name);
}

}  // namespace xmera
