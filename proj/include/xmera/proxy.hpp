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

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "xmera/attacks.hpp"
#include "xmera/dataset.hpp"
#include "xmera/fact_checker.hpp"

namespace httplib {
class Server;
}

namespace xmera {

struct ProxyConfig {
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;  // 0 picks a free port
  std::string upstream_base_url = "http://127.0.0.1:8000";
  AttackKind attack = AttackKind::kAlpha;
  std::optional<std::filesystem::path> adversarial_source;  // beta and gamma
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> log_path;  // audit JSON lines
  std::chrono::milliseconds upstream_timeout{60000};
};

/// Throws kInvalidArgument when beta or gamma lacks an adversarial source or
/// the listen address equals the upstream address.
void validate(const ProxyConfig& config);

/// Splits "host:port"; throws kInvalidArgument on a malformed address.
std::pair<std::string, int> parse_listen_address(std::string_view text);

enum class InterceptOutcome {
  kRewritten,
  kNotJson,          // forwarded byte-identical
  kNoUserMessage,    // forwarded byte-identical
  kAlreadyAttacked,  // alpha suffix already present
  kNoAttack,         // attack is none
  kAttackFailed,     // e.g. empty pool; forwarded byte-identical
};

std::string_view to_string(InterceptOutcome outcome);

struct InterceptResult {
  std::string body;
  InterceptOutcome outcome = InterceptOutcome::kNotJson;
  std::string rule;  // how the attack was chosen: alpha, beta-exact, beta-fuzzy, gamma
};

/// Length in bytes of the longest common substring.
std::size_t longest_common_substring(std::string_view a, std::string_view b);

/// Rewrites the last user-role message of chat-completion bodies. Thread
/// safe: the only shared mutable state is the audit log.
class Interceptor {
 public:
  Interceptor(AttackKind attack, std::vector<AdversarialRecord> records,
              std::uint64_t seed, std::optional<std::filesystem::path> log_path = {});

  /// `ordinal` keys the gamma draw for this request.
  InterceptResult intercept(std::string_view body, std::uint64_t ordinal);

  AttackKind attack() const { return attack_; }
  std::size_t audit_count() const { return audit_count_.load(); }

  /// Index of the record matching `question`: normalized equality first,
  /// else the record with the longest common substring of at least 0.8 of
  /// the question's normalized length. Second member tells which rule hit.
  std::optional<std::pair<std::size_t, bool>> match_record(
      std::string_view question) const;

 private:
  std::optional<std::pair<std::string, std::string>> perturb(const std::string& query,
                                                             std::uint64_t ordinal) const;
  void audit(std::string_view original, std::string_view perturbed,
             std::string_view rule, std::uint64_t ordinal);

  AttackKind attack_;
  std::vector<QaSample> pool_;
  std::vector<std::string> normalized_questions_;
  FactChecker checker_;
  std::uint64_t seed_;
  std::mutex log_mu_;
  std::ofstream log_;
  std::atomic<std::size_t> audit_count_{0};
};

/// HTTP front: GET /health answers locally, every other request is
/// intercepted (POST bodies) and forwarded to the upstream. Upstream
/// responses are relayed unchanged; connect failures become 502.
class ProxyServer {
 public:
  explicit ProxyServer(ProxyConfig config);
  ~ProxyServer();

  ProxyServer(const ProxyServer&) = delete;
  ProxyServer& operator=(const ProxyServer&) = delete;

  /// Binds and starts serving on a background thread. Returns the bound
  /// port. Throws kBindError.
  int start();
  /// Stops accepting, lets in-flight requests finish, joins the thread.
  void stop();

  Interceptor& interceptor() { return *interceptor_; }
  std::size_t requests_seen() const { return ordinal_.load(); }

 private:
  ProxyConfig config_;
  std::unique_ptr<Interceptor> interceptor_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::atomic<std::uint64_t> ordinal_{0};
};

}  // namespace xmera
