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

#include "xmera/proxy.hpp"

#include <algorithm>
#include <charconv>
#include <ctime>

#include <httplib.h>
#include <json.hpp>

namespace xmera {
namespace {

using ojson = nlohmann::ordered_json;

constexpr double kFuzzyMatchFraction = 0.8;

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      now.time_since_epoch()) %
                  1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms.count()));
  return out;
}

// host:port of an http(s) URL, with the scheme default port filled in.
std::string authority_of(std::string_view url) {
  int default_port = 80;
  if (url.starts_with("https://")) {
    url.remove_prefix(8);
    default_port = 443;
  } else if (url.starts_with("http://")) {
    url.remove_prefix(7);
  }
  url = url.substr(0, url.find('/'));
  if (url.find(':') == std::string_view::npos) {
    return std::string(url) + ":" + std::to_string(default_port);
  }
  return std::string(url);
}

bool is_hop_header(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return lower == "host" || lower == "content-length" || lower == "connection" ||
         lower == "transfer-encoding" || lower == "keep-alive" ||
         lower == "content-type" || lower == "proxy-connection" ||
         lower == "upgrade";
}

}  // namespace

std::pair<std::string, int> parse_listen_address(std::string_view text) {
  const std::size_t colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error(Errc::kInvalidArgument,
                "listen address must be host:port, got '" + std::string(text) + "'");
  }
  int port = -1;
  const std::string_view digits = text.substr(colon + 1);
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || port < 0 ||
      port > 65535) {
    throw Error(Errc::kInvalidArgument, "bad port in '" + std::string(text) + "'");
  }
  return {std::string(text.substr(0, colon)), port};
}

void validate(const ProxyConfig& config) {
  if ((config.attack == AttackKind::kBeta || config.attack == AttackKind::kGamma) &&
      !config.adversarial_source) {
    throw Error(Errc::kInvalidArgument,
                std::string(to_string(config.attack)) +
                    " attack needs an adversarial source");
  }
  if (config.listen_port < 0 || config.listen_port > 65535) {
    throw Error(Errc::kInvalidArgument, "listen port out of range");
  }
  const std::string listen =
      config.listen_host + ":" + std::to_string(config.listen_port);
  if (config.listen_port != 0 && authority_of(config.upstream_base_url) == listen) {
    throw Error(Errc::kInvalidArgument, "listen address equals upstream address");
  }
}

std::string_view to_string(InterceptOutcome outcome) {
  switch (outcome) {
    case InterceptOutcome::kRewritten: return "rewritten";
    case InterceptOutcome::kNotJson: return "not-json";
    case InterceptOutcome::kNoUserMessage: return "no-user-message";
    case InterceptOutcome::kAlreadyAttacked: return "already-attacked";
    case InterceptOutcome::kNoAttack: return "no-attack";
    case InterceptOutcome::kAttackFailed: return "attack-failed";
  }
  return "unknown";
}

std::size_t longest_common_substring(std::string_view a, std::string_view b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  std::size_t best = 0;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : 0;
      best = std::max(best, cur[j]);
    }
    std::swap(prev, cur);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Interceptor

Interceptor::Interceptor(AttackKind attack, std::vector<AdversarialRecord> records,
                         std::uint64_t seed, std::optional<std::filesystem::path> log_path)
    : attack_(attack), checker_(fact_checker_from(records)), seed_(seed) {
  for (const AdversarialRecord& r : records) {
    pool_.push_back(to_sample(r));
    normalized_questions_.push_back(normalize(r.question));
  }
  if (log_path) {
    log_.open(*log_path, std::ios::binary | std::ios::app);
    if (!log_) throw Error(Errc::kIoError, "cannot open audit log " + log_path->string());
  }
}

std::optional<std::pair<std::size_t, bool>> Interceptor::match_record(
    std::string_view question) const {
  const std::string q = normalize(question);
  if (q.empty()) return std::nullopt;
  for (std::size_t i = 0; i < normalized_questions_.size(); ++i) {
    if (normalized_questions_[i] == q) return std::make_pair(i, true);
  }
  std::optional<std::size_t> best;
  std::size_t best_len = 0;
  const double needed = kFuzzyMatchFraction * static_cast<double>(q.size());
  for (std::size_t i = 0; i < normalized_questions_.size(); ++i) {
    const std::size_t len = longest_common_substring(q, normalized_questions_[i]);
    if (static_cast<double>(len) >= needed && len > best_len) {
      best = i;
      best_len = len;
    }
  }
  if (!best) return std::nullopt;
  return std::make_pair(*best, false);
}

// Perturbed query and the rule that produced it, or nullopt when the query
// should pass untouched.
std::optional<std::pair<std::string, std::string>> Interceptor::perturb(
    const std::string& query, std::uint64_t ordinal) const {
  if (attack_ == AttackKind::kAlpha) {
    if (query.ends_with(kAlphaSuffix)) return std::nullopt;
    return std::make_pair(alpha_attack(query).perturbed, std::string("alpha"));
  }
  QaSample request;
  request.id = "request:" + std::to_string(ordinal);
  request.question = query;
  const auto match = match_record(query);
  if (attack_ == AttackKind::kBeta && match) {
    request.adversarial_context = pool_[match->first].adversarial_context;
    return std::make_pair(beta_attack(request, checker_).perturbed,
                          std::string(match->second ? "beta-exact" : "beta-fuzzy"));
  }
  // Gamma, and beta without a matching record.
  if (match) request.id = pool_[match->first].id;
  const std::uint64_t seed = derive_seed(seed_, ordinal);
  return std::make_pair(gamma_attack(request, pool_, seed).perturbed,
                        std::string(attack_ == AttackKind::kGamma ? "gamma"
                                                                  : "gamma-fallback"));
}

void Interceptor::audit(std::string_view original, std::string_view perturbed,
                        std::string_view rule, std::uint64_t ordinal) {
  const ojson line = {
      {"timestamp", utc_timestamp()},
      {"ordinal", ordinal},
      {"attack", to_string(attack_)},
      {"rule", rule},
      {"original_sha256", sha256_hex(original)},
      {"perturbed_sha256", sha256_hex(perturbed)},
  };
  std::lock_guard lock(log_mu_);
  if (log_.is_open()) {
    log_ << line.dump() << '\n';
    log_.flush();
  }
  ++audit_count_;
}

InterceptResult Interceptor::intercept(std::string_view body, std::uint64_t ordinal) {
  InterceptResult out;
  out.body = std::string(body);
  if (attack_ == AttackKind::kNone) {
    out.outcome = InterceptOutcome::kNoAttack;
    return out;
  }
  ojson doc = ojson::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    out.outcome = InterceptOutcome::kNotJson;
    return out;
  }
  if (!doc.is_object() || !doc.contains("messages") || !doc["messages"].is_array()) {
    out.outcome = InterceptOutcome::kNoUserMessage;
    return out;
  }
  ojson* target = nullptr;
  for (auto it = doc["messages"].rbegin(); it != doc["messages"].rend(); ++it) {
    if (it->is_object() && it->value("role", "") == "user" &&
        it->contains("content") && (*it)["content"].is_string()) {
      target = &(*it)["content"];
      break;
    }
  }
  if (target == nullptr) {
    out.outcome = InterceptOutcome::kNoUserMessage;
    return out;
  }
  const std::string original = target->get<std::string>();
  std::optional<std::pair<std::string, std::string>> perturbed;
  try {
    perturbed = perturb(original, ordinal);
  } catch (const Error&) {
    out.outcome = InterceptOutcome::kAttackFailed;
    return out;
  }
  if (!perturbed) {
    out.outcome = InterceptOutcome::kAlreadyAttacked;
    return out;
  }
  *target = perturbed->first;
  out.body = doc.dump();
  out.outcome = InterceptOutcome::kRewritten;
  out.rule = perturbed->second;
  audit(original, perturbed->first, out.rule, ordinal);
  return out;
}

// ---------------------------------------------------------------------------
// Server

ProxyServer::ProxyServer(ProxyConfig config) : config_(std::move(config)) {
  validate(config_);
  std::vector<AdversarialRecord> records;
  if (config_.adversarial_source) {
    records = load_adversarial(*config_.adversarial_source).records;
  }
  interceptor_ = std::make_unique<Interceptor>(config_.attack, std::move(records),
                                               config_.seed, config_.log_path);
  server_ = std::make_unique<httplib::Server>();
  // httplib's default adds SO_REUSEPORT, which would let a second proxy
  // silently share a port that is already taken.
  server_->set_socket_options([](int sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });

  server_->Get("/health", [this](const httplib::Request&, httplib::Response& res) {
    const ojson body = {{"status", "ok"}, {"attack", to_string(config_.attack)}};
    res.set_content(body.dump(), "application/json");
  });

  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    std::string body = req.body;
    if (req.method == "POST") {
      body = interceptor_->intercept(req.body, ordinal_.fetch_add(1)).body;
    }
    httplib::Client client(config_.upstream_base_url);
    const auto secs =
        std::chrono::duration_cast<std::chrono::seconds>(config_.upstream_timeout);
    client.set_connection_timeout(secs);
    client.set_read_timeout(secs);
    client.set_write_timeout(secs);
    httplib::Headers headers;
    for (const auto& [name, value] : req.headers) {
      if (!is_hop_header(name)) headers.emplace(name, value);
    }
    std::string path = req.path;
    if (!req.params.empty()) {
      path += '?';
      path += httplib::detail::params_to_query_str(req.params);
    }
    const std::string content_type = req.get_header_value("Content-Type");
    httplib::Result upstream =
        req.method == "POST"
            ? client.Post(path, headers, body,
                          content_type.empty() ? "application/json" : content_type)
            : client.Get(path, headers);
    if (!upstream) {
      const ojson err = {{"error",
                          {{"type", "upstream_error"},
                           {"message", httplib::to_string(upstream.error())}}}};
      res.status = 502;
      res.set_content(err.dump(), "application/json");
      return;
    }
    res.status = upstream->status;
    for (const auto& [name, value] : upstream->headers) {
      if (!is_hop_header(name)) res.headers.emplace(name, value);
    }
    const std::string upstream_type = upstream->get_header_value("Content-Type");
    res.set_content(upstream->body,
                    upstream_type.empty() ? "application/octet-stream" : upstream_type);
  };
  server_->Post(R"(.*)", forward);
  server_->Get(R"(.*)", forward);
}

ProxyServer::~ProxyServer() { stop(); }

int ProxyServer::start() {
  int port = config_.listen_port;
  if (port == 0) {
    port = server_->bind_to_any_port(config_.listen_host);
    if (port < 0) port = 0;
  } else if (!server_->bind_to_port(config_.listen_host, port)) {
    port = 0;
  }
  if (port == 0) {
    throw Error(Errc::kBindError, "cannot bind " + config_.listen_host + ":" +
                                      std::to_string(config_.listen_port));
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void ProxyServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace xmera
