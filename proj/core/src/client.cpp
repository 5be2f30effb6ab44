#include "cotlab/client.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "cotlab/digest.hpp"
#include "cotlab/error.hpp"
#include "httplib.h"

namespace cotlab::probe {

namespace {

// splits "http://host:1234/v1" into the client target and the path prefix
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint base_url must include a scheme: " + base_url);
  }
  const auto path_start = base_url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {base_url, ""};
  std::string prefix = base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {base_url.substr(0, path_start), prefix};
}

}  // namespace

ResponseCache::ResponseCache(std::string path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.contains("request_hash") || !j.contains("response")) continue;
    entries_[j["request_hash"].get<std::string>()] = j["response"];
  }
}

std::string ResponseCache::request_hash(const nlohmann::json& request_body) {
  return digest_hex(request_body.dump());
}

std::optional<nlohmann::json> ResponseCache::lookup(const std::string& hash) const {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(hash);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::store(const std::string& hash, const nlohmann::json& request_body,
                          const nlohmann::json& response_body) {
  std::lock_guard lock(mutex_);
  if (entries_.count(hash)) return;
  nlohmann::json line;
  line["request_hash"] = hash;
  line["model"] = request_body.value("model", std::string{});
  line["messages"] = request_body.value("messages", nlohmann::json::array());
  nlohmann::json params = request_body;
  params.erase("model");
  params.erase("messages");
  line["params"] = params;
  line["response"] = response_body;
  std::ofstream out(path_, std::ios::app);
  if (!out) throw ConfigError("cannot append to cache file: " + path_);
  const std::string serialized = line.dump() + "\n";
  out.write(serialized.data(), static_cast<std::streamsize>(serialized.size()));
  out.flush();
  entries_[hash] = response_body;
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

ChatClient::ChatClient(EndpointConfig cfg, ResponseCache* cache)
    : cfg_(std::move(cfg)), cache_(cache) {
  if (const char* override_url = std::getenv("COTLAB_BASE_URL");
      override_url && *override_url) {
    cfg_.base_url = override_url;
  }
  if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key) {
    api_key_ = key;
  }
  std::tie(host_, path_prefix_) = split_base_url(cfg_.base_url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (host_.rfind("https://", 0) == 0) {
    throw ConfigError("https endpoints require a TLS-enabled build: " + cfg_.base_url);
  }
#endif
}

nlohmann::json ChatClient::request_body(const EndpointConfig& cfg,
                                        const std::vector<ChatTurn>& messages, bool probing) {
  nlohmann::json body;
  body["model"] = cfg.model;
  nlohmann::json msgs = nlohmann::json::array();
  for (const auto& turn : messages) {
    msgs.push_back({{"role", std::string(role_name(turn.role))}, {"content", turn.content}});
  }
  body["messages"] = std::move(msgs);
  body["temperature"] = cfg.temperature;
  body["max_tokens"] = probing ? cfg.probe_max_tokens : cfg.generation_max_tokens;
  if (probing) {
    body["logprobs"] = true;
    body["top_logprobs"] = cfg.top_logprobs;
  }
  return body;
}

ChatResponse ChatClient::parse_response(const nlohmann::json& body, bool probing) {
  ChatResponse out;
  if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty()) {
    out.error = "response has no choices";
    out.error_kind = "protocol";
    return out;
  }
  const auto& choice = body["choices"][0];
  if (choice.contains("message") && choice["message"].contains("content") &&
      choice["message"]["content"].is_string()) {
    out.content = choice["message"]["content"].get<std::string>();
  }
  if (probing) {
    if (!choice.contains("logprobs") || choice["logprobs"].is_null() ||
        !choice["logprobs"].contains("content") || !choice["logprobs"]["content"].is_array() ||
        choice["logprobs"]["content"].empty()) {
      out.error = "response carries no first-token logprobs";
      out.error_kind = "protocol";
      return out;
    }
    const auto& first = choice["logprobs"]["content"][0];
    for (const auto& entry : first.value("top_logprobs", nlohmann::json::array())) {
      if (!entry.contains("token") || !entry.contains("logprob")) continue;
      const auto token = entry["token"].get<std::string>();
      const auto lp = entry["logprob"].get<double>();
      const auto it = out.top_logprobs.find(token);
      if (it == out.top_logprobs.end() || lp > it->second) out.top_logprobs[token] = lp;
      ++out.top_logprob_count;
    }
    if (out.top_logprobs.empty()) {
      out.error = "empty top_logprobs list";
      out.error_kind = "protocol";
      return out;
    }
  }
  out.ok = true;
  return out;
}

ChatResponse ChatClient::complete(const std::vector<ChatTurn>& messages, bool probing) const {
  const nlohmann::json body = request_body(cfg_, messages, probing);
  const std::string hash = ResponseCache::request_hash(body);

  if (cache_) {
    if (const auto cached = cache_->lookup(hash)) {
      ChatResponse out = parse_response(*cached, probing);
      out.from_cache = true;
      return out;
    }
  }

  const std::string payload = body.dump();
  const std::string target = path_prefix_ + "/chat/completions";
  std::string last_error = "no attempt made";

  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0) {
      const auto backoff = cfg_.retry_backoff_ms * (1LL << (attempt - 1));
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
    }
    httplib::Client http(host_);
    http.set_connection_timeout(0, cfg_.timeout_ms * 1000LL);
    http.set_read_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    const auto res = http.Post(target, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "retryable status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      ChatResponse out;
      out.error = "endpoint returned status " + std::to_string(res->status);
      out.error_kind = "protocol";
      return out;
    }
    nlohmann::json parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) {
      ChatResponse out;
      out.error = "endpoint returned unparseable JSON";
      out.error_kind = "protocol";
      return out;
    }
    if (cache_) cache_->store(hash, body, parsed);
    return parse_response(parsed, probing);
  }

  ChatResponse out;
  out.error = "retries exhausted: " + last_error;
  out.error_kind = "transport";
  return out;
}

}  // namespace cotlab::probe
