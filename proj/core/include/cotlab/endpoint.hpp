#pragma once

#include <string>

namespace cotlab::probe {

// One OpenAI-compatible chat-completions endpoint. Greedy decoding throughout:
// temperature stays 0 for generation and probing.
struct EndpointConfig {
  std::string base_url;
  std::string model;
  std::string api_key_env = "COTLAB_API_KEY";
  double temperature = 0.0;
  int generation_max_tokens = 4096;
  int probe_max_tokens = 1;
  int top_logprobs = 20;
  int timeout_ms = 60000;
  int max_retries = 3;
  int retry_backoff_ms = 250;
  int max_in_flight = 4;
};

}  // namespace cotlab::probe
