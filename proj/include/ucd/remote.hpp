// Copyright 2026 The UCD Authors.
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

#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "ucd/provider.hpp"
#include "ucd/vocab.hpp"

namespace ucd {

// Wire protocol (HTTP/1.1, JSON):
//   GET  /v1/vocab   -> {"tokens": [...], "vocab_hash": "..."}
//   POST /v1/logits  {"context": [ids...], "vocab_hash"?: "..."}
//                    -> {"logits": [V numbers, 17 significant digits], "vocab_hash": "..."}
// Errors carry {"error": {"code", "message"}} with code bad_request (400),
// vocab_mismatch (409) or internal (500).

// Serves a model until stop() or destruction. Requests are handled
// concurrently; the model must be safe to query from several threads.
class LogitServer {
 public:
  LogitServer(ProviderPtr model, Vocab vocab);
  ~LogitServer();
  LogitServer(const LogitServer&) = delete;
  LogitServer& operator=(const LogitServer&) = delete;

  // Binds and starts serving on a background thread. Port 0 picks a free
  // port. Returns the bound port; throws on bind failure.
  int start(const std::string& host, int port);
  // Serves on the calling thread until stop() is called from elsewhere.
  void run(const std::string& host, int port);
  void stop();

  std::string url() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Formats logits with 17 significant digits.
std::string format_logits_json(const LogitVector& logits, const std::string& vocab_hash);

struct RemoteProviderConfig {
  std::string base_url;  // http://host:port
  int timeout_ms = 5000;
  std::optional<std::string> expected_vocab_hash;

  void validate() const;
};

// A LogitProvider backed by a LogitServer. Fetches the vocabulary once on
// construction and checks the hash on every response.
class RemoteProvider final : public LogitProvider {
 public:
  explicit RemoteProvider(RemoteProviderConfig cfg);
  ~RemoteProvider() override;

  const std::string& vocab_hash() const override { return hash_; }
  std::size_t vocab_size() const override { return size_; }
  LogitVector logits(const Context& ctx) const override;

  const Vocab& vocab() const { return *vocab_; }

 private:
  struct Client;
  RemoteProviderConfig cfg_;
  std::unique_ptr<Client> client_;
  mutable std::mutex mu_;
  std::optional<Vocab> vocab_;
  std::string hash_;
  std::size_t size_ = 0;
};

}  // namespace ucd
