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

#include "ucd/remote.hpp"

#include <cmath>
#include <cstdio>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "ucd/error.hpp"

namespace ucd {
namespace {

constexpr const char* kJson = "application/json";

void send_error(httplib::Response& res, int status, const char* code, const std::string& message) {
  nlohmann::json body = {{"error", {{"code", code}, {"message", message}}}};
  res.status = status;
  res.set_content(body.dump(), kJson);
}

}  // namespace

std::string format_logits_json(const LogitVector& logits, const std::string& vocab_hash) {
  std::string out = "{\"logits\":[";
  out.reserve(out.size() + static_cast<std::size_t>(logits.size()) * 25 + 64);
  char buf[40];
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    if (!std::isfinite(logits[i])) fail(ErrorKind::kInternal, "model produced a non-finite logit");
    std::snprintf(buf, sizeof(buf), "%.17g", logits[i]);
    if (i) out += ',';
    out += buf;
  }
  out += "],\"vocab_hash\":";
  out += nlohmann::json(vocab_hash).dump();
  out += '}';
  return out;
}

struct LogitServer::Impl {
  ProviderPtr model;
  Vocab vocab;
  httplib::Server server;
  std::thread thread;
  std::string host;
  int port = 0;

  Impl(ProviderPtr m, Vocab v) : model(std::move(m)), vocab(std::move(v)) {
    if (!model) fail(ErrorKind::kUsage, "server needs a model");
    if (model->vocab_hash() != vocab.hash()) {
      fail(ErrorKind::kData, "incompatible provider: vocab hash " + model->vocab_hash() + " != " + vocab.hash());
    }
    nlohmann::json vocab_body = {{"tokens", vocab.tokens()}, {"vocab_hash", vocab.hash()}};
    server.Get("/v1/vocab", [body = vocab_body.dump()](const httplib::Request&, httplib::Response& res) {
      res.set_content(body, kJson);
    });
    server.Post("/v1/logits", [this](const httplib::Request& req, httplib::Response& res) { handle_logits(req, res); });
    // Idle keep-alive connections otherwise hold stop() for the full timeout.
    server.set_keep_alive_timeout(1);
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
      send_error(res, 500, "internal", "unhandled server error");
    });
  }

  void handle_logits(const httplib::Request& req, httplib::Response& res) const {
    std::vector<TokenId> ids;
    try {
      const auto j = nlohmann::json::parse(req.body);
      if (j.contains("vocab_hash") && j.at("vocab_hash").get<std::string>() != vocab.hash()) {
        send_error(res, 409, "vocab_mismatch",
                   "vocab hash " + j.at("vocab_hash").get<std::string>() + " != " + vocab.hash());
        return;
      }
      ids = j.at("context").get<std::vector<TokenId>>();
    } catch (const nlohmann::json::exception& e) {
      send_error(res, 400, "bad_request", std::string("malformed request: ") + e.what());
      return;
    }
    try {
      const Context ctx(std::move(ids), vocab.size());
      res.set_content(format_logits_json(model->logits(ctx), vocab.hash()), kJson);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kData || e.kind() == ErrorKind::kUsage) {
        send_error(res, 400, "bad_request", e.what());
      } else {
        send_error(res, 500, "internal", e.what());
      }
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  }

  void bind(const std::string& h, int p) {
    host = h;
    if (p == 0) {
      port = server.bind_to_any_port(h);
      if (port < 0) fail(ErrorKind::kIo, "cannot bind " + h + " on any port");
    } else {
      if (!server.bind_to_port(h, p)) fail(ErrorKind::kIo, "cannot bind " + h + ":" + std::to_string(p));
      port = p;
    }
  }
};

LogitServer::LogitServer(ProviderPtr model, Vocab vocab)
    : impl_(std::make_unique<Impl>(std::move(model), std::move(vocab))) {}

LogitServer::~LogitServer() { stop(); }

int LogitServer::start(const std::string& host, int port) {
  if (impl_->thread.joinable()) fail(ErrorKind::kUsage, "server already started");
  impl_->bind(host, port);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return impl_->port;
}

void LogitServer::run(const std::string& host, int port) {
  impl_->bind(host, port);
  if (!impl_->server.listen_after_bind()) fail(ErrorKind::kIo, "server stopped unexpectedly");
}

void LogitServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string LogitServer::url() const { return "http://" + impl_->host + ":" + std::to_string(impl_->port); }

void RemoteProviderConfig::validate() const {
  if (base_url.rfind("http://", 0) != 0) fail(ErrorKind::kUsage, "remote provider URL must start with http://: " + base_url);
  if (timeout_ms <= 0) fail(ErrorKind::kUsage, "remote timeout must be positive");
}

struct RemoteProvider::Client {
  httplib::Client http;
  explicit Client(const RemoteProviderConfig& cfg) : http(cfg.base_url) {
    const auto sec = static_cast<time_t>(cfg.timeout_ms / 1000);
    const auto usec = static_cast<time_t>((cfg.timeout_ms % 1000) * 1000);
    http.set_connection_timeout(sec, usec);
    http.set_read_timeout(sec, usec);
    http.set_write_timeout(sec, usec);
    http.set_keep_alive(true);
  }
};

namespace {

[[noreturn]] void transport_failure(const std::string& url, httplib::Error err) {
  const auto msg = "remote provider " + url + ": " + httplib::to_string(err);
  switch (err) {
    case httplib::Error::Connection:
    case httplib::Error::Read:
    case httplib::Error::Write:
    case httplib::Error::ConnectionTimeout:
      throw RetryableError(msg);
    default:
      fail(ErrorKind::kRemote, msg);
  }
}

[[noreturn]] void status_failure(const std::string& url, const httplib::Result& res) {
  std::string detail = res->body;
  try {
    const auto j = nlohmann::json::parse(res->body);
    detail = j.at("error").at("code").get<std::string>() + ": " + j.at("error").at("message").get<std::string>();
  } catch (const nlohmann::json::exception&) {
  }
  fail(ErrorKind::kRemote, "remote provider " + url + " returned HTTP " + std::to_string(res->status) + " (" + detail + ")");
}

}  // namespace

RemoteProvider::RemoteProvider(RemoteProviderConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  while (!cfg_.base_url.empty() && cfg_.base_url.back() == '/') cfg_.base_url.pop_back();
  client_ = std::make_unique<Client>(cfg_);

  auto res = client_->http.Get("/v1/vocab");
  if (!res) transport_failure(cfg_.base_url, res.error());
  if (res->status != 200) status_failure(cfg_.base_url, res);
  try {
    const auto j = nlohmann::json::parse(res->body);
    vocab_ = Vocab::from_tokens(j.at("tokens").get<std::vector<std::string>>());
    const auto served_hash = j.at("vocab_hash").get<std::string>();
    if (served_hash != vocab_->hash()) {
      fail(ErrorKind::kRemote, "remote provider " + cfg_.base_url + " sent a vocab hash that does not match its tokens");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kRemote, "remote provider " + cfg_.base_url + ": malformed vocab response: " + e.what());
  }
  hash_ = vocab_->hash();
  size_ = vocab_->size();
  if (cfg_.expected_vocab_hash && *cfg_.expected_vocab_hash != hash_) {
    fail(ErrorKind::kData, "incompatible provider: vocab hash " + hash_ + " != " + *cfg_.expected_vocab_hash);
  }
}

RemoteProvider::~RemoteProvider() = default;

LogitVector RemoteProvider::logits(const Context& ctx) const {
  if (ctx.vocab_size() != size_) fail(ErrorKind::kData, "context vocabulary size does not match the remote provider");
  const auto ids = ctx.tokens();
  nlohmann::json req = {{"context", std::vector<TokenId>(ids.begin(), ids.end())}, {"vocab_hash", hash_}};

  std::string body;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto res = client_->http.Post("/v1/logits", req.dump(), kJson);
    if (!res) transport_failure(cfg_.base_url, res.error());
    if (res->status != 200) status_failure(cfg_.base_url, res);
    body = std::move(res->body);
  }

  try {
    const auto j = nlohmann::json::parse(body);
    const auto served = j.at("vocab_hash").get<std::string>();
    if (served != hash_) {
      fail(ErrorKind::kData, "incompatible provider: vocab hash " + served + " != " + hash_);
    }
    const auto& arr = j.at("logits");
    if (!arr.is_array() || arr.size() != size_) {
      fail(ErrorKind::kRemote, "remote provider " + cfg_.base_url + " returned the wrong number of logits");
    }
    LogitVector out(static_cast<Eigen::Index>(size_));
    for (std::size_t i = 0; i < size_; ++i) out[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    return out;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kRemote, "remote provider " + cfg_.base_url + ": malformed logits response: " + e.what());
  }
}

}  // namespace ucd
