// Copyright 2026 The Gestural Chart Engine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// WebSocket transport for Session: one text frame per message, one thread
// per connection, one Session per connection.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "gce/service.hpp"

namespace gce {

/// Log directory for a server: GCE_LOG_DIR wins over the configured one.
inline std::optional<std::string> effective_log_dir(const ServiceConfig& cfg) {
  if (const char* env = std::getenv("GCE_LOG_DIR"); env != nullptr && *env != '\0') return std::string(env);
  return cfg.log_dir;
}

class Server {
 public:
  explicit Server(ServiceConfig config)
      : config_(std::move(config)),
        acceptor_(ioc_, {boost::asio::ip::make_address("127.0.0.1"), config_.port}),
        log_dir_(effective_log_dir(config_)) {}

  ~Server() {
    stop();
    std::lock_guard lock(mu_);
    for (auto& t : workers_) {
      if (t.joinable()) t.join();
    }
  }

  unsigned short port() const { return acceptor_.local_endpoint().port(); }

  /// Accepts connections until stop().
  void run() {
    while (!stopping_) {
      boost::system::error_code ec;
      boost::asio::ip::tcp::socket socket(ioc_);
      acceptor_.accept(socket, ec);
      if (stopping_) break;
      if (ec) continue;
      const std::string id = "s" + std::to_string(++sessions_);
      std::lock_guard lock(mu_);
      workers_.emplace_back([this, id, s = std::move(socket)]() mutable { serve(id, std::move(s)); });
    }
  }

  void stop() {
    if (stopping_.exchange(true)) return;
    boost::system::error_code ec;
    // wake a blocking accept
    boost::asio::ip::tcp::socket poke(ioc_);
    poke.connect({boost::asio::ip::make_address("127.0.0.1"), port()}, ec);
    acceptor_.close(ec);
  }

 private:
  void serve(const std::string& id, boost::asio::ip::tcp::socket socket) {
    namespace websocket = boost::beast::websocket;
    std::unique_ptr<std::ofstream> log;
    if (log_dir_) {
      std::filesystem::create_directories(*log_dir_);
      log = std::make_unique<std::ofstream>(std::filesystem::path(*log_dir_) / (id + ".jsonl"));
    }
    Session session(id, config_, log.get());
    try {
      websocket::stream<boost::asio::ip::tcp::socket> ws(std::move(socket));
      ws.accept();
      ws.text(true);
      for (;;) {
        boost::beast::flat_buffer buffer;
        ws.read(buffer);
        for (const auto& reply : session.handle_text(boost::beast::buffers_to_string(buffer.data()))) {
          ws.write(boost::asio::buffer(reply.dump()));
        }
      }
    } catch (const boost::system::system_error& e) {
      if (e.code() != websocket::error::closed && e.code() != boost::asio::error::eof) {
        std::cerr << "session " << id << ": " << e.what() << '\n';
      }
    }
  }

  ServiceConfig config_;
  boost::asio::io_context ioc_;
  boost::asio::ip::tcp::acceptor acceptor_;
  std::optional<std::string> log_dir_;
  std::atomic<bool> stopping_{false};
  std::atomic<int> sessions_{0};
  std::mutex mu_;
  std::vector<std::thread> workers_;
};

}  // namespace gce
