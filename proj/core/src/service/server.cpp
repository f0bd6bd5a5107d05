#include "sharedctl/service/server.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "sharedctl/errors.hpp"
#include "sharedctl/log_io.hpp"

namespace sharedctl::service {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace fs = std::filesystem;
using tcp = asio::ip::tcp;
using nlohmann::json;

namespace {

struct Target {
  std::string path;
  std::map<std::string, std::string> query;
};

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string url_decode(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '+') {
      out += ' ';
    } else if (s[i] == '%' && i + 2 < s.size() && hex_value(s[i + 1]) >= 0 &&
               hex_value(s[i + 2]) >= 0) {
      out += static_cast<char>(hex_value(s[i + 1]) * 16 + hex_value(s[i + 2]));
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

Target parse_target(std::string_view target) {
  Target t;
  const auto q = target.find('?');
  t.path = url_decode(target.substr(0, q));
  if (q == std::string_view::npos) return t;
  std::string_view rest = target.substr(q + 1);
  while (!rest.empty()) {
    const auto amp = rest.find('&');
    const std::string_view pair = rest.substr(0, amp);
    const auto eq = pair.find('=');
    if (eq == std::string_view::npos) {
      t.query[url_decode(pair)] = "";
    } else {
      t.query[url_decode(pair.substr(0, eq))] = url_decode(pair.substr(eq + 1));
    }
    if (amp == std::string_view::npos) break;
    rest = rest.substr(amp + 1);
  }
  return t;
}

std::string_view mime_type(const fs::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".wasm") return "application/wasm";
  return "application/octet-stream";
}

struct StoredLog {
  std::string id;
  EpisodeLog log;
};

}  // namespace

struct SessionServer::Impl {
  explicit Impl(ServerOptions o) : options(std::move(o)), acceptor(ioc) {}

  ServerOptions options;
  asio::io_context ioc;
  tcp::acceptor acceptor;
  std::thread thread;
  std::uint16_t bound_port = 0;
  std::uint64_t next_session = 1;
  std::vector<StoredLog> logs;

  void bind();
  void accept();

  std::optional<Scenario> find_scenario(const std::string& id) const;
  json scenario_list() const;
  json log_list() const;
  void store(std::uint64_t session_id, const EpisodeLog& log);
};

namespace {

class WsSession;

http::response<http::string_body> make_response(const http::request<http::string_body>& req,
                                                http::status status, std::string body,
                                                std::string_view content_type) {
  http::response<http::string_body> res{status, req.version()};
  res.set(http::field::content_type, std::string(content_type));
  res.set(http::field::access_control_allow_origin, "*");
  res.keep_alive(req.keep_alive());
  res.body() = std::move(body);
  res.prepare_payload();
  return res;
}

http::response<http::string_body> json_response(const http::request<http::string_body>& req,
                                                http::status status, const json& body) {
  return make_response(req, status, body.dump(), "application/json");
}

http::response<http::string_body> error_response(const http::request<http::string_body>& req,
                                                 http::status status, std::string_view message) {
  return json_response(req, status, json{{"error", std::string(message)}});
}

// One WebSocket connection driving one Session at a fixed tick rate.
class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, SessionServer::Impl& server, Session session, std::uint64_t id)
      : ws_(std::move(socket)),
        timer_(ws_.get_executor()),
        server_(server),
        session_(std::move(session)),
        id_(id),
        period_(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(1.0 / server.options.tick_rate_hz))) {}

  void start(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->send(state_update_message(self->session_.snapshot(), self->session_.scenario()));
      self->read();
      self->timer_.expires_after(self->period_);
      self->schedule();
    });
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->closed_ = true;
        self->timer_.cancel();
        return;
      }
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->on_message(text);
      self->read();
    });
  }

  void on_message(const std::string& text) {
    const bool was_active = session_.episode_active();
    const std::uint64_t goal = session_.instructed_goal();
    const bool was_complete = session_.round_complete();
    const double alpha = session_.alpha();
    const auto condition = session_.condition();
    for (json& reply : session_.handle_client_message(text)) send(reply);
    flush_logs();
    const bool changed = was_active != session_.episode_active() ||
                         goal != session_.instructed_goal() ||
                         was_complete != session_.round_complete() || alpha != session_.alpha() ||
                         condition != session_.condition();
    // Without a running episode no tick will report the change, so report it now.
    if (changed && !session_.episode_active()) {
      send(state_update_message(session_.snapshot(), session_.scenario()));
    }
  }

  void schedule() {
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->closed_) return;
      self->on_tick();
      self->timer_.expires_at(self->timer_.expiry() + self->period_);
      self->schedule();
    });
  }

  void on_tick() {
    if (!session_.episode_active()) return;
    const StateUpdate update = session_.tick();
    send(state_update_message(update, session_.scenario()));
    if (update.outcome) {
      send(episode_end_message(update));
    }
    flush_logs();
  }

  // Hands finished episodes (including skip records) to the server's store.
  void flush_logs() {
    const auto& logs = session_.completed_logs();
    if (logs.size() < stored_) stored_ = 0;  // round restarted
    for (; stored_ < logs.size(); ++stored_) server_.store(id_, logs[stored_]);
  }

  void send(const json& message) {
    queue_.push_back(message.dump());
    if (queue_.size() == 1) write();
  }

  void write() {
    ws_.text(true);
    ws_.async_write(asio::buffer(queue_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) {
                        self->closed_ = true;
                        self->timer_.cancel();
                        return;
                      }
                      self->queue_.pop_front();
                      if (!self->queue_.empty()) self->write();
                    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  asio::steady_timer timer_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  SessionServer::Impl& server_;
  Session session_;
  std::uint64_t id_;
  std::chrono::steady_clock::duration period_;
  bool closed_ = false;
  std::size_t stored_ = 0;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, SessionServer::Impl& server)
      : stream_(std::move(socket)), server_(server) {}

  void start() { read(); }

 private:
  void read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       if (ec) return;
                       self->handle();
                     });
  }

  void handle() {
    const Target target = parse_target(std::string_view(req_.target().data(), req_.target().size()));
    if (websocket::is_upgrade(req_)) {
      if (target.path != "/ws") return reply(error_response(req_, http::status::not_found, "no such socket"));
      return upgrade(target);
    }
    if (req_.method() != http::verb::get) {
      return reply(error_response(req_, http::status::method_not_allowed, "only GET is supported"));
    }
    if (target.path == "/ws") {
      return reply(error_response(req_, http::status::upgrade_required, "WebSocket upgrade required"));
    }
    reply(route(target));
  }

  void upgrade(const Target& target) {
    const auto scenario_it = target.query.find("scenario");
    if (scenario_it == target.query.end()) {
      return reply(error_response(req_, http::status::bad_request, "missing scenario parameter"));
    }
    std::optional<Scenario> scenario = server_.find_scenario(scenario_it->second);
    if (!scenario) {
      return reply(error_response(req_, http::status::not_found, "unknown scenario"));
    }
    SessionConfig config = server_.options.session;
    try {
      if (auto it = target.query.find("condition"); it != target.query.end()) {
        config.condition = parse_visualization_condition(it->second);
      }
      if (auto it = target.query.find("alpha"); it != target.query.end()) {
        std::size_t used = 0;
        const double alpha = std::stod(it->second, &used);
        if (used != it->second.size() || !(alpha >= 0.0 && alpha <= 1.0)) {
          throw ProtocolError("alpha must be a number in [0, 1]");
        }
        config.loop.controller.alpha = alpha;
      }
    } catch (const std::exception& e) {
      return reply(error_response(req_, http::status::bad_request, e.what()));
    }
    auto ws = std::make_shared<WsSession>(stream_.release_socket(), server_,
                                          Session(std::move(*scenario), std::move(config)),
                                          server_.next_session++);
    ws->start(std::move(req_));
  }

  http::response<http::string_body> route(const Target& target) {
    const std::string& p = target.path;
    if (p == "/api/scenarios") return json_response(req_, http::status::ok, server_.scenario_list());
    if (p.rfind("/api/scenarios/", 0) == 0) {
      const auto scenario = server_.find_scenario(p.substr(15));
      if (!scenario) return error_response(req_, http::status::not_found, "unknown scenario");
      return json_response(req_, http::status::ok, scenario_to_json(*scenario));
    }
    if (p == "/api/logs") return json_response(req_, http::status::ok, server_.log_list());
    if (p.rfind("/api/logs/", 0) == 0) {
      const std::string id = p.substr(10);
      for (const StoredLog& s : server_.logs) {
        if (s.id == id) return json_response(req_, http::status::ok, log_to_json(s.log));
      }
      return error_response(req_, http::status::not_found, "unknown log");
    }
    return static_file(p);
  }

  http::response<http::string_body> static_file(const std::string& path) {
    const fs::path root = server_.options.static_dir;
    if (root.empty() || path.find("..") != std::string::npos) {
      return error_response(req_, http::status::not_found, "not found");
    }
    fs::path file = root / fs::path(path).relative_path();
    if (fs::is_directory(file)) file /= "index.html";
    std::ifstream in(file, std::ios::binary);
    if (!in) return error_response(req_, http::status::not_found, "not found");
    std::ostringstream body;
    body << in.rdbuf();
    return make_response(req_, http::status::ok, body.str(), mime_type(file));
  }

  void reply(http::response<http::string_body> res) {
    auto shared = std::make_shared<http::response<http::string_body>>(std::move(res));
    http::async_write(stream_, *shared,
                      [self = shared_from_this(), shared](beast::error_code ec, std::size_t) {
                        if (ec) return;
                        if (!shared->keep_alive()) {
                          beast::error_code ignored;
                          self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
                          return;
                        }
                        self->read();
                      });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  SessionServer::Impl& server_;
};

}  // namespace

void SessionServer::Impl::bind() {
  beast::error_code ec;
  const auto address = asio::ip::make_address(options.address, ec);
  if (ec) throw ConfigError("invalid listen address '" + options.address + "'");
  const tcp::endpoint endpoint(address, options.port);
  acceptor.open(endpoint.protocol(), ec);
  if (!ec) acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) acceptor.bind(endpoint, ec);
  if (!ec) acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) {
    throw ConfigError("cannot listen on " + options.address + ":" + std::to_string(options.port) +
                      ": " + ec.message());
  }
  bound_port = acceptor.local_endpoint().port();
  accept();
}

void SessionServer::Impl::accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;  // acceptor closed
    std::make_shared<HttpSession>(std::move(socket), *this)->start();
    accept();
  });
}

std::optional<Scenario> SessionServer::Impl::find_scenario(const std::string& id) const {
  if (options.scenario_dir.empty() || !fs::is_directory(options.scenario_dir)) return std::nullopt;
  for (const auto& entry : fs::directory_iterator(options.scenario_dir)) {
    if (entry.path().extension() != ".json") continue;
    try {
      Scenario s = load_scenario(entry.path());
      if (s.id() == id) return s;
    } catch (const Error&) {
      // Not a scenario file; ignore.
    }
  }
  return std::nullopt;
}

json SessionServer::Impl::scenario_list() const {
  std::vector<json> out;
  if (!options.scenario_dir.empty() && fs::is_directory(options.scenario_dir)) {
    for (const auto& entry : fs::directory_iterator(options.scenario_dir)) {
      if (entry.path().extension() != ".json") continue;
      try {
        const Scenario s = load_scenario(entry.path());
        json goals = json::array();
        for (const Goal& g : s.goals()) goals.push_back({{"id", g.id}, {"label", g.label}});
        out.push_back({{"id", s.id()}, {"goals", goals}, {"states", s.state_count()}});
      } catch (const Error&) {
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const json& a, const json& b) { return a["id"].get<std::string>() < b["id"].get<std::string>(); });
  return json(out);
}

json SessionServer::Impl::log_list() const {
  json out = json::array();
  for (const StoredLog& s : logs) {
    out.push_back({{"id", s.id},
                   {"scenario_id", s.log.header.scenario_id},
                   {"goal_id", s.log.header.target_goal_id},
                   {"attempt", s.log.header.attempt},
                   {"outcome", to_string(s.log.outcome.kind)},
                   {"ticks", s.log.outcome.ticks}});
  }
  return out;
}

void SessionServer::Impl::store(std::uint64_t session_id, const EpisodeLog& log) {
  std::uint64_t index = 0;
  const std::string prefix = "s" + std::to_string(session_id) + "-";
  for (const StoredLog& s : logs) index += s.id.rfind(prefix, 0) == 0 ? 1 : 0;
  StoredLog stored{prefix + "e" + std::to_string(index), log};
  if (!options.log_dir.empty()) {
    fs::create_directories(options.log_dir);
    save_log(options.log_dir / (stored.id + ".jsonl"), log);
  }
  logs.push_back(std::move(stored));
}

SessionServer::SessionServer(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {
  if (!(impl_->options.tick_rate_hz > 0.0)) throw ConfigError("tick rate must be positive");
  impl_->options.session.loop.validate();
}

SessionServer::~SessionServer() { stop(); }

void SessionServer::start() {
  impl_->bind();
  impl_->thread = std::thread([this] { impl_->ioc.run(); });
}

void SessionServer::run() {
  if (!impl_->acceptor.is_open()) impl_->bind();
  impl_->ioc.run();
}

void SessionServer::stop() {
  impl_->ioc.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::uint16_t SessionServer::port() const { return impl_->bound_port; }

}  // namespace sharedctl::service
