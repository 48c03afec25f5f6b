#include "flipperbench/bridge.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <ctime>
#include <deque>
#include <functional>
#include <iomanip>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "flipperbench/bench.hpp"
#include "flipperbench/episode.hpp"
#include "flipperbench/error.hpp"
#include "flipperbench/logstore.hpp"

namespace flipperbench {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using Json = nlohmann::ordered_json;

// ---- codecs -------------------------------------------------------------------------

std::string encode_hello(const BenchConfig& config, const SimContext& ctx) {
  const auto& map = ctx.map;
  Json heights = Json::array();
  // Millimetres keep the download small; the console only draws it.
  for (Eigen::Index r = 0; r < map.rows(); ++r) {
    for (Eigen::Index c = 0; c < map.cols(); ++c) heights.push_back(std::lround(map.at(c, r) * 1000.0));
  }
  Json sectors = Json::array();
  for (const auto& s : ctx.arena.sectors) {
    sectors.push_back({{"id", s.id}, {"start", s.start}, {"end", s.end}});
  }
  const auto& g = ctx.geometry;
  Json j;
  j["type"] = "hello";
  j["schema"] = kWireSchema;
  j["log_schema"] = kLogSchema;
  j["policies"] = config.methods;
  j["default_method"] = config.bridge.method;
  j["arenas"] = Json::array({Json{
      {"id", ctx.arena.id},
      {"hash", ctx.arena.hash()},
      {"line", {{"start", {ctx.arena.line.start.x(), ctx.arena.line.start.y()}}, {"heading", ctx.arena.line.heading}}},
      {"sectors", sectors},
      {"heightmap",
       {{"resolution", map.resolution()},
        {"origin", {map.origin().x(), map.origin().y()}},
        {"cols", map.cols()},
        {"rows", map.rows()},
        {"heights_mm", std::move(heights)}}}}});
  j["robot"] = {{"body_length", g.body_length}, {"body_width", g.body_width},
                {"com_height", g.com_height}, {"clearance", g.clearance},
                {"flipper_length", g.flipper_length}, {"flipper_limit", g.flipper_limit}};
  j["controller"] = {{"buttons", ctx.layout.buttons}, {"axes", ctx.layout.axes}, {"deadzone", ctx.layout.deadzone}};
  j["dt"] = config.episode.dt;
  j["state_rate"] = config.bridge.state_rate;
  j["time_scale"] = config.bridge.time_scale;
  return j.dump();
}

std::string encode_state(const RobotState& s, const PolicyOutput& out) {
  Json j;
  j["type"] = "state";
  j["t"] = s.t;
  j["pose"] = {{"x", s.pose.x}, {"y", s.pose.y}, {"z", s.pose.z},
               {"yaw", s.pose.yaw}, {"pitch", s.pose.pitch}, {"roll", s.pose.roll}};
  j["theta"] = {s.theta[0], s.theta[1], s.theta[2], s.theta[3]};
  j["d"] = s.clearance;
  j["accel"] = {s.accel.x(), s.accel.y(), s.accel.z()};
  j["ground_speed"] = s.ground_speed;
  j["mode"] = out.mode;
  j["stuck"] = out.stuck;
  return j.dump();
}

std::string encode_cmd(const CommandFrame& f) {
  Json j;
  j["type"] = "cmd";
  j["t"] = f.t;
  j["b"] = f.buttons;
  j["a"] = f.axes;
  return j.dump();
}

std::string encode_error(std::string_view code, std::string_view message) {
  Json j;
  j["type"] = "error";
  j["code"] = code;
  j["message"] = message;
  return j.dump();
}

namespace {

Json parse_json(std::string_view text) {
  Json j = Json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ParseError("message is not a JSON object");
  return j;
}

CommandFrame cmd_from_json(const Json& j, const ControllerLayout& layout) {
  if (!j.contains("t") || !j["t"].is_number()) throw ParseError("cmd needs a numeric t");
  if (!j.contains("b") || !j["b"].is_array()) throw ParseError("cmd needs a button array b");
  if (!j.contains("a") || !j["a"].is_array()) throw ParseError("cmd needs an axis array a");
  CommandFrame f;
  f.t = j["t"].get<double>();
  if (!std::isfinite(f.t)) throw ParseError("cmd t must be finite");
  if (j["b"].size() != layout.buttons.size() || j["a"].size() != layout.axes.size()) {
    throw ParseError("cmd needs " + std::to_string(layout.buttons.size()) + " buttons and " +
                     std::to_string(layout.axes.size()) + " axes");
  }
  for (const auto& b : j["b"]) {
    if (b.is_boolean()) {
      f.buttons.push_back(b.get<bool>() ? 1 : 0);
    } else if (b.is_number_integer() && (b.get<int>() == 0 || b.get<int>() == 1)) {
      f.buttons.push_back(std::uint8_t(b.get<int>()));
    } else {
      throw ParseError("buttons must be 0 or 1");
    }
  }
  for (const auto& a : j["a"]) {
    if (!a.is_number()) throw ParseError("axes must be numbers");
    const double v = a.get<double>();
    if (!(v >= -1.0 && v <= 1.0)) throw ParseError("axes must lie in [-1, 1]");
    f.axes.push_back(v);
  }
  return f;
}

std::string iso_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

}  // namespace

CommandFrame decode_cmd(std::string_view text, const ControllerLayout& layout) {
  const Json j = parse_json(text);
  if (j.value("type", "") != "cmd") throw ParseError("not a cmd message");
  return cmd_from_json(j, layout);
}

// ---- server -------------------------------------------------------------------------

namespace {

// Shared between the network context (producer of frames, consumer of state)
// and the sim context (the reverse). Everything else stays on its own side.
struct Channel {
  std::mutex mutex;
  std::deque<CommandFrame> frames;  // network -> sim
  std::atomic<bool> stop{false};          // operator sent end
  std::atomic<bool> disconnected{false};  // socket gone
};

class BridgeOperator : public OperatorSource {
 public:
  explicit BridgeOperator(std::shared_ptr<Channel> ch) : ch_(std::move(ch)) {}
  std::vector<LoggedFrame> poll(const RobotState& state, const SimContext&) override {
    std::lock_guard lock(ch_->mutex);
    std::vector<LoggedFrame> out;
    while (!ch_->frames.empty()) {
      out.push_back({std::move(ch_->frames.front()), state.t});
      ch_->frames.pop_front();
    }
    return out;
  }
  // Frames queued before end still get their tick.
  bool stopped() const override {
    std::lock_guard lock(ch_->mutex);
    return ch_->stop && ch_->frames.empty();
  }

 private:
  std::shared_ptr<Channel> ch_;
};

// Background worker running queued jobs in order: the log-writing context.
class Worker {
 public:
  Worker() : thread_([this] { loop(); }) {}
  ~Worker() {
    {
      std::lock_guard lock(mutex_);
      done_ = true;
    }
    cv_.notify_all();
    thread_.join();
  }
  void post(std::function<void()> job) {
    {
      std::lock_guard lock(mutex_);
      jobs_.push_back(std::move(job));
    }
    cv_.notify_all();
  }

 private:
  void loop() {
    for (;;) {
      std::function<void()> job;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return done_ || !jobs_.empty(); });
        if (jobs_.empty()) return;
        job = std::move(jobs_.front());
        jobs_.pop_front();
      }
      job();
    }
  }
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::function<void()>> jobs_;
  bool done_ = false;
  std::thread thread_;
};

}  // namespace

class Session;

struct BridgeServer::Impl : std::enable_shared_from_this<BridgeServer::Impl> {
  BenchConfig config;
  SimContext ctx;
  std::filesystem::path out_dir;
  net::io_context io;
  tcp::acceptor acceptor{io};
  std::thread io_thread;
  std::thread sim_thread;
  std::weak_ptr<Session> active;  // io context only
  std::mutex running_mutex;
  std::shared_ptr<Channel> running;  // channel of the episode on sim_thread
  int session_counter = 0;

  mutable std::mutex logs_mutex;
  mutable std::condition_variable logs_cv;
  std::vector<std::filesystem::path> logs;

  std::unique_ptr<Worker> writer = std::make_unique<Worker>();

  Impl(BenchConfig c, std::filesystem::path out)
      : config(std::move(c)), ctx(config.context()), out_dir(std::move(out)) {}

  void do_accept();
  std::filesystem::path next_log_path(const std::string& method) {
    for (;;) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "_session%03d.jsonl", ++session_counter);
      auto p = out_dir / (method + buf);
      if (!std::filesystem::exists(p)) return p;
    }
  }
};

class Session : public std::enable_shared_from_this<Session> {
 public:
  Session(tcp::socket socket, std::shared_ptr<BridgeServer::Impl> server, bool busy)
      : ws_(std::move(socket)), server_(std::move(server)), busy_(busy) {}

  void open() {
    http::async_read(ws_.next_layer(), buffer_, request_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_request(ec); });
  }

  // Called from the sim context through net::post; runs on the io context.
  void send_state(std::string msg) {
    if (writing_) {
      if (pending_state_) ++dropped_;
      pending_state_ = std::move(msg);  // freshness over completeness
      return;
    }
    write(std::move(msg));
  }

  void send_control(std::string msg) {
    if (writing_) {
      control_.push_back(std::move(msg));
      return;
    }
    write(std::move(msg));
  }

  void close_after_flush() {
    closing_ = true;
    if (!writing_) do_close();
  }

  std::shared_ptr<Channel> channel() const { return channel_; }

 private:
  void on_request(beast::error_code ec) {
    if (ec) return;
    if (!websocket::is_upgrade(request_) || request_.target() != "/session") {
      auto res = std::make_shared<http::response<http::string_body>>(http::status::not_found, request_.version());
      res->set(http::field::content_type, "text/plain");
      res->body() = "websocket endpoint is /session\n";
      res->prepare_payload();
      http::async_write(ws_.next_layer(), *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
        beast::error_code ignored;
        self->ws_.next_layer().shutdown(tcp::socket::shutdown_both, ignored);
      });
      return;
    }
    ws_.text(true);
    ws_.async_accept(request_, [self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
  }

  void on_accept(beast::error_code ec) {
    if (ec) return;
    if (busy_) {
      send_control(encode_error("busy", "another operator session is active"));
      close_after_flush();
      return;
    }
    send_control(encode_hello(server_->config, server_->ctx));
    do_read();
  }

  void do_read() {
    ws_.async_read(in_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      channel_->disconnected = true;
      if (!episode_running_) release();
      return;
    }
    const std::string text = beast::buffers_to_string(in_.data());
    in_.consume(in_.size());
    handle(text);
    if (!closing_) do_read();
  }

  void handle(const std::string& text) {
    const Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("type") || !j["type"].is_string()) {
      send_control(encode_error("bad_cmd", "message is not a JSON object with a type"));
      return;
    }
    const std::string type = j["type"].get<std::string>();
    if (type == "cmd") {
      if (!episode_running_) {
        send_control(encode_error("not_started", "send start before cmd"));
        return;
      }
      try {
        CommandFrame f = cmd_from_json(j, server_->ctx.layout);
        if (last_t_ && !(f.t > *last_t_)) throw ParseError("cmd timestamps must increase");
        last_t_ = f.t;
        std::lock_guard lock(channel_->mutex);
        channel_->frames.push_back(std::move(f));
      } catch (const ParseError& e) {
        send_control(encode_error("bad_cmd", e.what()));
      }
    } else if (type == "start") {
      start(j);
    } else if (type == "end") {
      if (episode_running_) {
        std::lock_guard lock(channel_->mutex);
        channel_->stop = true;
      } else {
        close_after_flush();
      }
    } else {
      send_control(encode_error("bad_message", "unknown message type '" + type + "'"));
    }
  }

  void start(const Json& j) {
    if (episode_running_ || started_) {
      send_control(encode_error("bad_start", "an episode was already started in this session"));
      return;
    }
    const auto& cfg = server_->config;
    EpisodeConfig ec = cfg.episode;
    ec.method = j.contains("method") && j["method"].is_string() ? j["method"].get<std::string>() : cfg.bridge.method;
    ec.seed = cfg.seed;
    ec.start_time = iso_now();
    std::unique_ptr<Policy> policy;
    try {
      if (j.contains("arena") && j["arena"] != server_->ctx.arena.id) {
        throw ConfigError("unknown arena (available: " + server_->ctx.arena.id + ")");
      }
      if (j.contains("targets")) {
        ec.targets = j["targets"].get<std::vector<int>>();
        for (int id : ec.targets) server_->ctx.arena.sector(id);
      }
      policy = make_policy(ec.method, server_->ctx.policy, server_->ctx.mapping);
    } catch (const std::exception& e) {
      send_control(encode_error("bad_start", e.what()));
      return;
    }
    started_ = true;
    episode_running_ = true;
    Json ack;
    ack["type"] = "start";
    ack["method"] = ec.method;
    ack["arena"] = server_->ctx.arena.id;
    ack["targets"] = ec.targets;
    ack["dt"] = ec.dt;
    send_control(ack.dump());

    std::lock_guard lock(server_->running_mutex);
    if (server_->sim_thread.joinable()) server_->sim_thread.join();
    server_->running = channel_;
    server_->sim_thread = std::thread(
        [self = shared_from_this(), server = server_, ec, policy = std::shared_ptr<Policy>(std::move(policy))]() mutable {
          self->simulate(std::move(server), ec, *policy);
        });
  }

  // Sim context: sole owner of the simulation state for this episode.
  void simulate(std::shared_ptr<BridgeServer::Impl> server, EpisodeConfig ec, Policy& policy) {
    BridgeOperator op(channel_);
    const double scale = server->config.bridge.time_scale;
    const auto period = std::chrono::duration<double>(1.0 / server->config.bridge.state_rate);
    const auto wall0 = std::chrono::steady_clock::now();
    auto next_state = wall0;
    auto self = shared_from_this();
    auto observer = [&](const RobotState& s, const PolicyOutput& out) {
      const auto due = wall0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                   std::chrono::duration<double>(s.t / scale));
      std::this_thread::sleep_until(due);
      const auto now = std::chrono::steady_clock::now();
      if (now >= next_state) {
        net::post(server->io, [self, msg = encode_state(s, out)]() mutable { self->send_state(std::move(msg)); });
        next_state = std::max(next_state + std::chrono::duration_cast<std::chrono::steady_clock::duration>(period), now);
      }
      return !channel_->disconnected.load();
    };

    EpisodeLog log;
    std::string failure;
    try {
      log = run_episode(ec, policy, op, server->ctx, observer);
    } catch (const std::exception& e) {
      failure = e.what();
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    if (!failure.empty()) {
      net::post(server->io, [self, failure] {
        self->episode_running_ = false;
        self->send_control(encode_error("sim", failure));
        self->close_after_flush();
      });
      return;
    }
    log.footer.wall_clock = wall;
    const auto path = server->next_log_path(ec.method);
    // Log-writing context; the end message follows the write.
    server->writer->post([self, server, log = std::move(log), path] {
      std::string error;
      try {
        write_text(path, log_to_string(log));
      } catch (const std::exception& e) {
        error = e.what();
      }
      {
        std::lock_guard lock(server->logs_mutex);
        if (error.empty()) server->logs.push_back(path);
      }
      server->logs_cv.notify_all();
      Json end;
      end["type"] = "end";
      end["status"] = to_string(log.footer.status);
      end["reason"] = log.footer.reason;
      end["sim_duration"] = log.footer.sim_duration;
      end["log"] = error.empty() ? path.filename().string() : "";
      if (!error.empty()) end["error"] = error;
      net::post(server->io, [self, msg = end.dump()] {
        self->episode_running_ = false;
        self->send_control(msg);
        self->close_after_flush();
      });
    });
  }

  void write(std::string msg) {
    writing_ = true;
    out_ = std::move(msg);
    ws_.async_write(net::buffer(out_), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->on_write(ec);
    });
  }

  void on_write(beast::error_code ec) {
    writing_ = false;
    if (ec) {
      channel_->disconnected = true;
      control_.clear();
      pending_state_.reset();
      if (!episode_running_) release();
      return;
    }
    if (!control_.empty()) {
      auto msg = std::move(control_.front());
      control_.pop_front();
      write(std::move(msg));
    } else if (pending_state_) {
      auto msg = std::move(*pending_state_);
      pending_state_.reset();
      write(std::move(msg));
    } else if (closing_) {
      do_close();
    }
  }

  void do_close() {
    if (closed_) return;
    closed_ = true;
    ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) { self->release(); });
  }

  void release() {
    if (busy_) return;
    if (server_->active.lock().get() == this) server_->active.reset();
  }

  websocket::stream<tcp::socket> ws_;
  std::shared_ptr<BridgeServer::Impl> server_;
  bool busy_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
  beast::flat_buffer in_;
  std::string out_;
  bool writing_ = false;
  bool closing_ = false;
  bool closed_ = false;
  std::deque<std::string> control_;
  std::optional<std::string> pending_state_;
  std::size_t dropped_ = 0;
  bool started_ = false;
  bool episode_running_ = false;
  std::optional<double> last_t_;
  std::shared_ptr<Channel> channel_ = std::make_shared<Channel>();
};

void BridgeServer::Impl::do_accept() {
  acceptor.async_accept([self = shared_from_this()](beast::error_code ec, tcp::socket socket) {
    if (ec) {
      if (ec != net::error::operation_aborted) self->do_accept();
      return;
    }
    const bool busy = !self->active.expired();
    auto session = std::make_shared<Session>(std::move(socket), self, busy);
    if (!busy) self->active = session;
    session->open();
    self->do_accept();
  });
}

BridgeServer::BridgeServer(BenchConfig config, std::filesystem::path out_dir)
    : impl_(std::make_shared<Impl>(std::move(config), std::move(out_dir))) {}

BridgeServer::~BridgeServer() { stop(); }

unsigned short BridgeServer::listen(const std::string& host, unsigned short port) {
  beast::error_code ec;
  const auto address = net::ip::make_address(host, ec);
  if (ec) throw ConfigError("bad bridge host '" + host + "'");
  const tcp::endpoint ep(address, port);
  auto& a = impl_->acceptor;
  a.open(ep.protocol(), ec);
  if (!ec) a.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) a.bind(ep, ec);
  if (!ec) a.listen(net::socket_base::max_listen_connections, ec);
  if (ec) throw ConfigError("cannot listen on " + host + ":" + std::to_string(port) + ": " + ec.message());
  impl_->do_accept();
  return a.local_endpoint().port();
}

void BridgeServer::run() {
  auto guard = net::make_work_guard(impl_->io);
  impl_->io.run();
}

void BridgeServer::start() {
  impl_->io_thread = std::thread([this] { run(); });
}

void BridgeServer::stop() {
  if (!impl_) return;
  impl_->io.stop();
  if (impl_->io_thread.joinable()) impl_->io_thread.join();
  {
    // A running episode ends as a disconnect so its log is still written.
    std::lock_guard lock(impl_->running_mutex);
    if (impl_->running) impl_->running->disconnected = true;
    if (impl_->sim_thread.joinable()) impl_->sim_thread.join();
  }
  impl_->writer.reset();  // drains pending writes
  beast::error_code ec;
  impl_->acceptor.close(ec);
}

std::vector<std::filesystem::path> BridgeServer::written_logs() const {
  std::lock_guard lock(impl_->logs_mutex);
  return impl_->logs;
}

bool BridgeServer::wait_for_logs(std::size_t count, double timeout_seconds) const {
  std::unique_lock lock(impl_->logs_mutex);
  return impl_->logs_cv.wait_for(lock, std::chrono::duration<double>(timeout_seconds),
                                 [&] { return impl_->logs.size() >= count; });
}

}  // namespace flipperbench
