#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <json.hpp>
#include <random>
#include <thread>

#include "fixtures.hpp"
#include "flipperbench/bridge.hpp"
#include "flipperbench/logstore.hpp"
#include "flipperbench/metrics.hpp"

using namespace flipperbench;
using namespace fixtures;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = boost::asio::ip::tcp;
using Json = nlohmann::ordered_json;

namespace {

// Blocking test client for /session.
class Client {
 public:
  explicit Client(unsigned short port) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    boost::asio::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/session");
  }
  void send(const std::string& text) { ws_.write(boost::asio::buffer(text)); }
  Json read() {
    beast::flat_buffer buf;
    ws_.read(buf);
    return Json::parse(beast::buffers_to_string(buf.data()));
  }
  // Next message that is not a state update.
  Json next() {
    for (;;) {
      Json j = read();
      if (j["type"] != "state") return j;
    }
  }
  void drop() {
    beast::error_code ignored;
    ws_.next_layer().shutdown(tcp::socket::shutdown_both, ignored);
    ws_.next_layer().close(ignored);
  }

 private:
  boost::asio::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
};

BenchConfig bridge_config(double time_scale) {
  BenchConfig c;
  c.arena = flat_arena(3.0);
  c.bridge.time_scale = time_scale;
  c.bridge.state_rate = 20.0;
  return c;
}

struct Served {
  explicit Served(const BenchConfig& config, const std::string& name)
      : dir(temp_dir(name)), server(config, dir) {
    port = server.listen("127.0.0.1", 0);
    server.start();
  }
  ~Served() { server.stop(); }
  std::filesystem::path dir;
  BridgeServer server;
  unsigned short port = 0;
};

std::vector<CommandFrame> logged_frames(const EpisodeLog& log) {
  std::vector<CommandFrame> out;
  for (const auto& t : log.ticks) {
    for (const auto& lf : t.cmds) out.push_back(lf.frame);
  }
  return out;
}

}  // namespace

TEST_CASE("cmd codec round trip") {
  const auto layout = ControllerLayout::gamepad();
  CommandFrame f = layout.neutral(1.25);
  f.buttons[2] = 1;
  f.axes[1] = -0.75;
  CHECK(decode_cmd(encode_cmd(f), layout) == f);
  CHECK_THROWS_AS(decode_cmd("{\"type\":\"cmd\",\"t\":0,\"b\":[1],\"a\":[]}", layout), ParseError);
  CHECK_THROWS_AS(decode_cmd("{\"type\":\"start\"}", layout), ParseError);
  CHECK_THROWS_AS(decode_cmd("not json", layout), ParseError);
}

TEST_CASE("hello, then a second operator is turned away") {
  Served s(bridge_config(1.0), "bridge_busy");
  Client a(s.port);
  const Json hello = a.next();
  CHECK(hello["type"] == "hello");
  CHECK(hello["schema"] == std::string(kWireSchema));
  CHECK(hello["arenas"][0]["id"] == "flat");
  CHECK(hello["controller"]["buttons"].size() == 10);

  Client b(s.port);
  const Json err = b.next();
  CHECK(err["type"] == "error");
  CHECK(err["code"] == "busy");
}

TEST_CASE("bad cmd is reported and the session carries on") {
  Served s(bridge_config(1.0), "bridge_bad_cmd");
  Client c(s.port);
  REQUIRE(c.next()["type"] == "hello");
  c.send(encode_cmd(ControllerLayout::gamepad().neutral(0.0)));
  CHECK(c.next()["code"] == "not_started");
  c.send(R"({"type":"start","method":"mfc-discrete"})");
  REQUIRE(c.next()["type"] == "start");
  c.send("{nonsense");
  CHECK(c.next()["code"] == "bad_cmd");
  c.send(R"({"type":"cmd","t":0.1,"b":[1],"a":[0]})");
  CHECK(c.next()["code"] == "bad_cmd");
  auto f = ControllerLayout::gamepad().neutral(0.2);
  f.buttons[0] = 1;
  c.send(encode_cmd(f));
  c.send(R"({"type":"end"})");
  const Json end = c.next();
  CHECK(end["type"] == "end");
  CHECK(end["status"] == "aborted");
  REQUIRE(s.server.wait_for_logs(1, 10.0));
  const auto log = read_log(s.server.written_logs()[0]);
  const auto frames = logged_frames(log);
  REQUIRE(frames.size() == 1);
  CHECK(frames[0] == f);
}

TEST_CASE("no commands: the sector times out with zero load") {
  auto config = bridge_config(200.0);
  config.episode.sector_timeout = 3.0;
  Served s(config, "bridge_timeout");
  Client c(s.port);
  REQUIRE(c.next()["type"] == "hello");
  c.send(R"({"type":"start","method":"mfc-continuous"})");
  REQUIRE(c.next()["type"] == "start");
  const Json end = c.next();
  CHECK(end["status"] == "failed");
  CHECK(end["reason"] == "timeout");
  REQUIRE(s.server.wait_for_logs(1, 10.0));
  const auto log = read_log(s.server.written_logs()[0]);
  CHECK(log.footer.status == EpisodeStatus::kFailed);
  CHECK(cognitive_load(logged_frames(log), log.header.deadzone) == 0.0);
  const auto groups = sector_slices(log);
  REQUIRE(groups.size() == 1);
  CHECK_FALSE(groups[0].traversed);
}

TEST_CASE("disconnect mid-episode leaves an aborted log") {
  Served s(bridge_config(1.0), "bridge_disconnect");
  {
    Client c(s.port);
    REQUIRE(c.next()["type"] == "hello");
    c.send(R"({"type":"start"})");
    REQUIRE(c.next()["type"] == "start");
    c.read();  // one state update: the episode is running
    c.drop();
  }
  REQUIRE(s.server.wait_for_logs(1, 10.0));
  const auto log = read_log(s.server.written_logs()[0]);
  CHECK(log.footer.status == EpisodeStatus::kAborted);
  CHECK(log.footer.reason == "operator disconnected");
  CHECK(log.header.method == "mfc-continuous");

  // The slot frees up once the session has wound down.
  bool hello = false;
  for (int i = 0; i < 100 && !hello; ++i) {
    Client next(s.port);
    hello = next.next()["type"] == "hello";
    if (!hello) std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  CHECK(hello);
}

TEST_CASE("load from a streamed session equals load of the sent frames") {
  Served s(bridge_config(1.0), "bridge_cl");
  const auto layout = ControllerLayout::gamepad();
  std::mt19937_64 rng(12);
  std::bernoulli_distribution press(0.3);
  std::uniform_real_distribution<double> axis(-1.0, 1.0);
  std::vector<CommandFrame> sent;
  for (int i = 0; i < 150; ++i) {
    CommandFrame f = layout.neutral(0.013 * i);
    for (auto& b : f.buttons) b = press(rng);
    f.axes[0] = axis(rng);
    sent.push_back(f);
  }
  Client c(s.port);
  REQUIRE(c.next()["type"] == "hello");
  c.send(R"({"type":"start","method":"mfc-discrete"})");
  REQUIRE(c.next()["type"] == "start");
  for (const auto& f : sent) c.send(encode_cmd(f));
  c.send(R"({"type":"end"})");
  CHECK(c.next()["type"] == "end");
  REQUIRE(s.server.wait_for_logs(1, 10.0));
  const auto log = read_log(s.server.written_logs()[0]);
  const auto got = logged_frames(log);
  CHECK(got == sent);
  CHECK(cognitive_load(got, layout.deadzone) ==
        doctest::Approx(cognitive_load(sent, layout.deadzone)).epsilon(1e-9));
}
