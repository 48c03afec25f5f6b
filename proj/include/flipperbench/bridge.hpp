#pragma once

// Teleoperation endpoint: one operator at a time over a WebSocket at /session.
// Text JSON messages; see docs/wire_protocol.md.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "flipperbench/command.hpp"
#include "flipperbench/config.hpp"
#include "flipperbench/policies.hpp"
#include "flipperbench/sim.hpp"

namespace flipperbench {

inline constexpr std::string_view kWireSchema = "flipperbench.wire/1";

// Message codecs, shared by the server and by test clients.
std::string encode_hello(const BenchConfig& config, const SimContext& ctx);
std::string encode_state(const RobotState& state, const PolicyOutput& out);
std::string encode_cmd(const CommandFrame& frame);
std::string encode_error(std::string_view code, std::string_view message);
// Throws ParseError when the text is not a well-formed cmd for this layout.
CommandFrame decode_cmd(std::string_view text, const ControllerLayout& layout);

class BridgeServer {
 public:
  // Logs of finished sessions go to out_dir.
  BridgeServer(BenchConfig config, std::filesystem::path out_dir);
  ~BridgeServer();
  BridgeServer(const BridgeServer&) = delete;
  BridgeServer& operator=(const BridgeServer&) = delete;

  // Binds the listening socket; port 0 picks a free one. Returns the bound port.
  unsigned short listen(const std::string& host, unsigned short port);
  // Serves until stop(). listen() must have been called.
  void run();
  // run() on a background thread.
  void start();
  void stop();

  // Logs written so far, in completion order.
  std::vector<std::filesystem::path> written_logs() const;
  // Blocks until `count` sessions have written their logs or the timeout passes.
  bool wait_for_logs(std::size_t count, double timeout_seconds) const;

  struct Impl;  // shared with the session objects in bridge.cpp

 private:
  std::shared_ptr<Impl> impl_;
};

}  // namespace flipperbench
