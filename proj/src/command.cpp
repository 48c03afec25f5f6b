#include "flipperbench/command.hpp"

#include <cmath>

#include "flipperbench/error.hpp"

namespace flipperbench {

ControllerLayout ControllerLayout::gamepad() {
  ControllerLayout l;
  l.buttons = {"A", "B", "X", "Y", "L1", "R1", "L2", "R2", "SELECT", "START"};
  l.axes = {"LX", "LY", "RX", "RY"};
  return l;
}

int ControllerLayout::button(std::string_view name) const {
  for (std::size_t i = 0; i < buttons.size(); ++i) {
    if (buttons[i] == name) return int(i);
  }
  throw ConfigError("controller has no button '" + std::string(name) + "'");
}

int ControllerLayout::axis(std::string_view name) const {
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (axes[i] == name) return int(i);
  }
  throw ConfigError("controller has no axis '" + std::string(name) + "'");
}

CommandFrame ControllerLayout::neutral(double t) const {
  return CommandFrame{t, std::vector<std::uint8_t>(buttons.size(), 0),
                      std::vector<double>(axes.size(), 0.0)};
}

std::vector<std::uint8_t> pressed_vector(const CommandFrame& frame, double deadzone) {
  std::vector<std::uint8_t> b;
  b.reserve(frame.buttons.size() + frame.axes.size());
  for (auto v : frame.buttons) b.push_back(v ? 1 : 0);
  for (double a : frame.axes) b.push_back(std::abs(a) > deadzone ? 1 : 0);
  return b;
}

int pressed_count(const CommandFrame& frame, double deadzone) {
  int n = 0;
  for (auto v : frame.buttons) n += v ? 1 : 0;
  for (double a : frame.axes) n += std::abs(a) > deadzone ? 1 : 0;
  return n;
}

}  // namespace flipperbench
