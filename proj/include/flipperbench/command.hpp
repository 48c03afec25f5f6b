#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace flipperbench {

// One sample of operator input: binary buttons and analog axes in [-1, 1].
struct CommandFrame {
  double t = 0;
  std::vector<std::uint8_t> buttons;
  std::vector<double> axes;

  bool operator==(const CommandFrame&) const = default;
};

// Names of the buttons and axes carried by every frame of a session, and the
// deflection above which an axis counts as pressed.
struct ControllerLayout {
  std::vector<std::string> buttons;
  std::vector<std::string> axes;
  double deadzone = 0.1;

  // Xbox-style pad: A B X Y L1 R1 L2 R2 SELECT START, sticks LX LY RX RY.
  static ControllerLayout gamepad();

  int button(std::string_view name) const;  // throws ConfigError
  int axis(std::string_view name) const;    // throws ConfigError
  std::size_t width() const { return buttons.size() + axes.size(); }
  CommandFrame neutral(double t) const;
};

// Pressed vector b of length m_b + m_a: buttons as-is, axes thresholded.
std::vector<std::uint8_t> pressed_vector(const CommandFrame& frame, double deadzone);
int pressed_count(const CommandFrame& frame, double deadzone);

}  // namespace flipperbench
