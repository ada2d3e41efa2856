#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <system_error>

namespace fedspectrum {

enum class NodeKind { sensor, primary_user, central };

constexpr std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::sensor: return "sensor";
    case NodeKind::primary_user: return "primary_user";
    case NodeKind::central: return "central";
  }
  return "?";
}

struct Placement {
  int node_id = 0;
  NodeKind kind = NodeKind::sensor;
  double x_m = 0.0;
  double y_m = 0.0;

  friend bool operator==(const Placement&, const Placement&) = default;
};

inline double distance_m(const Placement& a, const Placement& b) {
  return std::hypot(a.x_m - b.x_m, a.y_m - b.y_m);
}

/// Shortest decimal text that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

}  // namespace fedspectrum
