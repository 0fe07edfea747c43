#pragma once

#include <cmath>
#include <compare>

namespace agvsl {

struct Vec2
{
  double x{0.0};
  double y{0.0};

  constexpr Vec2 operator+ (Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator- (Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator* (double k) const { return {x * k, y * k}; }
  constexpr bool operator== (const Vec2 &) const = default;

  double Norm () const { return std::hypot (x, y); }
};

inline double
Distance (Vec2 a, Vec2 b)
{
  return (a - b).Norm ();
}

} // namespace agvsl
