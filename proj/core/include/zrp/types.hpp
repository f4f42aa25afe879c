#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Core>

namespace zrp {

using Count = std::uint32_t;

/// Occupation of one site: number of particles of each species.
struct Counts {
  Count k1 = 0;
  Count k2 = 0;

  constexpr Count total() const { return k1 + k2; }
  constexpr Count operator[](int species) const { return species == 0 ? k1 : k2; }
  constexpr bool operator==(const Counts&) const = default;
};

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline double l1(const Vec2& v) { return std::abs(v[0]) + std::abs(v[1]); }

}  // namespace zrp
