#pragma once

#include <array>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "zrp/types.hpp"

namespace zrp {

/// a + b cos(2π k u) + c sin(2π k u).
struct ProfileComponent {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  int k = 1;

  double operator()(double u) const;
  /// Parses "a + b*cos(2*pi*k*u) + c*sin(2*pi*k*u)"; any term may be omitted,
  /// k defaults to 1 and "2*pi*u", "2pi*k*u" are accepted.
  static ProfileComponent parse(std::string_view text);
  std::string to_string() const;
};

/// Initial density profile on the torus; depends on the first coordinate only.
class Profile {
 public:
  Profile() = default;
  Profile(ProfileComponent species1, ProfileComponent species2)
      : components_{species1, species2} {}
  static Profile constant(Vec2 rho);

  Vec2 operator()(double u) const { return {components_[0](u), components_[1](u)}; }
  const ProfileComponent& component(int species) const { return components_[species]; }

  /// Max |ρ(u)|_1 and min component over a uniform grid of `points` values.
  double max_l1(int points = 1024) const;
  double min_component(int points = 1024) const;

  /// Accepts {"rho1": <string or {a,b,c,k}>, "rho2": ...}.
  static Profile from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

 private:
  std::array<ProfileComponent, 2> components_{};
};

}  // namespace zrp
