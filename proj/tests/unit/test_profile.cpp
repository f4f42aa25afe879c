#include <cmath>
#include <numbers>

#include "doctest.h"
#include "zrp/profile.hpp"

using namespace zrp;

TEST_CASE("profile component parsing") {
  const ProfileComponent c = ProfileComponent::parse("0.5 + 0.2*cos(2*pi*u)");
  CHECK(c.a == doctest::Approx(0.5));
  CHECK(c.b == doctest::Approx(0.2));
  CHECK(c.c == 0.0);
  CHECK(c.k == 1);
  CHECK(c(0.0) == doctest::Approx(0.7));
  CHECK(c(0.5) == doctest::Approx(0.3));

  const ProfileComponent s = ProfileComponent::parse("0.1 + 0.05*sin(2*pi*3*u)");
  CHECK(s.k == 3);
  CHECK(s(1.0 / 12.0) == doctest::Approx(0.15));
  CHECK(ProfileComponent::parse("0.25")(0.3) == doctest::Approx(0.25));
}

TEST_CASE("profile round trip through text and JSON") {
  const ProfileComponent c{0.3, -0.1, 0.05, 2};
  const ProfileComponent back = ProfileComponent::parse(c.to_string());
  CHECK(back.a == doctest::Approx(c.a));
  CHECK(back.b == doctest::Approx(c.b));
  CHECK(back.c == doctest::Approx(c.c));
  CHECK(back.k == c.k);

  const Profile p(c, ProfileComponent{0.2});
  const Profile q = Profile::from_json(p.to_json());
  for (double u : {0.0, 0.13, 0.5, 0.77}) {
    CHECK(q(u)[0] == doctest::Approx(p(u)[0]));
    CHECK(q(u)[1] == doctest::Approx(p(u)[1]));
  }
}

TEST_CASE("profile extrema") {
  const Profile p(ProfileComponent{0.2, 0.025}, ProfileComponent{0.2, 0.025});
  CHECK(p.max_l1() == doctest::Approx(0.45));
  CHECK(p.min_component() == doctest::Approx(0.175));
  const Profile c = Profile::constant({0.1, 0.3});
  CHECK(c.max_l1() == doctest::Approx(0.4));
  CHECK(c.min_component() == doctest::Approx(0.1));
}
