#include <doctest.h>

#include "sandpile/verify.hpp"

TEST_CASE("invariant suite passes") {
  for (const auto& r : sandpile::verify_suite(1)) {
    INFO(r.name << ": " << r.detail);
    CHECK(r.pass);
  }
}
