#pragma once

#include <doctest.h>

#include "spacecheck/error.hpp"

namespace spacecheck::testing {

// Runs fn and returns the code of the Error it throws; fails the test if it
// returns normally.
template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Usage;
}

}  // namespace spacecheck::testing
