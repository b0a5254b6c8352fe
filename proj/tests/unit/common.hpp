#pragma once

#include "apm/error.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <functional>

namespace apm::testing {

// Error code raised by `f`; records a failure when nothing is thrown.
inline ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an apm::Error";
  return ErrorCode::InvalidArgument;
}

}  // namespace apm::testing
