#pragma once

#include <doctest.h>

#include <functional>

#include "nanotrap/atom_cs.hpp"
#include "nanotrap/error.hpp"
#include "nanotrap/fiber_mode.hpp"

namespace test {

inline const nanotrap::AtomicData& cesium() {
  static const nanotrap::AtomicData data = nanotrap::load_atomic_data(nanotrap::default_atomic_data_path());
  return data;
}

inline nanotrap::FiberSpec fiber(double radius = 250e-9) { return {radius, cesium().silica, 1.0}; }

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline bool raises(nanotrap::Errc code, const std::function<void()>& f) {
  try {
    f();
  } catch (const nanotrap::Error& e) {
    return e.code() == code;
  }
  return false;
}

}  // namespace test
