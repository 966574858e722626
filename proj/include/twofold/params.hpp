#pragma once

#include "twofold/core.hpp"

namespace twofold {

// Rates of the piecewise-linear model. Both fields are linear, the switching
// plane is {y=0}, and b, beta control the fold structure on it.
struct NormalFormParams {
  double b = 1.0;
  double beta = 1.0;
  double c = 0.0;
  double gamma = 0.0;

  void validate() const {
    if (!(b > 0.0) || !(beta > 0.0))
      throw error(errc::config_error, "b and beta must be positive");
  }
};

}  // namespace twofold
