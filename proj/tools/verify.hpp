#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pbergman/kernels.hpp"

namespace pbergman::cli {

struct CheckResult {
  std::string check;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct VerifyOptions {
  double tol_scale = 1.0;    ///< multiplies every bound
  std::uint64_t seed = 1;    ///< random probe pairs
  double rho_perturb = 0.0;  ///< relative error injected into rho of the closed form
};

/// Runs the invariant suite on one configuration. Every check reports a
/// value and passes iff value < bound * tol_scale.
std::vector<CheckResult> run_verify_suite(const KernelContext& ctx, const VerifyOptions& options);

}  // namespace pbergman::cli
