#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fedkgc {

struct GradCheckOptions {
  double eps = 1e-4;
  int seeds = 10;
  bool corrupt = false;  // inject a deliberate gradient error to prove detection
};

struct GradCheckSeedResult {
  std::uint64_t seed = 0;
  double max_rel_err = 0.0;  // coordinates with max(|analytic|, |fd|) >= 1e-6
  double max_abs_err = 0.0;  // remaining near-zero coordinates
  std::string worst_param;
  std::uint32_t worst_row = 0;
  int worst_col = 0;
  bool pass = false;
};

struct GradCheckReport {
  std::vector<GradCheckSeedResult> seeds;
  double rel_tolerance = 1e-5;
  double abs_tolerance = 1e-8;
  double max_rel_err = 0.0;
  bool pass = false;
};

GradCheckReport run_gradcheck(const GradCheckOptions& opt);

}  // namespace fedkgc
