#pragma once

#include <string>
#include <vector>

namespace svgen {

struct SuiteResult {
    std::string name;
    double max_rel_err = 0.0;
    bool pass = false;
};

// Finite-difference verification of every layer and of the assembled
// generator / discriminator, at each given frame count, in 64-bit.
// `perturb` != 0 appends a fixture whose analytic gradient is deliberately
// corrupted by that amount; it is expected to fail.
std::vector<SuiteResult> run_gradcheck_suite(const std::vector<int>& frame_counts, double tol, double perturb = 0.0);

} // namespace svgen
