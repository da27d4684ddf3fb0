#pragma once

#include "kometo/fidelity.hpp"

#include <string>
#include <vector>

namespace kometo {

// Available synthetic objectives, alphabetically.
std::vector<std::string> benchmark_names();

// The standard argmax of a named objective (maximization orientation).
Point benchmark_peak(const std::string& name);

// A named synthetic objective as a maximization target on its standard box.
// Below `top_cost` the fidelity blends toward the objective's standard
// low-fidelity variant, f_c = (1-w)f + w*f_low with w = min(1, phi(model, c)
// / calibration); the calibration inflates the grid maximum of |f - f_low|
// by 1.25, so |f - f_c| <= phi(model, c) holds with margin everywhere the
// grid is representative.  At or above `top_cost` the observation is exact.
MultiFidelityFunction benchmark(const std::string& name,
                                const CostToBiasModel& model,
                                double top_cost);

}  // namespace kometo
