#pragma once

#include <cstddef>
#include <vector>

#include "jsrcert/matcore.hpp"

namespace jsrcert {

/// One observed transition: initial state x and its one-step successor y.
struct OneStepSample {
    Vec x;
    Vec y;
};

enum class ExecPolicy { Auto, Serial, Parallel };

double quad_form(const SymMatrix& p, const Vec& v);

struct MaxRatio {
    double ratio_sq = 0.0;  // max_i (y_i' P y_i) / (x_i' P x_i)
    std::size_t index = 0;  // attaining sample; ties resolve to the lowest index
};

/// Serial reference implementation. The parallel kernel must reproduce it bit
/// for bit (per-sample arithmetic is identical and the reduction is an exact
/// max with deterministic tie-breaking), which the tests assert.
MaxRatio max_ratio_sq_serial(const std::vector<OneStepSample>& samples, const SymMatrix& p);
MaxRatio max_ratio_sq_parallel(const std::vector<OneStepSample>& samples, const SymMatrix& p);
MaxRatio max_ratio_sq(const std::vector<OneStepSample>& samples, const SymMatrix& p,
                      ExecPolicy policy = ExecPolicy::Auto);

}  // namespace jsrcert
