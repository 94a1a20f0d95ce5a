#include "jsrcert/kernels.hpp"

#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace jsrcert {

double quad_form(const SymMatrix& p, const Vec& v) {
    const int n = p.dim();
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row += p(i, j) * v[j];
        s += v[i] * row;
    }
    return s;
}

namespace {

inline double sample_ratio_sq(const SymMatrix& p, const OneStepSample& s) {
    return quad_form(p, s.y) / quad_form(p, s.x);
}

}  // namespace

MaxRatio max_ratio_sq_serial(const std::vector<OneStepSample>& samples, const SymMatrix& p) {
    if (samples.empty()) throw std::invalid_argument("max_ratio_sq: empty sample set");
    MaxRatio best{sample_ratio_sq(p, samples[0]), 0};
    for (std::size_t i = 1; i < samples.size(); ++i) {
        const double r = sample_ratio_sq(p, samples[i]);
        if (r > best.ratio_sq) best = {r, i};
    }
    return best;
}

MaxRatio max_ratio_sq_parallel(const std::vector<OneStepSample>& samples, const SymMatrix& p) {
    if (samples.empty()) throw std::invalid_argument("max_ratio_sq: empty sample set");
#ifdef _OPENMP
    MaxRatio best{sample_ratio_sq(p, samples[0]), 0};
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(samples.size());
#pragma omp parallel
    {
        MaxRatio local{best.ratio_sq, 0};
        bool has_local = false;
#pragma omp for nowait
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const double r = sample_ratio_sq(p, samples[static_cast<std::size_t>(i)]);
            if (!has_local || r > local.ratio_sq ||
                (r == local.ratio_sq && static_cast<std::size_t>(i) < local.index)) {
                local = {r, static_cast<std::size_t>(i)};
                has_local = true;
            }
        }
#pragma omp critical(jsrcert_max_ratio)
        {
            if (has_local && (local.ratio_sq > best.ratio_sq ||
                              (local.ratio_sq == best.ratio_sq && local.index < best.index))) {
                best = local;
            }
        }
    }
    return best;
#else
    return max_ratio_sq_serial(samples, p);
#endif
}

MaxRatio max_ratio_sq(const std::vector<OneStepSample>& samples, const SymMatrix& p, ExecPolicy policy) {
    bool parallel = false;
    switch (policy) {
        case ExecPolicy::Serial:
            parallel = false;
            break;
        case ExecPolicy::Parallel:
            parallel = true;
            break;
        case ExecPolicy::Auto:
#ifdef _OPENMP
            parallel = samples.size() >= 1024 && omp_get_max_threads() > 1 && !omp_in_parallel();
#else
            parallel = false;
#endif
            break;
    }
    return parallel ? max_ratio_sq_parallel(samples, p) : max_ratio_sq_serial(samples, p);
}

}  // namespace jsrcert
