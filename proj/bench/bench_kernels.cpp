// Serial vs OpenMP kernel comparison: worst-ratio scans at the sample counts
// the solvers actually see, plus larger sizes where threading pays off.
// Also re-checks that both paths return identical bits.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "jsrcert/kernels.hpp"
#include "jsrcert/rng.hpp"

using namespace jsrcert;

namespace {

std::vector<OneStepSample> make_samples(int n, std::size_t count, Rng& rng) {
    std::vector<OneStepSample> out;
    out.reserve(count);
    for (std::size_t c = 0; c < count; ++c) {
        OneStepSample s;
        s.x.resize(n);
        s.y.resize(n);
        for (int i = 0; i < n; ++i) {
            s.x[i] = rng.gaussian();
            s.y[i] = 0.9 * rng.gaussian();
        }
        out.push_back(std::move(s));
    }
    return out;
}

template <class F>
double time_best_of(int reps, F&& f) {
    double best = 1e30;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best,
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp: %d thread(s)\n", omp_get_max_threads());
#else
    std::printf("openmp: not compiled in\n");
#endif
    std::printf("%8s %6s %12s %12s %9s %s\n", "samples", "dim", "serial_ms", "parallel_ms", "speedup",
                "bits");

    Rng rng(1);
    for (int n : {3, 5}) {
        for (std::size_t count : {200u, 3200u, 100000u, 1000000u}) {
            auto samples = make_samples(n, count, rng);
            SymMatrix p = SymMatrix::diag(Vec(n, 2.0));

            MaxRatio serial_out{};
            MaxRatio parallel_out{};
            const double ts =
                time_best_of(5, [&] { serial_out = max_ratio_sq_serial(samples, p); });
            const double tp =
                time_best_of(5, [&] { parallel_out = max_ratio_sq_parallel(samples, p); });
            const bool same =
                serial_out.ratio_sq == parallel_out.ratio_sq && serial_out.index == parallel_out.index;
            std::printf("%8zu %6d %12.4f %12.4f %8.2fx %s\n", count, n, ts * 1e3, tp * 1e3,
                        ts / tp, same ? "identical" : "MISMATCH");
            if (!same) return 1;
        }
    }
    return 0;
}
