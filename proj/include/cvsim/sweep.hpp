#pragma once

#include <functional>
#include <string>
#include <vector>

namespace cvsim {

/// One axis of a grid sweep over a config parameter.
struct SweepAxis {
    std::string name;
    double lo = 0, hi = 0;
    int count = 0;
    std::vector<double> values() const;
};

/// Result of evaluating one grid point: metric columns plus a stability flag.
struct SweepCell {
    std::vector<double> metrics;
    bool stable = true;
};

/// Grid evaluator: metrics for (axis1 value, axis2 value). Must be pure; the
/// engine may call it from several threads.
using SweepEval = std::function<SweepCell(double, double)>;

/// Row-major CSV with header `axis1,axis2,<metric...>,stable`. Unstable
/// points carry NaN metric cells and stable=0. Output is byte-identical for
/// any worker count: cells are formatted per point and joined in grid order.
std::string run_sweep_parallel(const SweepAxis& a1, const SweepAxis& a2,
                               const std::vector<std::string>& metric_names,
                               const SweepEval& eval, int jobs);

/// Reference implementation: same contract, plain loop. Kept for testing the
/// parallel path and for the benchmark comparison.
std::string run_sweep_serial(const SweepAxis& a1, const SweepAxis& a2,
                             const std::vector<std::string>& metric_names,
                             const SweepEval& eval);

} // namespace cvsim
