#include "cvsim/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "cvsim/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cvsim {

std::vector<double> SweepAxis::values() const {
    if (count < 1) throw DomainError("sweep axis: count must be >= 1");
    if (!(std::isfinite(lo) && std::isfinite(hi))) throw DomainError("sweep axis: range must be finite");
    std::vector<double> v;
    v.reserve(static_cast<size_t>(count));
    if (count == 1) {
        v.push_back(lo);
        return v;
    }
    for (int i = 0; i < count; ++i) v.push_back(lo + (hi - lo) * i / (count - 1));
    return v;
}

namespace {

std::string format_cell(double x) {
    if (std::isnan(x)) return "NaN";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string format_row(double x1, double x2, const SweepCell& cell) {
    std::string row = format_cell(x1) + "," + format_cell(x2);
    for (double m : cell.metrics) row += "," + format_cell(m);
    row += cell.stable ? ",1" : ",0";
    row += "\n";
    return row;
}

std::string header(const SweepAxis& a1, const SweepAxis& a2,
                   const std::vector<std::string>& metric_names) {
    std::string h = a1.name + "," + a2.name;
    for (const std::string& m : metric_names) h += "," + m;
    h += ",stable\n";
    return h;
}

} // namespace

std::string run_sweep_serial(const SweepAxis& a1, const SweepAxis& a2,
                             const std::vector<std::string>& metric_names,
                             const SweepEval& eval) {
    const std::vector<double> v1 = a1.values();
    const std::vector<double> v2 = a2.values();
    std::string out = header(a1, a2, metric_names);
    for (double x1 : v1)
        for (double x2 : v2) out += format_row(x1, x2, eval(x1, x2));
    return out;
}

std::string run_sweep_parallel(const SweepAxis& a1, const SweepAxis& a2,
                               const std::vector<std::string>& metric_names,
                               const SweepEval& eval, int jobs) {
    const std::vector<double> v1 = a1.values();
    const std::vector<double> v2 = a2.values();
    const long long total = static_cast<long long>(v1.size()) * static_cast<long long>(v2.size());
    std::vector<std::string> rows(static_cast<size_t>(total));
#ifdef _OPENMP
    if (jobs > 0) omp_set_num_threads(jobs);
#pragma omp parallel for schedule(dynamic)
#else
    (void)jobs;
#endif
    for (long long idx = 0; idx < total; ++idx) {
        const size_t i = static_cast<size_t>(idx) / v2.size();
        const size_t j = static_cast<size_t>(idx) % v2.size();
        rows[static_cast<size_t>(idx)] = format_row(v1[i], v2[j], eval(v1[i], v2[j]));
    }
    std::string out = header(a1, a2, metric_names);
    for (const std::string& r : rows) out += r; // grid order, thread-count independent
    return out;
}

} // namespace cvsim
