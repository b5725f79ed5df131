#include "sdv/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace sdv {

Histogram histogram(const std::vector<double>& errors, std::size_t bins) {
    if (errors.empty())
        throw std::invalid_argument("histogram: no samples");
    if (bins == 0)
        throw std::invalid_argument("histogram: bins must be >= 1");

    auto [mn_it, mx_it] = std::minmax_element(errors.begin(), errors.end());
    double lo = *mn_it, hi = *mx_it;
    double width = (hi - lo) / static_cast<double>(bins);

    Histogram h;
    h.edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i)
        h.edges[i] = lo + width * static_cast<double>(i);
    h.edges.back() = hi;
    h.counts.assign(bins, 0);

    for (double e : errors) {
        std::size_t bin = 0;
        if (width > 0.0 && e > lo) {
            // boundary values belong to the lower bin: bin i covers (edge_i, edge_{i+1}]
            bin = static_cast<std::size_t>(std::ceil((e - lo) / width)) - 1;
            if (bin >= bins) bin = bins - 1;
            while (bin > 0 && e <= h.edges[bin]) --bin;      // fp guard
            while (bin + 1 < bins && e > h.edges[bin + 1]) ++bin;
        }
        ++h.counts[bin];
    }
    return h;
}

EvalReport evaluate(const std::vector<double>& actual, const std::vector<double>& predicted,
                    double epsilon, std::size_t histogram_bins) {
    if (actual.empty())
        throw std::invalid_argument("evaluate: no samples");
    if (actual.size() != predicted.size())
        throw std::invalid_argument("evaluate: sequence lengths differ");

    EvalReport r;
    r.n_samples = actual.size();

    double sq_rel = 0.0, abs_rel = 0.0, sq_abs = 0.0, abs_abs = 0.0;
    std::size_t n_rel = 0;
    std::vector<double> errors(actual.size());
    for (std::size_t i = 0; i < actual.size(); ++i) {
        double e = actual[i] - predicted[i];
        errors[i] = e;
        sq_abs += e * e;
        abs_abs += std::abs(e);
        if (std::abs(actual[i]) >= epsilon) {
            double rel = e / actual[i];
            sq_rel += rel * rel;
            abs_rel += std::abs(rel);
            ++n_rel;
        } else {
            ++r.n_skipped;
        }
    }

    double n = static_cast<double>(actual.size());
    r.mse_abs = sq_abs / n;
    r.mae_abs = abs_abs / n;
    r.rmse_abs = std::sqrt(r.mse_abs);
    if (n_rel > 0) {
        r.mse_rel = sq_rel / static_cast<double>(n_rel);
        r.mae_rel = abs_rel / static_cast<double>(n_rel);
        r.rmse_rel = std::sqrt(r.mse_rel);
    }
    r.error_histogram = histogram(errors, histogram_bins);
    return r;
}

namespace {

std::string full_precision(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace

std::string EvalReport::table() const {
    char buf[256];
    std::ostringstream out;
    if (!model_label.empty()) out << "model:   " << model_label << '\n';
    out << "horizon: " << horizon << " h\n";
    out << "samples: " << n_samples << " (" << n_skipped << " skipped for relative metrics)\n";
    std::snprintf(buf, sizeof(buf), "%-10s %14s %14s\n", "metric", "relative", "absolute");
    out << buf;
    std::snprintf(buf, sizeof(buf), "%-10s %14.6g %14.6g\n", "MSE", mse_rel, mse_abs);
    out << buf;
    std::snprintf(buf, sizeof(buf), "%-10s %14.6g %14.6g\n", "MAE", mae_rel, mae_abs);
    out << buf;
    std::snprintf(buf, sizeof(buf), "%-10s %14.6g %14.6g\n", "RMSE", rmse_rel, rmse_abs);
    out << buf;
    return out.str();
}

std::string EvalReport::key_values() const {
    std::ostringstream out;
    out << "model=" << model_label << '\n';
    out << "horizon=" << horizon << '\n';
    out << "n_samples=" << n_samples << '\n';
    out << "n_skipped=" << n_skipped << '\n';
    out << "mse_rel=" << full_precision(mse_rel) << '\n';
    out << "mae_rel=" << full_precision(mae_rel) << '\n';
    out << "rmse_rel=" << full_precision(rmse_rel) << '\n';
    out << "mse_abs=" << full_precision(mse_abs) << '\n';
    out << "mae_abs=" << full_precision(mae_abs) << '\n';
    out << "rmse_abs=" << full_precision(rmse_abs) << '\n';
    return out.str();
}

} // namespace sdv
