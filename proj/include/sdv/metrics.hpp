#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace sdv {

struct Histogram {
    std::vector<double> edges;       // bins + 1 entries
    std::vector<std::size_t> counts; // bins entries, summing to the sample count
};

/// Uniform bins over [min, max]. A value on an interior bin boundary goes to the lower
/// bin; the global maximum belongs to the last bin.
Histogram histogram(const std::vector<double>& errors, std::size_t bins);

/// Per-horizon evaluation. The _rel family normalizes each error by the actual value
/// (skipping samples with |actual| < epsilon); the _abs family is the conventional one.
struct EvalReport {
    std::string model_label;
    std::size_t horizon = 0;
    double mse_rel = 0.0, mae_rel = 0.0, rmse_rel = 0.0;
    double mse_abs = 0.0, mae_abs = 0.0, rmse_abs = 0.0;
    std::size_t n_samples = 0;
    std::size_t n_skipped = 0; // |actual| < epsilon, relative metrics only
    Histogram error_histogram; // raw errors actual - predicted

    /// Human-readable table.
    std::string table() const;
    /// `key=value` lines with full-precision numbers, for machine diffing.
    std::string key_values() const;
};

EvalReport evaluate(const std::vector<double>& actual, const std::vector<double>& predicted,
                    double epsilon = 1e-8, std::size_t histogram_bins = 40);

} // namespace sdv
