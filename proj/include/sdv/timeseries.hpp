#pragma once

#include <cstdint>
#include <cstddef>
#include <string>
#include <vector>

namespace sdv {

// -- hourly timestamps ------------------------------------------------------

/// Hours since the Unix epoch <-> "YYYY-MM-DDTHH:00:00".
std::int64_t hours_from_timestamp(const std::string& iso);
std::string timestamp_from_hours(std::int64_t hours);

// -- frames -----------------------------------------------------------------

/// Hourly multichannel series: M named covariate channels plus the SDV target column.
/// The model input features are the covariates followed by the SDV history, so
/// feature_count() == channels.size() + 1.
struct TimeSeriesFrame {
    std::vector<std::int64_t> times; // hours since epoch, strictly increasing by 1
    std::vector<std::string> channel_names;
    std::vector<std::vector<double>> channels; // channel-major, each sized like times
    std::vector<double> target;                // SDV, sized like times

    std::size_t size() const { return times.size(); }
    std::size_t feature_count() const { return channels.size() + 1; }
    /// Feature f at row t; features order covariates first, SDV last.
    double feature(std::size_t f, std::size_t t) const {
        return f < channels.size() ? channels[f][t] : target[t];
    }
    std::vector<std::string> feature_names() const;
};

/// Parse `timestamp,<channel...>,sdv` CSV. Rejects gaps, duplicate or non-monotone
/// timestamps, and unparseable numerics, naming the offending line.
TimeSeriesFrame load_csv(const std::string& path);

/// Canonical serialization: shortest round-trip doubles, '\n' line ends.
/// write_csv(load_csv(f)) reproduces f byte for byte when f is canonical.
void write_csv(const TimeSeriesFrame& frame, const std::string& path);

// -- synthetic data ---------------------------------------------------------

struct SyntheticConfig {
    std::size_t n_hours = 2160; // 90 days
    double noise_sigma = 0.02;  // stationary std of the AR(1) target noise
    std::uint64_t seed = 42;
    double ar_coeff = 0.7;
};

/// Noise-free target value at hour t: diurnal sinusoid plus slow growth trend.
double synthetic_clean_target(std::size_t t);
/// Noise-free covariate c (0..3: par, co2, temp, rh) at hour t.
double synthetic_clean_channel(std::size_t c, std::size_t t);

/// Deterministic synthetic greenhouse stand-in. Target is the clean sinusoid+trend plus
/// AR(1) noise; covariates are phase-shifted sinusoids with independent noise at the
/// same signal-to-noise ratio. Pure function of the config.
TimeSeriesFrame generate_synthetic(const SyntheticConfig& config);

// -- normalization ----------------------------------------------------------

struct NormalizationParams {
    struct Entry {
        std::string name;
        double lo = 0.0;
        double hi = 1.0;
        bool constant = false; // hi == lo on the training region; maps to 0.5
    };
    std::vector<Entry> entries;

    const Entry& find(const std::string& name) const;
};

double normalize_value(double x, const NormalizationParams::Entry& e);
double denormalize_value(double y, const NormalizationParams::Entry& e);

/// Min/max per feature column over the first floor(train_fraction * n) rows only.
NormalizationParams fit_minmax(const TimeSeriesFrame& frame, double train_fraction);

/// Rescale every column by its fitted entry; values outside the fitted range land
/// outside [0,1] (no clamping).
TimeSeriesFrame apply_minmax(const TimeSeriesFrame& frame, const NormalizationParams& params);

std::vector<double> invert_minmax(const std::vector<double>& values,
                                  const NormalizationParams& params,
                                  const std::string& channel = "sdv");

// -- splitting & windowing --------------------------------------------------

struct SplitFrames {
    TimeSeriesFrame train, val, test;
};

/// Contiguous chronological segments with floor-index boundaries; no shuffling.
/// Throws if any segment ends up shorter than min_segment.
SplitFrames split(const TimeSeriesFrame& frame, double train_fraction, double val_fraction,
                  double test_fraction, std::size_t min_segment = 1);

struct WindowedDataset {
    std::size_t window = 0;  // T
    std::size_t horizon = 0; // k
    std::size_t stride = 1;  // s
    std::size_t n_features = 0;
    std::string split_tag;
    std::vector<double> inputs; // count * window * n_features, laid out [w][t][f]
    std::vector<double> targets;
    std::vector<std::int64_t> last_input_time;
    std::vector<std::int64_t> target_time;

    std::size_t count() const { return targets.size(); }
    const double* window_ptr(std::size_t w) const {
        return inputs.data() + w * window * n_features;
    }
};

/// Window i covers rows [i*s, i*s+T); its target is the SDV value at row i*s+T+k-1,
/// giving count = floor((n-T-k)/s) + 1 windows.
WindowedDataset make_windows(const TimeSeriesFrame& frame, std::size_t window,
                             std::size_t horizon, std::size_t stride,
                             std::string split_tag = "");

/// Same, but targets (and their normalization) come from a separate aligned series;
/// used when inputs are denoised while evaluation targets stay raw.
WindowedDataset make_windows(const TimeSeriesFrame& input_frame,
                             const std::vector<double>& target_series, std::size_t window,
                             std::size_t horizon, std::size_t stride,
                             std::string split_tag = "");

} // namespace sdv
