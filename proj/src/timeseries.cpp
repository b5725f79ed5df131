#include "sdv/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "sdv/errors.hpp"
#include "sdv/rng.hpp"

namespace sdv {

namespace {

// civil <-> days conversions (Howard Hinnant's algorithms)
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y = static_cast<int>(yr + (m <= 2));
}

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, std::size_t line_no) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        throw DataError("unparseable numeric value '" + s + "' on line " +
                        std::to_string(line_no));
    return v;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace

std::int64_t hours_from_timestamp(const std::string& iso) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (std::sscanf(iso.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d", &y, &mo, &d, &h, &mi, &s) != 6)
        throw DataError("malformed timestamp '" + iso + "'");
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi != 0 || s != 0)
        throw DataError("timestamp '" + iso + "' is not on an hour boundary");
    return days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 24 + h;
}

std::string timestamp_from_hours(std::int64_t hours) {
    std::int64_t days = hours >= 0 ? hours / 24 : (hours - 23) / 24;
    int h = static_cast<int>(hours - days * 24);
    int y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:00:00", y, m, d, h);
    return buf;
}

std::vector<std::string> TimeSeriesFrame::feature_names() const {
    std::vector<std::string> names = channel_names;
    names.push_back("sdv");
    return names;
}

TimeSeriesFrame load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line))
        throw DataError("'" + path + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    auto header = split_fields(line);
    if (header.size() < 2 || header.front() != "timestamp" || header.back() != "sdv")
        throw DataError("'" + path + "' header must be timestamp,<channel...>,sdv");

    TimeSeriesFrame frame;
    frame.channel_names.assign(header.begin() + 1, header.end() - 1);
    frame.channels.resize(frame.channel_names.size());

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_fields(line);
        if (fields.size() != header.size())
            throw DataError("line " + std::to_string(line_no) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
        std::int64_t t = hours_from_timestamp(fields[0]);
        if (!frame.times.empty()) {
            if (t == frame.times.back())
                throw DataError("duplicated timestamp on line " + std::to_string(line_no));
            if (t < frame.times.back())
                throw DataError("non-monotone timestamp on line " + std::to_string(line_no));
            if (t != frame.times.back() + 1)
                throw DataError("gap before line " + std::to_string(line_no) +
                                ": timestamps must be hourly");
        }
        frame.times.push_back(t);
        for (std::size_t c = 0; c < frame.channels.size(); ++c)
            frame.channels[c].push_back(parse_double(fields[1 + c], line_no));
        frame.target.push_back(parse_double(fields.back(), line_no));
    }
    if (frame.times.empty())
        throw DataError("'" + path + "' contains no data rows");
    return frame;
}

void write_csv(const TimeSeriesFrame& frame, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write '" + path + "'");
    out << "timestamp";
    for (const auto& name : frame.channel_names) out << ',' << name;
    out << ",sdv\n";
    for (std::size_t t = 0; t < frame.size(); ++t) {
        out << timestamp_from_hours(frame.times[t]);
        for (const auto& ch : frame.channels) out << ',' << format_double(ch[t]);
        out << ',' << format_double(frame.target[t]) << '\n';
    }
    if (!out)
        throw DataError("failed while writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Synthetic generator
// ---------------------------------------------------------------------------

namespace {

constexpr double kTargetAmp = 0.15;

struct ChannelSpec {
    const char* name;
    double offset, amp, phase_hours;
};

constexpr ChannelSpec kChannels[4] = {
    {"par", 400.0, 350.0, 6.0},
    {"co2", 700.0, 120.0, 14.0},
    {"temp", 21.0, 4.0, 9.0},
    {"rh", 70.0, 8.0, 15.0},
};

double diurnal(double t, double phase_hours) {
    return std::sin(2.0 * std::numbers::pi * (t - phase_hours) / 24.0);
}

} // namespace

double synthetic_clean_target(std::size_t t) {
    double tt = static_cast<double>(t);
    return 0.02 + kTargetAmp * diurnal(tt, 3.0) + 5e-5 * tt;
}

double synthetic_clean_channel(std::size_t c, std::size_t t) {
    const ChannelSpec& spec = kChannels[c];
    return spec.offset + spec.amp * diurnal(static_cast<double>(t), spec.phase_hours);
}

TimeSeriesFrame generate_synthetic(const SyntheticConfig& config) {
    if (config.n_hours < 48)
        throw std::invalid_argument("generate_synthetic: n_hours must be >= 48");
    if (config.noise_sigma < 0.0)
        throw std::invalid_argument("generate_synthetic: noise_sigma must be >= 0");
    if (config.ar_coeff <= -1.0 || config.ar_coeff >= 1.0)
        throw std::invalid_argument("generate_synthetic: ar_coeff must lie in (-1, 1)");

    const std::size_t n = config.n_hours;
    Rng rng(config.seed);

    TimeSeriesFrame frame;
    frame.times.resize(n);
    std::int64_t start = days_from_civil(2016, 1, 1) * 24;
    for (std::size_t t = 0; t < n; ++t) frame.times[t] = start + static_cast<std::int64_t>(t);

    // AR(1) noise with stationary std == noise_sigma; lag-1 autocorrelation == ar_coeff
    frame.target.resize(n);
    const double phi = config.ar_coeff;
    const double innovation_sd = config.noise_sigma * std::sqrt(1.0 - phi * phi);
    double e = config.noise_sigma == 0.0 ? 0.0 : normal(rng, 0.0, config.noise_sigma);
    for (std::size_t t = 0; t < n; ++t) {
        if (t > 0)
            e = phi * e + (config.noise_sigma == 0.0 ? 0.0 : normal(rng, 0.0, innovation_sd));
        frame.target[t] = synthetic_clean_target(t) + e;
    }

    for (std::size_t c = 0; c < 4; ++c) {
        frame.channel_names.emplace_back(kChannels[c].name);
        std::vector<double> values(n);
        // independent noise, scaled so every channel shares the target's SNR
        const double sd = config.noise_sigma * kChannels[c].amp / kTargetAmp;
        for (std::size_t t = 0; t < n; ++t) {
            double noise = config.noise_sigma == 0.0 ? 0.0 : normal(rng, 0.0, sd);
            values[t] = synthetic_clean_channel(c, t) + noise;
        }
        frame.channels.push_back(std::move(values));
    }
    return frame;
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

const NormalizationParams::Entry& NormalizationParams::find(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return e;
    throw std::invalid_argument("unknown channel name '" + name + "'");
}

double normalize_value(double x, const NormalizationParams::Entry& e) {
    if (e.constant) return 0.5;
    return (x - e.lo) / (e.hi - e.lo);
}

double denormalize_value(double y, const NormalizationParams::Entry& e) {
    if (e.constant) return e.lo;
    return y * (e.hi - e.lo) + e.lo;
}

NormalizationParams fit_minmax(const TimeSeriesFrame& frame, double train_fraction) {
    if (train_fraction <= 0.0 || train_fraction > 1.0)
        throw std::invalid_argument("fit_minmax: train_fraction must lie in (0, 1]");
    std::size_t count = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(frame.size())));
    if (count == 0)
        throw std::invalid_argument("fit_minmax: empty training region");

    NormalizationParams params;
    auto fit_column = [&](const std::string& name, const std::vector<double>& col) {
        auto [mn, mx] = std::minmax_element(col.begin(), col.begin() + count);
        NormalizationParams::Entry e;
        e.name = name;
        e.lo = *mn;
        e.hi = *mx;
        e.constant = (*mn == *mx);
        params.entries.push_back(e);
    };
    for (std::size_t c = 0; c < frame.channels.size(); ++c)
        fit_column(frame.channel_names[c], frame.channels[c]);
    fit_column("sdv", frame.target);
    return params;
}

TimeSeriesFrame apply_minmax(const TimeSeriesFrame& frame, const NormalizationParams& params) {
    TimeSeriesFrame out = frame;
    for (std::size_t c = 0; c < out.channels.size(); ++c) {
        const auto& e = params.find(out.channel_names[c]);
        for (double& v : out.channels[c]) v = normalize_value(v, e);
    }
    const auto& te = params.find("sdv");
    for (double& v : out.target) v = normalize_value(v, te);
    return out;
}

std::vector<double> invert_minmax(const std::vector<double>& values,
                                  const NormalizationParams& params,
                                  const std::string& channel) {
    const auto& e = params.find(channel);
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = denormalize_value(values[i], e);
    return out;
}

// ---------------------------------------------------------------------------
// Splitting & windowing
// ---------------------------------------------------------------------------

namespace {

TimeSeriesFrame slice_frame(const TimeSeriesFrame& frame, std::size_t begin, std::size_t end) {
    TimeSeriesFrame out;
    out.channel_names = frame.channel_names;
    out.times.assign(frame.times.begin() + begin, frame.times.begin() + end);
    out.target.assign(frame.target.begin() + begin, frame.target.begin() + end);
    out.channels.reserve(frame.channels.size());
    for (const auto& ch : frame.channels)
        out.channels.emplace_back(ch.begin() + begin, ch.begin() + end);
    return out;
}

} // namespace

SplitFrames split(const TimeSeriesFrame& frame, double train_fraction, double val_fraction,
                  double test_fraction, std::size_t min_segment) {
    if (train_fraction <= 0.0 || val_fraction <= 0.0 || test_fraction <= 0.0)
        throw std::invalid_argument("split: fractions must be positive");
    if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9)
        throw std::invalid_argument("split: fractions must sum to 1");

    std::size_t n = frame.size();
    // floor boundaries, nudged so exact-decimal fractions land on the intended index
    std::size_t i1 = static_cast<std::size_t>(std::floor(train_fraction * n + 1e-9));
    std::size_t i2 =
        static_cast<std::size_t>(std::floor((train_fraction + val_fraction) * n + 1e-9));
    if (i1 < min_segment || i2 - i1 < min_segment || n - i2 < min_segment)
        throw std::invalid_argument("split: a segment is shorter than " +
                                    std::to_string(min_segment) + " samples");
    return {slice_frame(frame, 0, i1), slice_frame(frame, i1, i2), slice_frame(frame, i2, n)};
}

WindowedDataset make_windows(const TimeSeriesFrame& frame, std::size_t window,
                             std::size_t horizon, std::size_t stride, std::string split_tag) {
    return make_windows(frame, frame.target, window, horizon, stride, std::move(split_tag));
}

WindowedDataset make_windows(const TimeSeriesFrame& input_frame,
                             const std::vector<double>& target_series, std::size_t window,
                             std::size_t horizon, std::size_t stride, std::string split_tag) {
    if (window == 0 || horizon == 0 || stride == 0)
        throw std::invalid_argument("make_windows: window, horizon and stride must be >= 1");
    if (target_series.size() != input_frame.size())
        throw std::invalid_argument("make_windows: target series length mismatch");
    std::size_t n = input_frame.size();
    if (n < window + horizon)
        throw std::invalid_argument("make_windows: frame shorter than window + horizon");

    WindowedDataset ds;
    ds.window = window;
    ds.horizon = horizon;
    ds.stride = stride;
    ds.n_features = input_frame.feature_count();
    ds.split_tag = std::move(split_tag);

    std::size_t count = (n - window - horizon) / stride + 1;
    ds.inputs.reserve(count * window * ds.n_features);
    ds.targets.reserve(count);
    for (std::size_t w = 0; w < count; ++w) {
        std::size_t start = w * stride;
        for (std::size_t t = 0; t < window; ++t)
            for (std::size_t f = 0; f < ds.n_features; ++f)
                ds.inputs.push_back(input_frame.feature(f, start + t));
        std::size_t target_at = start + window + horizon - 1;
        ds.targets.push_back(target_series[target_at]);
        ds.last_input_time.push_back(input_frame.times[start + window - 1]);
        ds.target_time.push_back(input_frame.times[target_at]);
    }
    return ds;
}

} // namespace sdv
