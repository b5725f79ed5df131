#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "sdv/errors.hpp"
#include "sdv/timeseries.hpp"

using namespace sdv;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("sdv_ts_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

} // namespace

TEST_CASE("timestamp round trip") {
    CHECK(timestamp_from_hours(hours_from_timestamp("2016-01-01T00:00:00")) ==
          "2016-01-01T00:00:00");
    CHECK(hours_from_timestamp("2016-01-01T01:00:00") -
              hours_from_timestamp("2016-01-01T00:00:00") ==
          1);
    CHECK(hours_from_timestamp("2016-03-01T00:00:00") -
              hours_from_timestamp("2016-02-29T23:00:00") ==
          1); // leap day handled
    CHECK_THROWS_AS(hours_from_timestamp("2016-01-01 00:00"), DataError);
    CHECK_THROWS_AS(hours_from_timestamp("2016-01-01T00:30:00"), DataError);
}

TEST_CASE("load_csv accepts a well-formed file") {
    TempDir tmp;
    std::string path = tmp.file("ok.csv");
    write_file(path, "timestamp,temp,sdv\n"
                     "2016-01-01T00:00:00,20.5,0.01\n"
                     "2016-01-01T01:00:00,20.75,0.02\n"
                     "2016-01-01T02:00:00,21,0.03\n");
    TimeSeriesFrame frame = load_csv(path);
    CHECK(frame.size() == 3);
    CHECK(frame.channel_names == std::vector<std::string>{"temp"});
    CHECK(frame.channels[0][1] == 20.75);
    CHECK(frame.target[2] == 0.03);
    CHECK(frame.feature_count() == 2);
    CHECK(frame.feature(1, 2) == 0.03); // sdv is the last feature
}

TEST_CASE("load_csv rejects malformed files with the offending line") {
    TempDir tmp;

    std::string dup = tmp.file("dup.csv");
    write_file(dup, "timestamp,temp,sdv\n"
                    "2016-01-01T00:00:00,20,0.1\n"
                    "2016-01-01T00:00:00,21,0.2\n");
    CHECK_THROWS_WITH_AS(load_csv(dup), doctest::Contains("line 3"), DataError);

    std::string gap = tmp.file("gap.csv");
    write_file(gap, "timestamp,temp,sdv\n"
                    "2016-01-01T00:00:00,20,0.1\n"
                    "2016-01-01T02:00:00,21,0.2\n");
    CHECK_THROWS_AS(load_csv(gap), DataError);

    std::string bad = tmp.file("bad.csv");
    write_file(bad, "timestamp,temp,sdv\n"
                    "2016-01-01T00:00:00,20,0.1\n"
                    "2016-01-01T01:00:00,oops,0.2\n");
    CHECK_THROWS_WITH_AS(load_csv(bad), doctest::Contains("line 3"), DataError);

    std::string header = tmp.file("head.csv");
    write_file(header, "time,temp,sdv\n2016-01-01T00:00:00,20,0.1\n");
    CHECK_THROWS_AS(load_csv(header), DataError);

    CHECK_THROWS_AS(load_csv(tmp.file("missing.csv")), DataError);
}

TEST_CASE("csv write/load round trip is byte-exact for canonical files") {
    TempDir tmp;
    TimeSeriesFrame frame = generate_synthetic({.n_hours = 72, .noise_sigma = 0.05, .seed = 9});
    std::string a = tmp.file("a.csv"), b = tmp.file("b.csv");
    write_csv(frame, a);
    write_csv(load_csv(a), b);
    CHECK(read_file(a) == read_file(b));
    CHECK(!read_file(a).empty());
}

TEST_CASE("synthetic generation is deterministic and matches the closed form") {
    SyntheticConfig cfg{.n_hours = 100, .noise_sigma = 0.03, .seed = 123};
    TimeSeriesFrame a = generate_synthetic(cfg);
    TimeSeriesFrame b = generate_synthetic(cfg);
    CHECK(a.target == b.target);
    for (std::size_t c = 0; c < a.channels.size(); ++c) CHECK(a.channels[c] == b.channels[c]);
    CHECK(a.times.front() == hours_from_timestamp("2016-01-01T00:00:00"));

    TimeSeriesFrame clean = generate_synthetic({.n_hours = 96, .noise_sigma = 0.0, .seed = 7});
    for (std::size_t t = 0; t < clean.size(); ++t) {
        CHECK(clean.target[t] == synthetic_clean_target(t));
        for (std::size_t c = 0; c < clean.channels.size(); ++c)
            CHECK(clean.channels[c][t] == synthetic_clean_channel(c, t));
    }

    CHECK_THROWS_AS(generate_synthetic({.n_hours = 10}), std::invalid_argument);
    CHECK_THROWS_AS(generate_synthetic({.n_hours = 100, .noise_sigma = -1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(generate_synthetic({.n_hours = 100, .ar_coeff = 1.5}),
                    std::invalid_argument);
}

TEST_CASE("synthetic AR(1) noise has the configured lag-1 autocorrelation") {
    SyntheticConfig cfg{.n_hours = 10000, .noise_sigma = 0.1, .seed = 31, .ar_coeff = 0.7};
    TimeSeriesFrame frame = generate_synthetic(cfg);
    std::vector<double> resid(frame.size());
    for (std::size_t t = 0; t < frame.size(); ++t)
        resid[t] = frame.target[t] - synthetic_clean_target(t);
    double mean = 0.0;
    for (double r : resid) mean += r;
    mean /= static_cast<double>(resid.size());
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t + 1 < resid.size(); ++t)
        num += (resid[t] - mean) * (resid[t + 1] - mean);
    for (double r : resid) den += (r - mean) * (r - mean);
    CHECK(std::abs(num / den - cfg.ar_coeff) < 0.1);
}

TEST_CASE("min-max fit, apply and invert") {
    TimeSeriesFrame frame;
    frame.times = {0, 1};
    frame.channel_names = {"a"};
    frame.channels = {{0.0, 10.0}};
    frame.target = {1.0, 3.0};

    NormalizationParams params = fit_minmax(frame, 1.0);
    CHECK(params.find("a").lo == 0.0);
    CHECK(params.find("a").hi == 10.0);
    CHECK(normalize_value(5.0, params.find("a")) == 0.5);
    CHECK(normalize_value(12.0, params.find("a")) == doctest::Approx(1.2)); // no clamping
    CHECK_THROWS_AS(params.find("nope"), std::invalid_argument);

    TimeSeriesFrame scaled = apply_minmax(frame, params);
    CHECK(scaled.channels[0][1] == 1.0);
    CHECK(scaled.target[0] == 0.0);
    auto back = invert_minmax(scaled.target, params, "sdv");
    for (std::size_t t = 0; t < 2; ++t)
        CHECK(std::abs(back[t] - frame.target[t]) < 1e-12);

    CHECK_THROWS_AS(fit_minmax(frame, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(fit_minmax(frame, 0.3), std::invalid_argument); // floor(0.6) == 0
}

TEST_CASE("constant channel flagged and pinned at 0.5") {
    TimeSeriesFrame frame;
    frame.times = {0, 1, 2};
    frame.channel_names = {"flat"};
    frame.channels = {{4.0, 4.0, 4.0}};
    frame.target = {1.0, 2.0, 3.0};
    NormalizationParams params = fit_minmax(frame, 1.0);
    CHECK(params.find("flat").constant);
    TimeSeriesFrame scaled = apply_minmax(frame, params);
    for (double v : scaled.channels[0]) CHECK(v == 0.5);
    CHECK(denormalize_value(0.5, params.find("flat")) == 4.0);
}

TEST_CASE("normalization parameters depend only on the training region") {
    TimeSeriesFrame frame = generate_synthetic({.n_hours = 100, .noise_sigma = 0.02, .seed = 1});
    NormalizationParams before = fit_minmax(frame, 0.7);
    // poke validation/test samples only
    for (std::size_t t = 70; t < 100; ++t) {
        frame.target[t] += 100.0;
        frame.channels[0][t] -= 55.5;
    }
    NormalizationParams after = fit_minmax(frame, 0.7);
    REQUIRE(before.entries.size() == after.entries.size());
    for (std::size_t i = 0; i < before.entries.size(); ++i) {
        CHECK(before.entries[i].lo == after.entries[i].lo);
        CHECK(before.entries[i].hi == after.entries[i].hi);
    }
}

TEST_CASE("split boundary arithmetic") {
    TimeSeriesFrame frame = generate_synthetic({.n_hours = 100, .noise_sigma = 0.0, .seed = 2});
    SplitFrames sf = split(frame, 0.7, 0.1, 0.2);
    CHECK(sf.train.size() == 70);
    CHECK(sf.val.size() == 10);
    CHECK(sf.test.size() == 20);

    // n=10 -> 7/1/2 via floor arithmetic
    TimeSeriesFrame ten;
    ten.times = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    ten.target = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    SplitFrames sf10 = split(ten, 0.7, 0.1, 0.2);
    CHECK(sf10.train.size() == 7);
    CHECK(sf10.val.size() == 1);
    CHECK(sf10.test.size() == 2);

    // segments concatenate back to the original
    std::vector<double> glued = sf.train.target;
    glued.insert(glued.end(), sf.val.target.begin(), sf.val.target.end());
    glued.insert(glued.end(), sf.test.target.begin(), sf.test.target.end());
    CHECK(glued == frame.target);

    CHECK_THROWS_AS(split(frame, 0.7, 0.1, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(split(frame, 0.7, -0.1, 0.4), std::invalid_argument);
    CHECK_THROWS_AS(split(ten, 0.7, 0.1, 0.2, 16), std::invalid_argument); // too short
}

TEST_CASE("window construction and counting") {
    TimeSeriesFrame frame = generate_synthetic({.n_hours = 48, .noise_sigma = 0.0, .seed = 3});

    auto count_for = [&](std::size_t n, std::size_t T, std::size_t k, std::size_t s) {
        TimeSeriesFrame f = generate_synthetic({.n_hours = std::max<std::size_t>(n, 48),
                                                .noise_sigma = 0.0,
                                                .seed = 3});
        f.times.resize(n);
        f.target.resize(n);
        for (auto& ch : f.channels) ch.resize(n);
        return make_windows(f, T, k, s).count();
    };
    CHECK(count_for(20, 15, 1, 1) == 5); // 1-step preset shape
    CHECK(count_for(24, 6, 6, 6) == 3);  // 2-step preset shape
    CHECK(count_for(16, 15, 1, 1) == 1); // exactly one window at n == T + k

    WindowedDataset ds = make_windows(frame, 12, 12, 12, "train");
    CHECK(ds.split_tag == "train");
    CHECK(ds.n_features == frame.feature_count());
    for (std::size_t w = 0; w < ds.count(); ++w) {
        CHECK(ds.target_time[w] - ds.last_input_time[w] ==
              static_cast<std::int64_t>(ds.horizon));
        // inputs laid out [t][f], targets k hours past the window end
        std::size_t start = w * ds.stride;
        for (std::size_t t = 0; t < ds.window; ++t)
            for (std::size_t f = 0; f < ds.n_features; ++f)
                CHECK(ds.window_ptr(w)[t * ds.n_features + f] ==
                      frame.feature(f, start + t));
        CHECK(ds.targets[w] == frame.target[start + ds.window + ds.horizon - 1]);
    }

    CHECK_THROWS_AS(make_windows(frame, 48, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_windows(frame, 0, 1, 1), std::invalid_argument);
}

TEST_CASE("separate target series for windows") {
    TimeSeriesFrame frame = generate_synthetic({.n_hours = 48, .noise_sigma = 0.0, .seed = 4});
    std::vector<double> alt(frame.size());
    for (std::size_t t = 0; t < alt.size(); ++t) alt[t] = static_cast<double>(t);
    WindowedDataset ds = make_windows(frame, 6, 2, 1);
    WindowedDataset ds_alt = make_windows(frame, alt, 6, 2, 1);
    CHECK(ds_alt.count() == ds.count());
    for (std::size_t w = 0; w < ds_alt.count(); ++w)
        CHECK(ds_alt.targets[w] == static_cast<double>(w + 6 + 2 - 1));

    std::vector<double> wrong(10, 0.0);
    CHECK_THROWS_AS(make_windows(frame, wrong, 6, 2, 1), std::invalid_argument);
}
