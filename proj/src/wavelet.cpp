#include "sdv/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sdv/errors.hpp"

namespace sdv::wavelet {

namespace {

// Extended signal lookup. Symmetric is the half-sample scheme ( ... x1 x0 | x0 x1 ... );
// periodic wraps modulo an even length, padding odd signals by repeating the last sample.
struct Extended {
    const std::vector<double>& x;
    Extension mode;
    std::size_t period; // even, padded length (periodic mode only)

    double operator()(long t) const {
        long n = static_cast<long>(x.size());
        if (mode == Extension::periodic) {
            long p = static_cast<long>(period);
            long m = ((t % p) + p) % p;
            return m < n ? x[static_cast<std::size_t>(m)] : x.back();
        }
        if (t < 0) t = -t - 1;
        if (t >= n) {
            // one reflection suffices for the pads used here (filter_len - 1 <= n)
            t = 2 * n - 1 - t;
        }
        return x[static_cast<std::size_t>(t)];
    }
};

std::size_t padded_period(std::size_t n) {
    return n % 2 == 0 ? n : n + 1;
}

double median_abs(const std::vector<double>& v) {
    std::vector<double> mag(v.size());
    std::transform(v.begin(), v.end(), mag.begin(), [](double x) { return std::abs(x); });
    std::sort(mag.begin(), mag.end());
    std::size_t n = mag.size();
    if (n == 0) return 0.0;
    return n % 2 == 1 ? mag[n / 2] : 0.5 * (mag[n / 2 - 1] + mag[n / 2]);
}

double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

} // namespace

Extension extension_from_name(const std::string& name) {
    if (name == "symmetric") return Extension::symmetric;
    if (name == "periodic") return Extension::periodic;
    throw std::invalid_argument("unknown extension mode: " + name);
}

DenoiseRule rule_from_name(const std::string& name) {
    if (name == "soft_universal") return DenoiseRule::soft_universal;
    if (name == "zero_finest") return DenoiseRule::zero_finest;
    throw std::invalid_argument("unknown denoise rule: " + name);
}

std::string to_string(Extension mode) {
    return mode == Extension::symmetric ? "symmetric" : "periodic";
}

std::string to_string(DenoiseRule rule) {
    return rule == DenoiseRule::soft_universal ? "soft_universal" : "zero_finest";
}

FilterBank FilterBank::db2() {
    // Derived from the Daubechies-2 closed form; the filter-bank identity tests pin
    // the normalization (lowpass sums to sqrt 2) and the two vanishing moments.
    const double s3 = std::sqrt(3.0);
    const double c = 1.0 / (4.0 * std::sqrt(2.0));
    std::vector<double> lo = {(1.0 + s3) * c, (3.0 + s3) * c, (3.0 - s3) * c, (1.0 - s3) * c};
    std::vector<double> hi(lo.size());
    for (std::size_t k = 0; k < lo.size(); ++k) {
        double sign = (k % 2 == 0) ? 1.0 : -1.0;
        hi[k] = sign * lo[lo.size() - 1 - k]; // quadrature mirror
    }
    FilterBank bank;
    bank.name = "db2";
    bank.analysis_lowpass = lo;
    bank.analysis_highpass = hi;
    bank.synthesis_lowpass.assign(lo.rbegin(), lo.rend());
    bank.synthesis_highpass.assign(hi.rbegin(), hi.rend());
    return bank;
}

FilterBank FilterBank::from_name(const std::string& name) {
    if (name == "db2") return db2();
    throw std::invalid_argument("unsupported wavelet family: " + name);
}

std::size_t coeff_len(std::size_t n, std::size_t filter_len, Extension mode) {
    if (mode == Extension::periodic) return (n + 1) / 2;
    return (n + filter_len - 1) / 2;
}

// Analysis coefficient i is the inner product of the extended signal with the filter
// translated to start at 2i - (F - 2); this alignment makes the exactly reconstructible
// span of the synthesis side begin at sample 0.
std::pair<std::vector<double>, std::vector<double>>
dwt_level(const std::vector<double>& signal, const FilterBank& bank, Extension mode) {
    const std::size_t F = bank.length();
    const std::size_t n = signal.size();
    if (n < F)
        throw std::invalid_argument("dwt_level: signal shorter than filter");

    const std::size_t L = coeff_len(n, F, mode);
    Extended ext{signal, mode, padded_period(n)};
    std::vector<double> approx(L), detail(L);
    const long base_off = -static_cast<long>(F) + 2;
    for (std::size_t i = 0; i < L; ++i) {
        long base = 2 * static_cast<long>(i) + base_off;
        double a = 0.0, d = 0.0;
        for (std::size_t k = 0; k < F; ++k) {
            double xv = ext(base + static_cast<long>(k));
            a += bank.analysis_lowpass[k] * xv;
            d += bank.analysis_highpass[k] * xv;
        }
        approx[i] = a;
        detail[i] = d;
    }
    return {std::move(approx), std::move(detail)};
}

std::vector<double> idwt_level(const std::vector<double>& approx,
                               const std::vector<double>& detail, const FilterBank& bank,
                               std::size_t target_length, Extension mode) {
    const std::size_t F = bank.length();
    const std::size_t L = approx.size();
    if (detail.size() != L)
        throw std::invalid_argument("idwt_level: approximation/detail lengths differ");
    if (L != coeff_len(target_length, F, mode))
        throw std::invalid_argument("idwt_level: coefficient count inconsistent with target length");

    // Scatter each coefficient through the time-reversed synthesis filters. Positions
    // outside the exact span are dropped (symmetric) or wrapped (periodic).
    const long base_off = -static_cast<long>(F) + 2;
    if (mode == Extension::periodic) {
        const std::size_t period = padded_period(target_length);
        std::vector<double> out(period, 0.0);
        for (std::size_t i = 0; i < L; ++i) {
            long base = 2 * static_cast<long>(i) + base_off;
            for (std::size_t k = 0; k < F; ++k) {
                long p = base + static_cast<long>(k);
                long m = ((p % static_cast<long>(period)) + static_cast<long>(period)) %
                         static_cast<long>(period);
                out[static_cast<std::size_t>(m)] +=
                    approx[i] * bank.synthesis_lowpass[F - 1 - k] +
                    detail[i] * bank.synthesis_highpass[F - 1 - k];
            }
        }
        out.resize(target_length);
        return out;
    }

    std::vector<double> out(target_length, 0.0);
    for (std::size_t i = 0; i < L; ++i) {
        long base = 2 * static_cast<long>(i) + base_off;
        for (std::size_t k = 0; k < F; ++k) {
            long p = base + static_cast<long>(k);
            if (p >= 0 && p < static_cast<long>(target_length))
                out[static_cast<std::size_t>(p)] +=
                    approx[i] * bank.synthesis_lowpass[F - 1 - k] +
                    detail[i] * bank.synthesis_highpass[F - 1 - k];
        }
    }
    return out;
}

Decomposition decompose(const std::vector<double>& signal, const FilterBank& bank,
                        std::size_t levels, Extension mode) {
    if (levels == 0)
        throw std::invalid_argument("decompose: levels must be >= 1");
    Decomposition dec;
    dec.levels = levels;
    dec.original_length = signal.size();
    dec.mode = mode;
    std::vector<double> current = signal;
    for (std::size_t j = 0; j < levels; ++j) {
        if (current.size() < bank.length())
            throw std::invalid_argument("decompose: too few samples for requested levels");
        auto [approx, detail] = dwt_level(current, bank, mode);
        dec.details.push_back(std::move(detail));
        current = std::move(approx);
    }
    dec.approximation = std::move(current);
    return dec;
}

std::vector<double> reconstruct(const Decomposition& dec, const FilterBank& bank) {
    if (dec.details.size() != dec.levels || dec.levels == 0)
        throw std::invalid_argument("reconstruct: malformed decomposition");

    // Re-derive the per-level target lengths from the original length.
    std::vector<std::size_t> lengths(dec.levels + 1);
    lengths[0] = dec.original_length;
    for (std::size_t j = 1; j <= dec.levels; ++j)
        lengths[j] = coeff_len(lengths[j - 1], bank.length(), dec.mode);
    if (dec.approximation.size() != lengths[dec.levels])
        throw std::invalid_argument("reconstruct: corrupted approximation length");
    for (std::size_t j = 1; j <= dec.levels; ++j)
        if (dec.details[j - 1].size() != lengths[j])
            throw std::invalid_argument("reconstruct: corrupted detail length at level " +
                                        std::to_string(j));

    std::vector<double> current = dec.approximation;
    for (std::size_t j = dec.levels; j >= 1; --j)
        current = idwt_level(current, dec.details[j - 1], bank, lengths[j - 1], dec.mode);
    return current;
}

std::vector<double> denoise(const std::vector<double>& signal, const FilterBank& bank,
                            std::size_t levels, DenoiseRule rule, Extension mode) {
    if (signal.size() < 2 * bank.length())
        throw std::invalid_argument("denoise: signal shorter than twice the filter");

    auto [mn, mx] = std::minmax_element(signal.begin(), signal.end());
    if (*mn == *mx) return signal; // degenerate: nothing to threshold

    Decomposition dec = decompose(signal, bank, levels, mode);
    if (rule == DenoiseRule::zero_finest) {
        std::fill(dec.details[0].begin(), dec.details[0].end(), 0.0);
    } else {
        double sigma = median_abs(dec.details[0]) / 0.6745;
        double threshold = sigma * std::sqrt(2.0 * std::log(static_cast<double>(signal.size())));
        if (threshold > 0.0)
            for (auto& level : dec.details)
                for (double& d : level) d = soft_threshold(d, threshold);
    }
    return reconstruct(dec, bank);
}

} // namespace sdv::wavelet
