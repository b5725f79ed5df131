#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace sdv::wavelet {

enum class Extension { symmetric, periodic };
enum class DenoiseRule { soft_universal, zero_finest };

Extension extension_from_name(const std::string& name);
DenoiseRule rule_from_name(const std::string& name);
std::string to_string(Extension mode);
std::string to_string(DenoiseRule rule);

/// Orthogonal two-channel filter bank. Analysis filters are applied as inner products
/// with even translates; synthesis filters are their time reversals.
struct FilterBank {
    std::string name;
    std::vector<double> analysis_lowpass;
    std::vector<double> analysis_highpass;
    std::vector<double> synthesis_lowpass;
    std::vector<double> synthesis_highpass;

    std::size_t length() const { return analysis_lowpass.size(); }

    static FilterBank db2();
    /// Registry lookup. Only db2 is implemented; other family names are rejected.
    static FilterBank from_name(const std::string& name);
};

/// Coefficient count of one analysis level for a signal of length n.
std::size_t coeff_len(std::size_t n, std::size_t filter_len, Extension mode);

/// One level of the pyramid: returns (approximation, detail).
std::pair<std::vector<double>, std::vector<double>>
dwt_level(const std::vector<double>& signal, const FilterBank& bank,
          Extension mode = Extension::symmetric);

/// Inverse of dwt_level, cropped to target_length samples.
std::vector<double> idwt_level(const std::vector<double>& approx,
                               const std::vector<double>& detail, const FilterBank& bank,
                               std::size_t target_length,
                               Extension mode = Extension::symmetric);

/// Wavelet pyramid for one channel: approximation at the coarsest level J plus detail
/// sequences for levels 1 (finest) through J.
struct Decomposition {
    std::vector<double> approximation;
    std::vector<std::vector<double>> details; // details[j-1] = level j, finest first
    std::size_t levels = 0;
    std::size_t original_length = 0;
    Extension mode = Extension::symmetric;
};

Decomposition decompose(const std::vector<double>& signal, const FilterBank& bank,
                        std::size_t levels, Extension mode = Extension::symmetric);

std::vector<double> reconstruct(const Decomposition& dec, const FilterBank& bank);

/// Denoise by thresholding detail coefficients and reconstructing.
/// soft_universal: soft threshold t = sigma_hat * sqrt(2 ln n) on all detail levels,
/// with sigma_hat = median(|finest details|) / 0.6745. zero_finest: drop level-1 details.
std::vector<double> denoise(const std::vector<double>& signal, const FilterBank& bank,
                            std::size_t levels, DenoiseRule rule,
                            Extension mode = Extension::symmetric);

} // namespace sdv::wavelet
