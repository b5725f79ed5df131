#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sdv/models.hpp"
#include "sdv/ndmath.hpp"
#include "sdv/timeseries.hpp"

namespace sdv {

/// Self-describing model container: architecture, every named parameter tensor,
/// normalization parameters, wavelet configuration, and the training seed. The on-disk
/// format is binary (native-endian doubles) and round-trips bit-exactly.
struct Checkpoint {
    std::string architecture;
    std::uint64_t seed = 0;
    std::uint64_t window = 0, horizon = 0, stride = 0;
    std::vector<std::string> feature_names; // covariates then "sdv"

    bool wavelet_enabled = false;
    std::string wavelet_family = "db2";
    std::uint64_t wavelet_levels = 2;
    std::string denoise_rule = "soft_universal";
    std::string extension = "symmetric";

    NormalizationParams norm_inputs;
    NormalizationParams::Entry norm_target;

    ModelSizes sizes;
    std::string peephole = "post-update-cell"; // output-gate V_o acts on the updated cell

    std::vector<std::pair<std::string, Tensor>> tensors;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// Collect a checkpoint from a live model (tensors are shared handles, not copies).
Checkpoint checkpoint_from_model(Model& model, const Checkpoint& meta);

/// Rebuild the architecture named in the checkpoint and load every parameter into it.
/// Throws DataError when names or shapes do not line up.
std::unique_ptr<Model> model_from_checkpoint(const Checkpoint& ckpt);

} // namespace sdv
