#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "sdv/metrics.hpp"
#include "sdv/models.hpp"
#include "sdv/timeseries.hpp"
#include "sdv/wavelet.hpp"

namespace sdv {

struct TrainConfig {
    double learning_rate = 0.001;
    std::size_t batch_size = 32;
    std::size_t epochs = 100;
    std::size_t pretrain_epochs = 100;
    std::uint64_t seed = 42;
    double clip_norm = 5.0;
    bool clip_enabled = true;
    bool finetune_encoder = true;

    void validate() const;
};

struct TrainRecord {
    struct Epoch {
        std::size_t epoch = 0; // 1-based
        double train_loss = 0.0;
        double val_loss = std::numeric_limits<double>::quiet_NaN();
        double seconds = 0.0;
    };
    std::vector<Epoch> epochs;
    std::size_t best_epoch = 0; // 1-based; 0 when no validation was run
    double best_val_loss = std::numeric_limits<double>::infinity();

    /// `epoch,train_loss,val_loss,seconds` CSV for plotting loss-per-epoch curves.
    void write_csv(const std::string& path) const;
    static TrainRecord read_csv(const std::string& path);
};

/// Global-norm clip, then theta -= lr * g for every parameter; gradients are zeroed
/// afterwards. Throws NumericError on non-finite gradients.
void sgd_step(const std::vector<Tensor>& params, double learning_rate, double clip_norm,
              bool clip_enabled = true);

std::vector<std::vector<double>> snapshot_parameters(Model& model);
void restore_parameters(Model& model, const std::vector<std::vector<double>>& snapshot);

/// Mean squared error of the model over a dataset (normalized units), batched forward
/// passes only.
double dataset_mse(Model& model, const WindowedDataset& ds, std::size_t batch_size);

/// Predictions for every window, in dataset order (normalized units).
std::vector<double> predict_dataset(Model& model, const WindowedDataset& ds,
                                    std::size_t batch_size);

/// Minimize mean squared reconstruction error of the reversed input sequence over
/// seeded-shuffle mini-batches.
TrainRecord pretrain_autoencoder(EncoderDecoderParams& ed, const WindowedDataset& train,
                                 const TrainConfig& config);

/// Supervised MSE training on normalized targets with per-epoch validation loss.
/// The model ends at the final epoch; the best-validation snapshot is returned via
/// `best_snapshot` when given (best epoch recorded either way).
TrainRecord train_predictor(Model& model, const WindowedDataset& train,
                            const WindowedDataset& val, const TrainConfig& config,
                            std::vector<std::vector<double>>* best_snapshot = nullptr);

// -- pipeline ---------------------------------------------------------------

/// Fully resolved end-to-end run: denoise (per family) -> fit/apply normalization ->
/// split 70/10/20 -> window -> pretrain (ED families) -> train -> evaluate on test.
struct PipelineSpec {
    TimeSeriesFrame data;
    std::size_t window = 15, horizon = 1, stride = 1;
    std::string family = "wt-ed-lstm-am";
    std::size_t wavelet_levels = 2;
    wavelet::DenoiseRule denoise_rule = wavelet::DenoiseRule::soft_universal;
    wavelet::Extension extension = wavelet::Extension::symmetric;
    ModelSizes sizes;
    TrainConfig train;
    double train_fraction = 0.70, val_fraction = 0.10, test_fraction = 0.20;
};

struct PipelineResult {
    std::unique_ptr<Model> model;
    TrainRecord pretrain_record; // empty unless the family has an encoder-decoder
    TrainRecord train_record;
    std::vector<std::vector<double>> best_params; // snapshot at the best validation epoch
    EvalReport test_report;
    std::vector<double> test_actual, test_predicted; // data units
    std::vector<std::int64_t> test_target_time;
    NormalizationParams norm_inputs;
    NormalizationParams::Entry norm_target;
    std::vector<std::string> feature_names;
};

PipelineResult run_pipeline(const PipelineSpec& spec);

/// Ablation harness: `full` -> wt-ed-lstm-am, `no_wavelet` -> ed-lstm-am,
/// `no_attention` -> wt-ed-lstm. Everything else in `base` is reused as-is.
EvalReport run_ablation(const std::string& variant, const TimeSeriesFrame& data,
                        PipelineSpec base);

} // namespace sdv
