#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdv/models.hpp"
#include "sdv/timeseries.hpp"
#include "sdv/training.hpp"

namespace sdv::cli {

struct DataConfig {
    std::string source = "synthetic"; // "synthetic" | "csv"
    std::string path;                 // csv source only
    SyntheticConfig synthetic;
};

struct TaskConfig {
    std::string preset = "1step"; // 1step | 2step | 3step | custom
    std::size_t window = 15;
    std::size_t horizon = 1;
    std::size_t stride = 1;
};

struct WaveletConfig {
    std::string family = "db2";
    std::size_t levels = 2;
    std::string rule = "soft_universal";
    std::string extension = "symmetric";
};

/// Fully resolved invocation. Flags override a config file which overrides defaults;
/// the resolved struct is what gets hashed and persisted in the run directory.
struct RunConfig {
    std::string command;
    DataConfig data;
    TaskConfig task;
    std::string model = "wt-ed-lstm-am";
    WaveletConfig wavelet;
    TrainConfig train;
    ModelSizes sizes;
    std::string out = "runs";
    bool force = false;

    // eval
    std::string checkpoint_path;
    std::string split = "test";

    // sweep / ablate
    std::vector<std::size_t> horizons;
    std::vector<std::string> models;

    std::string to_json() const;
    static RunConfig from_json(const std::string& text);
};

/// FNV-1a over the run-defining fields (out/force excluded).
std::string config_hash(const RunConfig& config);

/// Apply a task preset's window/horizon/stride.
void apply_preset(TaskConfig& task, const std::string& preset);

/// Reject flag combinations that contradict the chosen family (ed-lstm-am already
/// implies no wavelet, wt-ed-lstm already implies no attention).
void check_model_flags(const std::string& model, bool no_wavelet, bool no_attention);

TimeSeriesFrame load_input_frame(const DataConfig& data);
PipelineSpec pipeline_spec_from(const RunConfig& config);

/// Run directory for a config: <out>/<command>-<model>-<hash12>.
std::string run_directory(const RunConfig& config);

int cmd_generate(const RunConfig& config);
int cmd_train(const RunConfig& config);
int cmd_eval(const RunConfig& config);
int cmd_sweep(const RunConfig& config);
int cmd_ablate(const RunConfig& config);

/// argv -> resolved config -> command. Exit codes: 0 ok, 1 usage, 2 data, 3 numeric.
int run_cli(int argc, const char* const* argv);

} // namespace sdv::cli
