#include "sdv/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

#include "sdv/checkpoint.hpp"
#include "sdv/errors.hpp"
#include "sdv/metrics.hpp"
#include "sdv/wavelet.hpp"

namespace sdv::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

json sizes_to_json(const ModelSizes& s) {
    return json{{"enc_hidden1", s.enc_hidden1},
                {"enc_hidden2", s.enc_hidden2},
                {"predictor_hidden", s.predictor_hidden},
                {"head_hidden", s.head_hidden},
                {"lstm_hidden", s.lstm_hidden},
                {"gru_hidden", s.gru_hidden},
                {"mlp_hidden1", s.mlp_hidden1},
                {"mlp_hidden2", s.mlp_hidden2}};
}

ModelSizes sizes_from_json(const json& j) {
    ModelSizes s;
    s.enc_hidden1 = j.value("enc_hidden1", s.enc_hidden1);
    s.enc_hidden2 = j.value("enc_hidden2", s.enc_hidden2);
    s.predictor_hidden = j.value("predictor_hidden", s.predictor_hidden);
    s.head_hidden = j.value("head_hidden", s.head_hidden);
    s.lstm_hidden = j.value("lstm_hidden", s.lstm_hidden);
    s.gru_hidden = j.value("gru_hidden", s.gru_hidden);
    s.mlp_hidden1 = j.value("mlp_hidden1", s.mlp_hidden1);
    s.mlp_hidden2 = j.value("mlp_hidden2", s.mlp_hidden2);
    return s;
}

json config_to_json(const RunConfig& c) {
    return json{
        {"command", c.command},
        {"data",
         {{"source", c.data.source},
          {"path", c.data.path},
          {"synthetic",
           {{"n_hours", c.data.synthetic.n_hours},
            {"noise_sigma", c.data.synthetic.noise_sigma},
            {"seed", c.data.synthetic.seed},
            {"ar_coeff", c.data.synthetic.ar_coeff}}}}},
        {"task",
         {{"preset", c.task.preset},
          {"window", c.task.window},
          {"horizon", c.task.horizon},
          {"stride", c.task.stride}}},
        {"model", c.model},
        {"wavelet",
         {{"family", c.wavelet.family},
          {"levels", c.wavelet.levels},
          {"rule", c.wavelet.rule},
          {"extension", c.wavelet.extension}}},
        {"train",
         {{"learning_rate", c.train.learning_rate},
          {"batch_size", c.train.batch_size},
          {"epochs", c.train.epochs},
          {"pretrain_epochs", c.train.pretrain_epochs},
          {"seed", c.train.seed},
          {"clip_norm", c.train.clip_norm},
          {"clip_enabled", c.train.clip_enabled},
          {"finetune_encoder", c.train.finetune_encoder}}},
        {"sizes", sizes_to_json(c.sizes)},
        {"eval", {{"checkpoint", c.checkpoint_path}, {"split", c.split}}},
        {"sweep", {{"horizons", c.horizons}, {"models", c.models}}},
        {"out", c.out}};
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    c.command = j.value("command", c.command);
    if (j.contains("data")) {
        const json& d = j["data"];
        c.data.source = d.value("source", c.data.source);
        c.data.path = d.value("path", c.data.path);
        if (d.contains("synthetic")) {
            const json& s = d["synthetic"];
            c.data.synthetic.n_hours = s.value("n_hours", c.data.synthetic.n_hours);
            c.data.synthetic.noise_sigma = s.value("noise_sigma", c.data.synthetic.noise_sigma);
            c.data.synthetic.seed = s.value("seed", c.data.synthetic.seed);
            c.data.synthetic.ar_coeff = s.value("ar_coeff", c.data.synthetic.ar_coeff);
        }
    }
    if (j.contains("task")) {
        const json& t = j["task"];
        c.task.preset = t.value("preset", c.task.preset);
        c.task.window = t.value("window", c.task.window);
        c.task.horizon = t.value("horizon", c.task.horizon);
        c.task.stride = t.value("stride", c.task.stride);
    }
    c.model = j.value("model", c.model);
    if (j.contains("wavelet")) {
        const json& w = j["wavelet"];
        c.wavelet.family = w.value("family", c.wavelet.family);
        c.wavelet.levels = w.value("levels", c.wavelet.levels);
        c.wavelet.rule = w.value("rule", c.wavelet.rule);
        c.wavelet.extension = w.value("extension", c.wavelet.extension);
    }
    if (j.contains("train")) {
        const json& t = j["train"];
        c.train.learning_rate = t.value("learning_rate", c.train.learning_rate);
        c.train.batch_size = t.value("batch_size", c.train.batch_size);
        c.train.epochs = t.value("epochs", c.train.epochs);
        c.train.pretrain_epochs = t.value("pretrain_epochs", c.train.pretrain_epochs);
        c.train.seed = t.value("seed", c.train.seed);
        c.train.clip_norm = t.value("clip_norm", c.train.clip_norm);
        c.train.clip_enabled = t.value("clip_enabled", c.train.clip_enabled);
        c.train.finetune_encoder = t.value("finetune_encoder", c.train.finetune_encoder);
    }
    if (j.contains("sizes")) c.sizes = sizes_from_json(j["sizes"]);
    if (j.contains("eval")) {
        c.checkpoint_path = j["eval"].value("checkpoint", c.checkpoint_path);
        c.split = j["eval"].value("split", c.split);
    }
    if (j.contains("sweep")) {
        c.horizons = j["sweep"].value("horizons", c.horizons);
        c.models = j["sweep"].value("models", c.models);
    }
    c.out = j.value("out", c.out);
    return c;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write '" + path + "'");
    out << text;
}

void write_predictions_csv(const std::string& path, const std::vector<std::int64_t>& times,
                           const std::vector<double>& actual,
                           const std::vector<double>& predicted) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write '" + path + "'");
    out << "t,actual,predicted\n";
    for (std::size_t i = 0; i < actual.size(); ++i)
        out << times[i] << ',' << fmt(actual[i]) << ',' << fmt(predicted[i]) << '\n';
}

void write_histogram_csv(const std::string& path, const Histogram& h) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write '" + path + "'");
    out << "bin_lo,bin_hi,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        out << fmt(h.edges[i]) << ',' << fmt(h.edges[i + 1]) << ',' << h.counts[i] << '\n';
}

void write_report_files(const std::string& dir, const EvalReport& report,
                        const std::vector<std::int64_t>& times,
                        const std::vector<double>& actual,
                        const std::vector<double>& predicted) {
    write_text(dir + "/report.txt", report.table());
    write_text(dir + "/report.kv", report.key_values());
    write_predictions_csv(dir + "/predictions.csv", times, actual, predicted);
    write_histogram_csv(dir + "/histogram.csv", report.error_histogram);
}

Checkpoint checkpoint_meta(const RunConfig& config, const PipelineResult& res) {
    Checkpoint meta;
    meta.seed = config.train.seed;
    meta.window = config.task.window;
    meta.horizon = config.task.horizon;
    meta.stride = config.task.stride;
    meta.feature_names = res.feature_names;
    meta.wavelet_enabled = family_uses_wavelet(config.model);
    meta.wavelet_family = config.wavelet.family;
    meta.wavelet_levels = config.wavelet.levels;
    meta.denoise_rule = config.wavelet.rule;
    meta.extension = config.wavelet.extension;
    meta.norm_inputs = res.norm_inputs;
    meta.norm_target = res.norm_target;
    meta.sizes = config.sizes;
    return meta;
}

std::string metrics_csv_row(const EvalReport& r) {
    return fmt(r.rmse_abs) + ',' + fmt(r.mae_abs) + ',' + fmt(r.mse_abs) + ',' +
           fmt(r.rmse_rel) + ',' + fmt(r.mae_rel) + ',' + fmt(r.mse_rel);
}

} // namespace

std::string RunConfig::to_json() const {
    return config_to_json(*this).dump(2) + "\n";
}

RunConfig RunConfig::from_json(const std::string& text) {
    json j = json::parse(text);
    return config_from_json(j);
}

std::string config_hash(const RunConfig& config) {
    json j = config_to_json(config);
    j.erase("out");
    std::string dump = j.dump();
    std::uint64_t h = 1469598103934665603ull; // FNV-1a
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf).substr(0, 12);
}

void apply_preset(TaskConfig& task, const std::string& preset) {
    if (preset == "1step") {
        task = {preset, 15, 1, 1};
    } else if (preset == "2step") {
        task = {preset, 6, 6, 6};
    } else if (preset == "3step") {
        task = {preset, 12, 12, 12};
    } else if (preset == "custom") {
        task.preset = preset;
    } else {
        throw std::invalid_argument("unknown task preset '" + preset + "'");
    }
}

void check_model_flags(const std::string& model, bool no_wavelet, bool no_attention) {
    const auto& families = model_families();
    if (std::find(families.begin(), families.end(), model) == families.end())
        throw std::invalid_argument("unknown model family '" + model + "'");
    if (no_wavelet && family_uses_wavelet(model))
        throw std::invalid_argument(
            "--no-wavelet contradicts model '" + model +
            "'; pick the matching ablation family (ed-lstm-am) instead");
    if (no_attention && family_uses_attention(model))
        throw std::invalid_argument(
            "--no-attention contradicts model '" + model +
            "'; pick the matching ablation family (wt-ed-lstm) instead");
}

TimeSeriesFrame load_input_frame(const DataConfig& data) {
    if (data.source == "csv") {
        if (data.path.empty())
            throw std::invalid_argument("csv data source needs --data <path>");
        return load_csv(data.path);
    }
    if (data.source == "synthetic") return generate_synthetic(data.synthetic);
    throw std::invalid_argument("unknown data source '" + data.source + "'");
}

PipelineSpec pipeline_spec_from(const RunConfig& config) {
    PipelineSpec spec;
    spec.data = load_input_frame(config.data);
    spec.window = config.task.window;
    spec.horizon = config.task.horizon;
    spec.stride = config.task.stride;
    spec.family = config.model;
    spec.wavelet_levels = config.wavelet.levels;
    spec.denoise_rule = wavelet::rule_from_name(config.wavelet.rule);
    spec.extension = wavelet::extension_from_name(config.wavelet.extension);
    spec.sizes = config.sizes;
    spec.train = config.train;
    if (config.wavelet.family != "db2")
        wavelet::FilterBank::from_name(config.wavelet.family); // reject unknown families
    return spec;
}

std::string run_directory(const RunConfig& config) {
    std::string tag = config.command == "train" ? "-" + config.model : "";
    return config.out + "/" + config.command + tag + "-" + config_hash(config);
}

int cmd_generate(const RunConfig& config) {
    TimeSeriesFrame frame = generate_synthetic(config.data.synthetic);
    std::string path = config.out.empty() ? "synthetic.csv" : config.out;
    if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
    write_csv(frame, path);

    std::cout << "wrote " << frame.size() << " hourly rows to " << path << "\n";
    auto stats = [](const std::vector<double>& v) {
        auto [mn, mx] = std::minmax_element(v.begin(), v.end());
        double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        return std::tuple{*mn, mean, *mx};
    };
    auto print_stats = [&](const std::string& name, const std::vector<double>& v) {
        auto [mn, mean, mx] = stats(v);
        std::printf("  %-6s min %12.5g  mean %12.5g  max %12.5g\n", name.c_str(), mn, mean, mx);
    };
    for (std::size_t c = 0; c < frame.channels.size(); ++c)
        print_stats(frame.channel_names[c], frame.channels[c]);
    print_stats("sdv", frame.target);
    return 0;
}

int cmd_train(const RunConfig& config) {
    std::string dir = run_directory(config);
    if (fs::exists(fs::path(dir) / "config.json") && !config.force)
        throw std::invalid_argument("run directory '" + dir +
                                    "' already holds this config; pass --force to redo");
    fs::create_directories(dir);
    write_text(dir + "/config.json", config.to_json());

    PipelineSpec spec = pipeline_spec_from(config);
    PipelineResult res = run_pipeline(spec);

    res.train_record.write_csv(dir + "/train_record.csv");
    if (!res.pretrain_record.epochs.empty())
        res.pretrain_record.write_csv(dir + "/pretrain_record.csv");

    Checkpoint meta = checkpoint_meta(config, res);
    save_checkpoint(checkpoint_from_model(*res.model, meta), dir + "/checkpoint.bin");
    if (!res.best_params.empty()) {
        auto final_params = snapshot_parameters(*res.model);
        restore_parameters(*res.model, res.best_params);
        save_checkpoint(checkpoint_from_model(*res.model, meta), dir + "/checkpoint_best.bin");
        restore_parameters(*res.model, final_params);
    }
    write_report_files(dir, res.test_report, res.test_target_time, res.test_actual,
                       res.test_predicted);

    std::cout << "run directory: " << dir << "\n";
    if (!res.train_record.epochs.empty()) {
        const auto& last = res.train_record.epochs.back();
        std::cout << "final train loss " << last.train_loss << ", val loss " << last.val_loss
                  << " (best epoch " << res.train_record.best_epoch << ")\n";
    }
    std::cout << res.test_report.table();
    return 0;
}

int cmd_eval(const RunConfig& config) {
    if (config.checkpoint_path.empty())
        throw std::invalid_argument("eval needs --checkpoint <file>");
    Checkpoint ckpt = load_checkpoint(config.checkpoint_path);
    std::unique_ptr<Model> model = model_from_checkpoint(ckpt);

    TimeSeriesFrame raw = load_input_frame(config.data);
    TimeSeriesFrame input_frame = raw;
    if (ckpt.wavelet_enabled) {
        wavelet::FilterBank bank = wavelet::FilterBank::from_name(ckpt.wavelet_family);
        auto rule = wavelet::rule_from_name(ckpt.denoise_rule);
        auto mode = wavelet::extension_from_name(ckpt.extension);
        for (auto& ch : input_frame.channels)
            ch = wavelet::denoise(ch, bank, ckpt.wavelet_levels, rule, mode);
        input_frame.target =
            wavelet::denoise(input_frame.target, bank, ckpt.wavelet_levels, rule, mode);
    }
    if (input_frame.feature_names() != ckpt.feature_names)
        throw DataError("incompatible checkpoint: data channels do not match");

    TimeSeriesFrame normalized = apply_minmax(input_frame, ckpt.norm_inputs);
    std::size_t min_len = ckpt.window + ckpt.horizon;
    SplitFrames sf = split(normalized, 0.70, 0.10, 0.20, min_len);

    std::size_t i1 = sf.train.size(), i2 = i1 + sf.val.size();
    auto raw_slice = [&](std::size_t b, std::size_t e) {
        return std::vector<double>(raw.target.begin() + b, raw.target.begin() + e);
    };
    const TimeSeriesFrame* part = nullptr;
    std::vector<double> raw_targets;
    if (config.split == "train") {
        part = &sf.train;
        raw_targets = raw_slice(0, i1);
    } else if (config.split == "val") {
        part = &sf.val;
        raw_targets = raw_slice(i1, i2);
    } else if (config.split == "test") {
        part = &sf.test;
        raw_targets = raw_slice(i2, raw.size());
    } else {
        throw std::invalid_argument("unknown split '" + config.split + "'");
    }

    WindowedDataset ds =
        make_windows(*part, raw_targets, ckpt.window, ckpt.horizon, ckpt.stride, config.split);
    std::vector<double> pred_norm = predict_dataset(*model, ds, config.train.batch_size);
    NormalizationParams target_params{.entries = {ckpt.norm_target}};
    std::vector<double> predicted =
        invert_minmax(pred_norm, target_params, ckpt.norm_target.name);

    EvalReport report = evaluate(ds.targets, predicted);
    report.model_label = ckpt.architecture;
    report.horizon = ckpt.horizon;

    std::string dir = run_directory(config);
    fs::create_directories(dir);
    write_text(dir + "/config.json", config.to_json());
    write_report_files(dir, report, ds.target_time, ds.targets, predicted);
    std::cout << "eval directory: " << dir << "\n" << report.table();
    return 0;
}

int cmd_sweep(const RunConfig& config) {
    if (config.horizons.empty())
        throw std::invalid_argument("sweep needs at least one horizon");
    std::vector<std::string> models = config.models;
    if (models.empty()) models = {config.model};

    std::string dir = run_directory(config);
    fs::create_directories(dir);
    write_text(dir + "/config.json", config.to_json());

    TimeSeriesFrame frame = load_input_frame(config.data);
    std::ofstream out(dir + "/sweep.csv", std::ios::binary);
    out << "horizon,model,rmse_abs,mae_abs,mse_abs,rmse_rel,mae_rel,mse_rel\n";
    for (std::size_t horizon : config.horizons) {
        for (const std::string& model : models) {
            RunConfig one = config;
            one.model = model;
            one.task.preset = "custom";
            one.task.horizon = horizon;
            PipelineSpec spec = pipeline_spec_from(one);
            spec.data = frame;
            PipelineResult res = run_pipeline(spec);
            out << horizon << ',' << model << ',' << metrics_csv_row(res.test_report) << '\n';
            std::cout << "horizon " << horizon << " " << model << ": test RMSE_abs "
                      << res.test_report.rmse_abs << "\n";
        }
    }
    std::cout << "sweep table: " << dir << "/sweep.csv\n";
    return 0;
}

int cmd_ablate(const RunConfig& config) {
    std::string dir = run_directory(config);
    fs::create_directories(dir);
    write_text(dir + "/config.json", config.to_json());

    TimeSeriesFrame frame = load_input_frame(config.data);
    PipelineSpec base = pipeline_spec_from(config);
    base.data = frame;

    std::ofstream out(dir + "/ablation.csv", std::ios::binary);
    out << "variant,family,seed,rmse_abs,mae_abs,mse_abs,rmse_rel,mae_rel,mse_rel\n";
    std::printf("%-14s %-14s %10s %12s %12s\n", "variant", "family", "seed", "rmse_abs",
                "mae_abs");
    for (const std::string variant : {"full", "no_wavelet", "no_attention"}) {
        EvalReport report = run_ablation(variant, frame, base);
        std::string family = variant == "full"        ? "wt-ed-lstm-am"
                             : variant == "no_wavelet" ? "ed-lstm-am"
                                                       : "wt-ed-lstm";
        out << variant << ',' << family << ',' << config.train.seed << ','
            << metrics_csv_row(report) << '\n';
        std::printf("%-14s %-14s %10llu %12.6g %12.6g\n", variant.c_str(), family.c_str(),
                    static_cast<unsigned long long>(config.train.seed), report.rmse_abs,
                    report.mae_abs);
    }
    std::cout << "ablation table: " << dir << "/ablation.csv\n";
    return 0;
}

namespace {

struct CliFlags {
    RunConfig cfg;
    std::string config_file;
    std::string task_preset;
    bool synthetic = false;
    bool no_wavelet = false;
    bool no_attention = false;
    bool no_clip = false;
    bool no_finetune = false;
    std::string data_path;
};

void add_common_options(CLI::App* sub, CliFlags& f) {
    sub->add_option("--config", f.config_file, "JSON config file; flags override it");
    sub->add_option("--data", f.data_path, "CSV data file (timestamp,<channels...>,sdv)");
    sub->add_flag("--synthetic", f.synthetic, "use the synthetic generator as data source");
    sub->add_option("--hours", f.cfg.data.synthetic.n_hours, "synthetic: hours to generate");
    sub->add_option("--noise-sigma", f.cfg.data.synthetic.noise_sigma,
                    "synthetic: AR(1) noise stationary std");
    sub->add_option("--gen-seed", f.cfg.data.synthetic.seed, "synthetic: generator seed");
    sub->add_option("--ar", f.cfg.data.synthetic.ar_coeff, "synthetic: AR(1) coefficient");
    sub->add_option("--out", f.cfg.out, "output directory (file path for generate)");
}

void add_task_options(CLI::App* sub, CliFlags& f) {
    sub->add_option("--task", f.task_preset, "task preset: 1step, 2step or 3step");
    sub->add_option("--window", f.cfg.task.window, "input window length T (hours)");
    sub->add_option("--horizon", f.cfg.task.horizon, "prediction horizon k (hours)");
    sub->add_option("--stride", f.cfg.task.stride, "window stride s (hours)");
}

void add_model_options(CLI::App* sub, CliFlags& f) {
    sub->add_option("--model", f.cfg.model,
                    "wt-ed-lstm-am, ed-lstm-am, wt-ed-lstm, lstm, gru, mlp or persistence");
    sub->add_flag("--no-wavelet", f.no_wavelet, "ablation flag; must match the family");
    sub->add_flag("--no-attention", f.no_attention, "ablation flag; must match the family");
    sub->add_option("--wavelet-family", f.cfg.wavelet.family, "wavelet family (db2)");
    sub->add_option("--wavelet-levels", f.cfg.wavelet.levels, "decomposition depth J");
    sub->add_option("--denoise-rule", f.cfg.wavelet.rule, "soft_universal or zero_finest");
    sub->add_option("--extension", f.cfg.wavelet.extension, "symmetric or periodic");
    sub->add_option("--epochs", f.cfg.train.epochs, "training epochs");
    sub->add_option("--pretrain-epochs", f.cfg.train.pretrain_epochs,
                    "autoencoder pretraining epochs");
    sub->add_option("--lr", f.cfg.train.learning_rate, "SGD learning rate");
    sub->add_option("--batch", f.cfg.train.batch_size, "mini-batch size");
    sub->add_option("--seed", f.cfg.train.seed, "training seed");
    sub->add_option("--clip-norm", f.cfg.train.clip_norm, "global gradient norm clip");
    sub->add_flag("--no-clip", f.no_clip, "disable gradient clipping");
    sub->add_flag("--no-finetune", f.no_finetune, "freeze the encoder during training");
    sub->add_option("--enc-hidden1", f.cfg.sizes.enc_hidden1, "encoder layer-1 units");
    sub->add_option("--enc-hidden2", f.cfg.sizes.enc_hidden2, "encoder layer-2 units");
    sub->add_option("--predictor-hidden", f.cfg.sizes.predictor_hidden, "predictor units");
    sub->add_option("--head-hidden", f.cfg.sizes.head_hidden, "prediction head units");
    sub->add_option("--lstm-hidden", f.cfg.sizes.lstm_hidden, "baseline LSTM units");
    sub->add_option("--gru-hidden", f.cfg.sizes.gru_hidden, "baseline GRU units per layer");
    sub->add_option("--mlp-hidden1", f.cfg.sizes.mlp_hidden1, "MLP first hidden width");
    sub->add_option("--mlp-hidden2", f.cfg.sizes.mlp_hidden2, "MLP second hidden width");
}

// defaults < config file < explicit flags
RunConfig resolve(CLI::App* sub, const CliFlags& flags, const std::string& command) {
    RunConfig resolved;
    if (!flags.config_file.empty()) {
        std::ifstream in(flags.config_file);
        if (!in)
            throw DataError("cannot open config file '" + flags.config_file + "'");
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        resolved = RunConfig::from_json(text);
    }
    resolved.command = command;

    auto given = [&](const std::string& name) {
        auto* opt = sub->get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    if (given("--data")) {
        resolved.data.source = "csv";
        resolved.data.path = flags.data_path;
    }
    if (given("--synthetic")) {
        if (given("--data"))
            throw std::invalid_argument("pick exactly one data source: --data or --synthetic");
        resolved.data.source = "synthetic";
        resolved.data.path.clear();
    }
    if (given("--hours")) resolved.data.synthetic.n_hours = flags.cfg.data.synthetic.n_hours;
    if (given("--noise-sigma"))
        resolved.data.synthetic.noise_sigma = flags.cfg.data.synthetic.noise_sigma;
    if (given("--gen-seed")) resolved.data.synthetic.seed = flags.cfg.data.synthetic.seed;
    if (given("--ar")) resolved.data.synthetic.ar_coeff = flags.cfg.data.synthetic.ar_coeff;
    if (given("--out")) resolved.out = flags.cfg.out;

    if (given("--task")) apply_preset(resolved.task, flags.task_preset);
    if (given("--window")) {
        resolved.task.window = flags.cfg.task.window;
        resolved.task.preset = "custom";
    }
    if (given("--horizon")) {
        resolved.task.horizon = flags.cfg.task.horizon;
        resolved.task.preset = "custom";
    }
    if (given("--stride")) {
        resolved.task.stride = flags.cfg.task.stride;
        resolved.task.preset = "custom";
    }

    if (given("--model")) resolved.model = flags.cfg.model;
    if (given("--wavelet-family")) resolved.wavelet.family = flags.cfg.wavelet.family;
    if (given("--wavelet-levels")) resolved.wavelet.levels = flags.cfg.wavelet.levels;
    if (given("--denoise-rule")) resolved.wavelet.rule = flags.cfg.wavelet.rule;
    if (given("--extension")) resolved.wavelet.extension = flags.cfg.wavelet.extension;
    if (given("--epochs")) resolved.train.epochs = flags.cfg.train.epochs;
    if (given("--pretrain-epochs"))
        resolved.train.pretrain_epochs = flags.cfg.train.pretrain_epochs;
    if (given("--lr")) resolved.train.learning_rate = flags.cfg.train.learning_rate;
    if (given("--batch")) resolved.train.batch_size = flags.cfg.train.batch_size;
    if (given("--seed")) resolved.train.seed = flags.cfg.train.seed;
    if (given("--clip-norm")) resolved.train.clip_norm = flags.cfg.train.clip_norm;
    if (given("--no-clip")) resolved.train.clip_enabled = false;
    if (given("--no-finetune")) resolved.train.finetune_encoder = false;
    for (auto [flag, member] :
         {std::pair{"--enc-hidden1", &ModelSizes::enc_hidden1},
          std::pair{"--enc-hidden2", &ModelSizes::enc_hidden2},
          std::pair{"--predictor-hidden", &ModelSizes::predictor_hidden},
          std::pair{"--head-hidden", &ModelSizes::head_hidden},
          std::pair{"--lstm-hidden", &ModelSizes::lstm_hidden},
          std::pair{"--gru-hidden", &ModelSizes::gru_hidden},
          std::pair{"--mlp-hidden1", &ModelSizes::mlp_hidden1},
          std::pair{"--mlp-hidden2", &ModelSizes::mlp_hidden2}}) {
        if (given(flag)) resolved.sizes.*member = flags.cfg.sizes.*member;
    }

    if (given("--checkpoint")) resolved.checkpoint_path = flags.cfg.checkpoint_path;
    if (given("--split")) resolved.split = flags.cfg.split;
    if (given("--horizons")) resolved.horizons = flags.cfg.horizons;
    if (given("--models")) resolved.models = flags.cfg.models;
    if (given("--force")) resolved.force = true;

    check_model_flags(resolved.model, flags.no_wavelet, flags.no_attention);
    return resolved;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"three-stage SDV forecasting toolkit"};
    app.require_subcommand(1);

    CliFlags f;
    f.cfg.horizons = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};

    CLI::App* gen = app.add_subcommand("generate", "write a synthetic hourly dataset as CSV");
    add_common_options(gen, f);

    CLI::App* train = app.add_subcommand("train", "train one model end to end");
    add_common_options(train, f);
    add_task_options(train, f);
    add_model_options(train, f);
    train->add_flag("--force", f.cfg.force, "overwrite an existing run directory");

    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint against data");
    add_common_options(eval, f);
    eval->add_option("--checkpoint", f.cfg.checkpoint_path, "checkpoint file from train");
    eval->add_option("--split", f.cfg.split, "train, val or test");
    eval->add_option("--batch", f.cfg.train.batch_size, "evaluation batch size");

    CLI::App* sweep = app.add_subcommand("sweep", "per-horizon metric table (direct strategy)");
    add_common_options(sweep, f);
    add_task_options(sweep, f);
    add_model_options(sweep, f);
    sweep->add_option("--horizons", f.cfg.horizons, "horizons to train, e.g. 1 2 3");
    sweep->add_option("--models", f.cfg.models, "model families to sweep");

    CLI::App* ablate = app.add_subcommand("ablate", "full vs no_wavelet vs no_attention");
    add_common_options(ablate, f);
    add_task_options(ablate, f);
    add_model_options(ablate, f);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) {
            RunConfig cfg = resolve(gen, f, "generate");
            if (cfg.out == "runs") cfg.out = "synthetic.csv"; // generate writes a file
            return cmd_generate(cfg);
        }
        if (train->parsed()) return cmd_train(resolve(train, f, "train"));
        if (eval->parsed()) return cmd_eval(resolve(eval, f, "eval"));
        if (sweep->parsed()) return cmd_sweep(resolve(sweep, f, "sweep"));
        if (ablate->parsed()) return cmd_ablate(resolve(ablate, f, "ablate"));
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace sdv::cli
