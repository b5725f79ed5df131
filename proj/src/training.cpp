#include "sdv/training.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sdv/errors.hpp"
#include "sdv/rng.hpp"

namespace sdv {

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw std::invalid_argument("TrainConfig: learning_rate must be finite and >= 0");
    if (batch_size < 1)
        throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (epochs < 1)
        throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (clip_enabled && !(clip_norm > 0.0))
        throw std::invalid_argument("TrainConfig: clip_norm must be positive");
}

namespace {

std::string fmt(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_csv_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{})
        throw DataError("train record: unparseable value '" + s + "'");
    return v;
}

} // namespace

void TrainRecord::write_csv(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write '" + path + "'");
    out << "epoch,train_loss,val_loss,seconds\n";
    for (const Epoch& e : epochs)
        out << e.epoch << ',' << fmt(e.train_loss) << ',' << fmt(e.val_loss) << ','
            << fmt(e.seconds) << '\n';
}

TrainRecord TrainRecord::read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open '" + path + "'");
    std::string line;
    std::getline(in, line); // header
    TrainRecord rec;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        Epoch e;
        std::getline(ss, field, ',');
        e.epoch = static_cast<std::size_t>(std::stoull(field));
        std::getline(ss, field, ',');
        e.train_loss = parse_csv_double(field);
        std::getline(ss, field, ',');
        e.val_loss = parse_csv_double(field);
        std::getline(ss, field, ',');
        e.seconds = parse_csv_double(field);
        rec.epochs.push_back(e);
    }
    for (const Epoch& e : rec.epochs)
        if (std::isfinite(e.val_loss) && e.val_loss < rec.best_val_loss) {
            rec.best_val_loss = e.val_loss;
            rec.best_epoch = e.epoch;
        }
    return rec;
}

void sgd_step(const std::vector<Tensor>& params, double learning_rate, double clip_norm,
              bool clip_enabled) {
    double sq_norm = 0.0;
    for (const Tensor& p : params)
        for (double g : p.grad()) sq_norm += g * g;
    if (!std::isfinite(sq_norm))
        throw NumericError("sgd_step: non-finite gradient, aborting epoch");

    double scale = 1.0;
    if (clip_enabled) {
        double norm = std::sqrt(sq_norm);
        if (norm > clip_norm) scale = clip_norm / norm;
    }
    for (const Tensor& p : params) {
        Tensor t = p;
        auto& v = t.values();
        auto& g = t.grad();
        if (scale == 1.0) {
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= learning_rate * g[i];
        } else {
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= learning_rate * (g[i] * scale);
        }
        t.zero_grad();
    }
}

std::vector<std::vector<double>> snapshot_parameters(Model& model) {
    std::vector<std::vector<double>> snap;
    for (const Tensor& p : model.parameters()) snap.push_back(p.values());
    return snap;
}

void restore_parameters(Model& model, const std::vector<std::vector<double>>& snapshot) {
    auto params = model.parameters();
    if (params.size() != snapshot.size())
        throw std::invalid_argument("restore_parameters: snapshot size mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].values().size() != snapshot[i].size())
            throw std::invalid_argument("restore_parameters: tensor size mismatch");
        params[i].values() = snapshot[i];
    }
}

namespace {

std::vector<std::vector<std::size_t>> chunk_indices(const std::vector<std::size_t>& order,
                                                    std::size_t batch_size) {
    std::vector<std::vector<std::size_t>> chunks;
    for (std::size_t at = 0; at < order.size(); at += batch_size) {
        std::size_t end = std::min(order.size(), at + batch_size);
        chunks.emplace_back(order.begin() + at, order.begin() + end);
    }
    return chunks; // last partial batch kept
}

Tensor batch_mse(Tape& tape, const Tensor& pred, const Tensor& target) {
    Tensor diff = tape.sub(pred, target);
    return tape.scale(tape.sum(tape.mul(diff, diff)),
                      1.0 / static_cast<double>(pred.numel()));
}

} // namespace

double dataset_mse(Model& model, const WindowedDataset& ds, std::size_t batch_size) {
    if (ds.count() == 0)
        throw std::invalid_argument("dataset_mse: empty dataset");
    std::vector<std::size_t> order(ds.count());
    std::iota(order.begin(), order.end(), 0);
    double sse = 0.0;
    for (const auto& chunk : chunk_indices(order, batch_size)) {
        Tape tape;
        WindowBatch wb = make_batch(ds, chunk);
        Tensor pred = model.forward(tape, wb.xs);
        Tensor loss = batch_mse(tape, pred, wb.targets);
        sse += loss.item() * static_cast<double>(chunk.size());
    }
    return sse / static_cast<double>(ds.count());
}

std::vector<double> predict_dataset(Model& model, const WindowedDataset& ds,
                                    std::size_t batch_size) {
    std::vector<std::size_t> order(ds.count());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> out;
    out.reserve(ds.count());
    for (const auto& chunk : chunk_indices(order, batch_size)) {
        Tape tape;
        WindowBatch wb = make_batch(ds, chunk);
        Tensor pred = model.forward(tape, wb.xs);
        for (std::size_t b = 0; b < chunk.size(); ++b) out.push_back(pred(0, b));
    }
    return out;
}

TrainRecord pretrain_autoencoder(EncoderDecoderParams& ed, const WindowedDataset& train,
                                 const TrainConfig& config) {
    TrainConfig cfg = config;
    cfg.epochs = config.pretrain_epochs;
    cfg.validate();
    if (train.count() == 0)
        throw std::invalid_argument("pretrain_autoencoder: no training windows");
    if (train.n_features != ed.input_size)
        throw std::invalid_argument("pretrain_autoencoder: feature count mismatch");

    std::vector<Tensor> params = ed.tensors();
    Rng rng(cfg.seed);
    std::vector<std::size_t> order(train.count());
    std::iota(order.begin(), order.end(), 0);

    TrainRecord rec;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        auto t0 = std::chrono::steady_clock::now();
        std::shuffle(order.begin(), order.end(), rng);
        double sse = 0.0;
        for (const auto& chunk : chunk_indices(order, cfg.batch_size)) {
            Tape tape;
            WindowBatch wb = make_batch(train, chunk);
            EncodeResult enc = encode(tape, ed, wb.xs);
            std::vector<Tensor> recon = decode(tape, ed, enc, wb.xs.size());
            // decoder emits the window in reverse order
            Tensor total;
            for (std::size_t t = 0; t < recon.size(); ++t) {
                Tensor diff = tape.sub(recon[t], wb.xs[wb.xs.size() - 1 - t]);
                Tensor sq = tape.sum(tape.mul(diff, diff));
                total = t == 0 ? sq : tape.add(total, sq);
            }
            double denom = static_cast<double>(chunk.size() * train.window * train.n_features);
            Tensor loss = tape.scale(total, 1.0 / denom);
            tape.backward(loss);
            sse += loss.item() * denom;
            sgd_step(params, cfg.learning_rate, cfg.clip_norm, cfg.clip_enabled);
        }
        auto t1 = std::chrono::steady_clock::now();
        TrainRecord::Epoch e;
        e.epoch = epoch;
        e.train_loss =
            sse / static_cast<double>(train.count() * train.window * train.n_features);
        e.seconds = std::chrono::duration<double>(t1 - t0).count();
        rec.epochs.push_back(e);
    }
    return rec;
}

TrainRecord train_predictor(Model& model, const WindowedDataset& train,
                            const WindowedDataset& val, const TrainConfig& config,
                            std::vector<std::vector<double>>* best_snapshot) {
    config.validate();
    TrainRecord rec;
    if (!model.trainable()) {
        if (best_snapshot) best_snapshot->clear();
        return rec; // zero-parameter models train in zero epochs
    }
    if (train.count() == 0)
        throw std::invalid_argument("train_predictor: no training windows");

    if (auto* edm = dynamic_cast<EdPredictorModel*>(&model))
        edm->finetune_encoder = config.finetune_encoder;
    std::vector<Tensor> params = model.trainable_parameters();

    Rng rng(config.seed);
    std::vector<std::size_t> order(train.count());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        auto t0 = std::chrono::steady_clock::now();
        std::shuffle(order.begin(), order.end(), rng);
        double sse = 0.0;
        for (const auto& chunk : chunk_indices(order, config.batch_size)) {
            Tape tape;
            WindowBatch wb = make_batch(train, chunk);
            Tensor pred = model.forward(tape, wb.xs);
            Tensor loss = batch_mse(tape, pred, wb.targets);
            tape.backward(loss);
            sse += loss.item() * static_cast<double>(chunk.size());
            sgd_step(params, config.learning_rate, config.clip_norm, config.clip_enabled);
        }

        TrainRecord::Epoch e;
        e.epoch = epoch;
        e.train_loss = sse / static_cast<double>(train.count());
        if (val.count() > 0) e.val_loss = dataset_mse(model, val, config.batch_size);
        auto t1 = std::chrono::steady_clock::now();
        e.seconds = std::chrono::duration<double>(t1 - t0).count();
        rec.epochs.push_back(e);

        if (std::isfinite(e.val_loss) && e.val_loss < rec.best_val_loss) {
            rec.best_val_loss = e.val_loss;
            rec.best_epoch = epoch;
            if (best_snapshot) *best_snapshot = snapshot_parameters(model);
        }
    }
    return rec;
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

namespace {

TimeSeriesFrame denoise_frame(const TimeSeriesFrame& frame, const PipelineSpec& spec) {
    wavelet::FilterBank bank = wavelet::FilterBank::db2();
    TimeSeriesFrame out = frame;
    for (auto& ch : out.channels)
        ch = wavelet::denoise(ch, bank, spec.wavelet_levels, spec.denoise_rule, spec.extension);
    out.target =
        wavelet::denoise(out.target, bank, spec.wavelet_levels, spec.denoise_rule, spec.extension);
    return out;
}

std::vector<double> slice(const std::vector<double>& v, std::size_t begin, std::size_t end) {
    return std::vector<double>(v.begin() + begin, v.begin() + end);
}

} // namespace

PipelineResult run_pipeline(const PipelineSpec& spec) {
    spec.train.validate();
    if (spec.data.size() == 0)
        throw std::invalid_argument("run_pipeline: empty data frame");

    // Inputs are denoised for the wavelet families; evaluation targets always come from
    // the raw series so variants stay comparable.
    bool use_wavelet = family_uses_wavelet(spec.family);
    TimeSeriesFrame input_frame = use_wavelet ? denoise_frame(spec.data, spec) : spec.data;

    NormalizationParams norm_inputs = fit_minmax(input_frame, spec.train_fraction);
    NormalizationParams::Entry norm_target =
        fit_minmax(spec.data, spec.train_fraction).find("sdv");

    TimeSeriesFrame normalized = apply_minmax(input_frame, norm_inputs);
    std::vector<double> norm_targets(spec.data.size());
    for (std::size_t t = 0; t < spec.data.size(); ++t)
        norm_targets[t] = normalize_value(spec.data.target[t], norm_target);

    std::size_t min_len = spec.window + spec.horizon;
    SplitFrames sf = split(normalized, spec.train_fraction, spec.val_fraction,
                           spec.test_fraction, min_len);
    std::size_t n = normalized.size();
    std::size_t i1 = sf.train.size();
    std::size_t i2 = i1 + sf.val.size();

    WindowedDataset train_ds = make_windows(sf.train, slice(norm_targets, 0, i1), spec.window,
                                            spec.horizon, spec.stride, "train");
    WindowedDataset val_ds = make_windows(sf.val, slice(norm_targets, i1, i2), spec.window,
                                          spec.horizon, spec.stride, "val");
    WindowedDataset test_ds = make_windows(sf.test, slice(norm_targets, i2, n), spec.window,
                                           spec.horizon, spec.stride, "test");

    PipelineResult res;
    Rng rng(spec.train.seed);
    res.model = make_model(spec.family, input_frame.feature_count(), spec.window, spec.sizes,
                           rng);
    res.feature_names = input_frame.feature_names();
    res.norm_inputs = norm_inputs;
    res.norm_target = norm_target;

    if (auto* ae = res.model->autoencoder())
        res.pretrain_record = pretrain_autoencoder(*ae, train_ds, spec.train);
    res.train_record =
        train_predictor(*res.model, train_ds, val_ds, spec.train, &res.best_params);

    std::vector<double> pred_norm =
        predict_dataset(*res.model, test_ds, spec.train.batch_size);
    res.test_predicted = invert_minmax(pred_norm, {.entries = {norm_target}}, norm_target.name);
    // actuals come straight from the raw series, not through the normalization round trip
    WindowedDataset test_raw = make_windows(sf.test, slice(spec.data.target, i2, n),
                                            spec.window, spec.horizon, spec.stride, "test");
    res.test_actual = test_raw.targets;
    res.test_target_time = test_ds.target_time;
    res.test_report = evaluate(res.test_actual, res.test_predicted);
    res.test_report.model_label = spec.family;
    res.test_report.horizon = spec.horizon;
    return res;
}

EvalReport run_ablation(const std::string& variant, const TimeSeriesFrame& data,
                        PipelineSpec base) {
    base.data = data;
    if (variant == "full")
        base.family = "wt-ed-lstm-am";
    else if (variant == "no_wavelet")
        base.family = "ed-lstm-am";
    else if (variant == "no_attention")
        base.family = "wt-ed-lstm";
    else
        throw std::invalid_argument("run_ablation: unknown variant '" + variant + "'");

    PipelineResult res = run_pipeline(base);
    EvalReport report = res.test_report;
    report.model_label = variant + " (" + base.family + ")";
    return report;
}

} // namespace sdv
