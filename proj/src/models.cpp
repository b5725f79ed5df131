#include "sdv/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sdv {

namespace {

Tensor glorot(std::size_t rows, std::size_t cols, std::size_t fan_in, std::size_t fan_out,
              Rng& rng) {
    double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor t = Tensor::zeros({rows, cols}, true);
    for (double& v : t.values()) v = uniform(rng, -limit, limit);
    return t;
}

Tensor weight(std::size_t rows, std::size_t cols, Rng& rng) {
    return glorot(rows, cols, cols, rows, rng);
}

Tensor bias(std::size_t n, double fill = 0.0) {
    return Tensor::full({n}, fill, true);
}

void check_input(const Tensor& x, std::size_t expected_rows, const char* who) {
    if (x.ndim() != 2 || x.shape()[0] != expected_rows)
        throw std::invalid_argument(std::string(who) + ": input feature dimension mismatch");
}

} // namespace

// ---------------------------------------------------------------------------
// LSTM
// ---------------------------------------------------------------------------

LstmParams LstmParams::init(std::size_t input_size, std::size_t hidden_size, Rng& rng) {
    LstmParams p;
    p.input_size = input_size;
    p.hidden_size = hidden_size;
    p.W_i = weight(hidden_size, input_size, rng);
    p.U_i = weight(hidden_size, hidden_size, rng);
    p.b_i = bias(hidden_size);
    p.W_f = weight(hidden_size, input_size, rng);
    p.U_f = weight(hidden_size, hidden_size, rng);
    p.b_f = bias(hidden_size, 1.0); // open forget gate stabilizes early training
    p.W_c = weight(hidden_size, input_size, rng);
    p.U_c = weight(hidden_size, hidden_size, rng);
    p.b_c = bias(hidden_size);
    p.W_o = weight(hidden_size, input_size, rng);
    p.U_o = weight(hidden_size, hidden_size, rng);
    p.V_o = weight(hidden_size, hidden_size, rng);
    p.b_o = bias(hidden_size);
    return p;
}

LstmParams LstmParams::zeros(std::size_t input_size, std::size_t hidden_size) {
    LstmParams p;
    p.input_size = input_size;
    p.hidden_size = hidden_size;
    auto mat = [&](std::size_t r, std::size_t c) { return Tensor::zeros({r, c}, true); };
    p.W_i = mat(hidden_size, input_size);
    p.U_i = mat(hidden_size, hidden_size);
    p.b_i = bias(hidden_size);
    p.W_f = mat(hidden_size, input_size);
    p.U_f = mat(hidden_size, hidden_size);
    p.b_f = bias(hidden_size);
    p.W_c = mat(hidden_size, input_size);
    p.U_c = mat(hidden_size, hidden_size);
    p.b_c = bias(hidden_size);
    p.W_o = mat(hidden_size, input_size);
    p.U_o = mat(hidden_size, hidden_size);
    p.V_o = mat(hidden_size, hidden_size);
    p.b_o = bias(hidden_size);
    return p;
}

std::vector<Tensor> LstmParams::tensors() const {
    return {W_i, U_i, b_i, W_f, U_f, b_f, W_c, U_c, b_c, W_o, U_o, V_o, b_o};
}

std::vector<std::pair<std::string, Tensor>> LstmParams::named(const std::string& prefix) const {
    return {{prefix + ".W_i", W_i}, {prefix + ".U_i", U_i}, {prefix + ".b_i", b_i},
            {prefix + ".W_f", W_f}, {prefix + ".U_f", U_f}, {prefix + ".b_f", b_f},
            {prefix + ".W_c", W_c}, {prefix + ".U_c", U_c}, {prefix + ".b_c", b_c},
            {prefix + ".W_o", W_o}, {prefix + ".U_o", U_o}, {prefix + ".V_o", V_o},
            {prefix + ".b_o", b_o}};
}

LstmState lstm_zero_state(std::size_t hidden_size, std::size_t batch) {
    return {Tensor::zeros({hidden_size, batch}), Tensor::zeros({hidden_size, batch})};
}

LstmState lstm_step(Tape& tape, const LstmParams& p, const Tensor& x, const LstmState& prev,
                    LstmGates* gates) {
    check_input(x, p.input_size, "lstm_step");
    check_input(prev.h, p.hidden_size, "lstm_step");

    auto affine = [&](const Tensor& W, const Tensor& U, const Tensor& b) {
        return tape.add_bias(tape.add(tape.matmul(W, x), tape.matmul(U, prev.h)), b);
    };
    Tensor i = tape.sigmoid(affine(p.W_i, p.U_i, p.b_i));
    Tensor c_tilde = tape.tanh(affine(p.W_c, p.U_c, p.b_c));
    Tensor f = tape.sigmoid(affine(p.W_f, p.U_f, p.b_f));
    Tensor c = tape.add(tape.mul(i, c_tilde), tape.mul(f, prev.c));
    // the peephole reads the freshly updated cell state, not the previous one
    Tensor o = tape.sigmoid(tape.add_bias(
        tape.add(tape.add(tape.matmul(p.W_o, x), tape.matmul(p.U_o, prev.h)),
                 tape.matmul(p.V_o, c)),
        p.b_o));
    Tensor h = tape.mul(o, tape.tanh(c));

    if (gates) *gates = {i, f, o, c_tilde};
    return {h, c};
}

std::vector<LstmState> lstm_forward(Tape& tape, const LstmParams& p,
                                    const std::vector<Tensor>& xs, const LstmState& init) {
    if (xs.empty())
        throw std::invalid_argument("lstm_forward: empty input sequence");
    std::vector<LstmState> states;
    states.reserve(xs.size());
    LstmState state = init;
    for (const Tensor& x : xs) {
        state = lstm_step(tape, p, x, state);
        states.push_back(state);
    }
    return states;
}

// ---------------------------------------------------------------------------
// GRU
// ---------------------------------------------------------------------------

GruParams GruParams::init(std::size_t input_size, std::size_t hidden_size, Rng& rng) {
    GruParams p;
    p.input_size = input_size;
    p.hidden_size = hidden_size;
    p.W_z = weight(hidden_size, input_size, rng);
    p.U_z = weight(hidden_size, hidden_size, rng);
    p.b_z = bias(hidden_size);
    p.W_r = weight(hidden_size, input_size, rng);
    p.U_r = weight(hidden_size, hidden_size, rng);
    p.b_r = bias(hidden_size);
    p.W_h = weight(hidden_size, input_size, rng);
    p.U_h = weight(hidden_size, hidden_size, rng);
    p.b_h = bias(hidden_size);
    return p;
}

GruParams GruParams::zeros(std::size_t input_size, std::size_t hidden_size) {
    GruParams p;
    p.input_size = input_size;
    p.hidden_size = hidden_size;
    auto mat = [&](std::size_t r, std::size_t c) { return Tensor::zeros({r, c}, true); };
    p.W_z = mat(hidden_size, input_size);
    p.U_z = mat(hidden_size, hidden_size);
    p.b_z = bias(hidden_size);
    p.W_r = mat(hidden_size, input_size);
    p.U_r = mat(hidden_size, hidden_size);
    p.b_r = bias(hidden_size);
    p.W_h = mat(hidden_size, input_size);
    p.U_h = mat(hidden_size, hidden_size);
    p.b_h = bias(hidden_size);
    return p;
}

std::vector<Tensor> GruParams::tensors() const {
    return {W_z, U_z, b_z, W_r, U_r, b_r, W_h, U_h, b_h};
}

std::vector<std::pair<std::string, Tensor>> GruParams::named(const std::string& prefix) const {
    return {{prefix + ".W_z", W_z}, {prefix + ".U_z", U_z}, {prefix + ".b_z", b_z},
            {prefix + ".W_r", W_r}, {prefix + ".U_r", U_r}, {prefix + ".b_r", b_r},
            {prefix + ".W_h", W_h}, {prefix + ".U_h", U_h}, {prefix + ".b_h", b_h}};
}

Tensor gru_step(Tape& tape, const GruParams& p, const Tensor& x, const Tensor& h_prev) {
    check_input(x, p.input_size, "gru_step");
    check_input(h_prev, p.hidden_size, "gru_step");

    auto affine = [&](const Tensor& W, const Tensor& U, const Tensor& h, const Tensor& b) {
        return tape.add_bias(tape.add(tape.matmul(W, x), tape.matmul(U, h)), b);
    };
    Tensor z = tape.sigmoid(affine(p.W_z, p.U_z, h_prev, p.b_z));
    Tensor r = tape.sigmoid(affine(p.W_r, p.U_r, h_prev, p.b_r));
    Tensor h_tilde = tape.tanh(affine(p.W_h, p.U_h, tape.mul(r, h_prev), p.b_h));
    Tensor ones = Tensor::full(z.shape(), 1.0);
    return tape.add(tape.mul(tape.sub(ones, z), h_prev), tape.mul(z, h_tilde));
}

// ---------------------------------------------------------------------------
// MLP
// ---------------------------------------------------------------------------

MlpParams MlpParams::init(const std::vector<std::size_t>& widths, Rng& rng) {
    if (widths.size() < 2)
        throw std::invalid_argument("MlpParams::init: need at least input and output widths");
    MlpParams p;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i)
        p.layers.push_back({weight(widths[i + 1], widths[i], rng), bias(widths[i + 1])});
    return p;
}

std::vector<Tensor> MlpParams::tensors() const {
    std::vector<Tensor> out;
    for (const Dense& d : layers) {
        out.push_back(d.W);
        out.push_back(d.b);
    }
    return out;
}

std::vector<std::pair<std::string, Tensor>> MlpParams::named(const std::string& prefix) const {
    std::vector<std::pair<std::string, Tensor>> out;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        out.emplace_back(prefix + ".layer" + std::to_string(i) + ".W", layers[i].W);
        out.emplace_back(prefix + ".layer" + std::to_string(i) + ".b", layers[i].b);
    }
    return out;
}

Tensor mlp_forward(Tape& tape, const MlpParams& p, const Tensor& x) {
    if (p.layers.empty())
        throw std::invalid_argument("mlp_forward: no layers");
    Tensor a = x;
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        Tensor pre = tape.add_bias(tape.matmul(p.layers[i].W, a), p.layers[i].b);
        a = (i + 1 == p.layers.size()) ? pre : tape.tanh(pre);
    }
    return a;
}

// ---------------------------------------------------------------------------
// Attention
// ---------------------------------------------------------------------------

AttentionParams AttentionParams::init(std::size_t n, Rng& rng) {
    AttentionParams p;
    p.size = n;
    p.W_e = weight(n, n, rng);
    p.U_e = weight(n, n, rng);
    Tensor v = Tensor::zeros({n}, true);
    double limit = std::sqrt(6.0 / static_cast<double>(n + 1));
    for (double& x : v.values()) x = uniform(rng, -limit, limit);
    p.v = v;
    p.b = bias(n);
    return p;
}

std::vector<Tensor> AttentionParams::tensors() const {
    return {W_e, U_e, v, b};
}

std::vector<std::pair<std::string, Tensor>>
AttentionParams::named(const std::string& prefix) const {
    return {{prefix + ".W_e", W_e}, {prefix + ".U_e", U_e}, {prefix + ".v", v},
            {prefix + ".b", b}};
}

Tensor attention_scores(Tape& tape, const AttentionParams& p,
                        const std::vector<Tensor>& annotations, const Tensor& d_prev) {
    if (annotations.empty())
        throw std::invalid_argument("attention_scores: no annotations");
    check_input(d_prev, p.size, "attention_scores");
    Tensor query = tape.matmul(p.U_e, d_prev); // shared across annotations
    std::vector<Tensor> scores;
    scores.reserve(annotations.size());
    for (const Tensor& h : annotations) {
        check_input(h, p.size, "attention_scores");
        Tensor s = tape.tanh(tape.add_bias(tape.add(tape.matmul(p.W_e, h), query), p.b));
        scores.push_back(tape.vecmat(p.v, s));
    }
    return tape.stack_rows(scores);
}

AttentionState attention_context(Tape& tape, const Tensor& scores,
                                 const std::vector<Tensor>& annotations) {
    if (annotations.empty())
        throw std::invalid_argument("attention_context: no annotations");
    if (scores.ndim() != 2 || scores.shape()[0] != annotations.size())
        throw std::invalid_argument("attention_context: score/annotation count mismatch");

    AttentionState st;
    st.weights = tape.softmax_cols(scores);
    Tensor ctx = tape.colscale(annotations[0], tape.row(st.weights, 0));
    for (std::size_t t = 1; t < annotations.size(); ++t)
        ctx = tape.add(ctx, tape.colscale(annotations[t], tape.row(st.weights, t)));
    st.context = ctx;
    return st;
}

// ---------------------------------------------------------------------------
// Prediction head
// ---------------------------------------------------------------------------

HeadParams HeadParams::init(std::size_t context_size, std::size_t hidden_size,
                            std::size_t head_size, Rng& rng) {
    HeadParams p;
    p.W_p = weight(head_size, context_size, rng);
    p.W_x = weight(head_size, hidden_size, rng);
    p.W_s = weight(1, head_size, rng);
    p.b_s = bias(1);
    return p;
}

std::vector<Tensor> HeadParams::tensors() const {
    return {W_p, W_x, W_s, b_s};
}

std::vector<std::pair<std::string, Tensor>> HeadParams::named(const std::string& prefix) const {
    return {{prefix + ".W_p", W_p}, {prefix + ".W_x", W_x}, {prefix + ".W_s", W_s},
            {prefix + ".b_s", b_s}};
}

Tensor predict_head(Tape& tape, const HeadParams& p, const Tensor& context,
                    const Tensor& h_n) {
    Tensor h_s = tape.tanh(tape.add(tape.matmul(p.W_p, context), tape.matmul(p.W_x, h_n)));
    return tape.add_bias(tape.matmul(p.W_s, h_s), p.b_s);
}

// ---------------------------------------------------------------------------
// Encoder-decoder
// ---------------------------------------------------------------------------

EncoderDecoderParams EncoderDecoderParams::init(std::size_t input_size, std::size_t hidden1,
                                                std::size_t hidden2, Rng& rng) {
    EncoderDecoderParams ed;
    ed.input_size = input_size;
    ed.hidden1 = hidden1;
    ed.hidden2 = hidden2;
    ed.enc1 = LstmParams::init(input_size, hidden1, rng);
    ed.enc2 = LstmParams::init(hidden1, hidden2, rng);
    ed.dec1 = LstmParams::init(1, hidden2, rng); // fed a constant start token each step
    ed.dec2 = LstmParams::init(hidden2, hidden1, rng);
    ed.proj_W = weight(input_size, hidden1, rng);
    ed.proj_b = bias(input_size);
    return ed;
}

std::vector<Tensor> EncoderDecoderParams::tensors() const {
    std::vector<Tensor> out;
    for (const auto& t : enc1.tensors()) out.push_back(t);
    for (const auto& t : enc2.tensors()) out.push_back(t);
    for (const auto& t : dec1.tensors()) out.push_back(t);
    for (const auto& t : dec2.tensors()) out.push_back(t);
    out.push_back(proj_W);
    out.push_back(proj_b);
    return out;
}

std::vector<std::pair<std::string, Tensor>> EncoderDecoderParams::named() const {
    std::vector<std::pair<std::string, Tensor>> out;
    for (auto& kv : enc1.named("encoder1")) out.push_back(kv);
    for (auto& kv : enc2.named("encoder2")) out.push_back(kv);
    for (auto& kv : dec1.named("decoder1")) out.push_back(kv);
    for (auto& kv : dec2.named("decoder2")) out.push_back(kv);
    out.emplace_back("proj.W", proj_W);
    out.emplace_back("proj.b", proj_b);
    return out;
}

EncodeResult encode(Tape& tape, const EncoderDecoderParams& ed, const std::vector<Tensor>& xs) {
    if (xs.empty())
        throw std::invalid_argument("encode: empty input sequence");
    std::size_t batch = xs.front().cols();
    auto layer1 = lstm_forward(tape, ed.enc1, xs, lstm_zero_state(ed.hidden1, batch));
    std::vector<Tensor> h1;
    h1.reserve(layer1.size());
    for (const auto& s : layer1) h1.push_back(s.h);
    auto layer2 = lstm_forward(tape, ed.enc2, h1, lstm_zero_state(ed.hidden2, batch));

    EncodeResult res;
    res.layer1_final = layer1.back();
    res.layer2_final = layer2.back();
    res.annotations.reserve(layer2.size());
    for (const auto& s : layer2) res.annotations.push_back(s.h);
    return res;
}

std::vector<Tensor> decode(Tape& tape, const EncoderDecoderParams& ed,
                           const EncodeResult& embedding, std::size_t steps) {
    if (steps == 0)
        throw std::invalid_argument("decode: steps must be >= 1");
    std::size_t batch = embedding.layer2_final.h.cols();
    Tensor token = Tensor::full({1, batch}, 1.0);
    LstmState s1 = embedding.layer2_final; // mirrored sizes: narrow layer first
    LstmState s2 = embedding.layer1_final;
    std::vector<Tensor> out;
    out.reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        s1 = lstm_step(tape, ed.dec1, token, s1);
        s2 = lstm_step(tape, ed.dec2, s1.h, s2);
        out.push_back(tape.add_bias(tape.matmul(ed.proj_W, s2.h), ed.proj_b));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Families and assembled models
// ---------------------------------------------------------------------------

const std::vector<std::string>& model_families() {
    static const std::vector<std::string> families = {
        "wt-ed-lstm-am", "ed-lstm-am", "wt-ed-lstm", "lstm", "gru", "mlp", "persistence"};
    return families;
}

bool family_is_ed(const std::string& family) {
    return family == "wt-ed-lstm-am" || family == "ed-lstm-am" || family == "wt-ed-lstm";
}

bool family_uses_wavelet(const std::string& family) {
    return family == "wt-ed-lstm-am" || family == "wt-ed-lstm";
}

bool family_uses_attention(const std::string& family) {
    return family == "wt-ed-lstm-am" || family == "ed-lstm-am";
}

WindowBatch make_batch(const WindowedDataset& ds, const std::vector<std::size_t>& indices) {
    if (indices.empty())
        throw std::invalid_argument("make_batch: empty index list");
    std::size_t batch = indices.size();
    WindowBatch wb;
    wb.xs.reserve(ds.window);
    for (std::size_t t = 0; t < ds.window; ++t) {
        Tensor x = Tensor::zeros({ds.n_features, batch});
        auto& xv = x.values();
        for (std::size_t b = 0; b < batch; ++b) {
            const double* w = ds.window_ptr(indices[b]) + t * ds.n_features;
            for (std::size_t f = 0; f < ds.n_features; ++f) xv[f * batch + b] = w[f];
        }
        wb.xs.push_back(std::move(x));
    }
    Tensor y = Tensor::zeros({1, batch});
    for (std::size_t b = 0; b < batch; ++b) y.values()[b] = ds.targets[indices[b]];
    wb.targets = y;
    return wb;
}

EdPredictorModel::EdPredictorModel(std::string family, std::size_t input_features,
                                   std::size_t window, const ModelSizes& sizes, Rng& rng)
    : family_(std::move(family)), window_(window) {
    if (!family_is_ed(family_))
        throw std::invalid_argument("EdPredictorModel: unknown family '" + family_ + "'");
    ed_ = EncoderDecoderParams::init(input_features, sizes.enc_hidden1, sizes.enc_hidden2, rng);
    predictor_ = LstmParams::init(sizes.enc_hidden2, sizes.predictor_hidden, rng);
    if (family_uses_attention(family_))
        attention_ = AttentionParams::init(sizes.predictor_hidden, rng);
    head_ = HeadParams::init(sizes.predictor_hidden, sizes.predictor_hidden,
                             sizes.head_hidden, rng);
}

Tensor EdPredictorModel::forward(Tape& tape, const std::vector<Tensor>& xs) {
    EncodeResult enc = encode(tape, ed_, xs);
    std::size_t batch = xs.front().cols();
    auto states = lstm_forward(tape, predictor_, enc.annotations,
                               lstm_zero_state(predictor_.hidden_size, batch));
    Tensor h_n = states.back().h;
    Tensor context;
    if (attention_) {
        std::vector<Tensor> hs;
        hs.reserve(states.size());
        for (const auto& s : states) hs.push_back(s.h);
        Tensor scores = attention_scores(tape, *attention_, hs, h_n);
        AttentionState att = attention_context(tape, scores, hs);
        last_weights_ = att.weights;
        context = att.context;
    } else {
        last_weights_ = Tensor();
        context = h_n; // ablation: the head consumes the final hidden state directly
    }
    return predict_head(tape, head_, context, h_n);
}

std::vector<Tensor> EdPredictorModel::parameters() {
    std::vector<Tensor> out = ed_.tensors();
    for (const auto& t : predictor_.tensors()) out.push_back(t);
    if (attention_)
        for (const auto& t : attention_->tensors()) out.push_back(t);
    for (const auto& t : head_.tensors()) out.push_back(t);
    return out;
}

std::vector<std::pair<std::string, Tensor>> EdPredictorModel::named_parameters() {
    std::vector<std::pair<std::string, Tensor>> out = ed_.named();
    for (auto& kv : predictor_.named("predictor")) out.push_back(kv);
    if (attention_)
        for (auto& kv : attention_->named("attention")) out.push_back(kv);
    for (auto& kv : head_.named("head")) out.push_back(kv);
    return out;
}

std::vector<Tensor> EdPredictorModel::trainable_parameters() {
    std::vector<Tensor> out;
    if (finetune_encoder) {
        for (const auto& t : ed_.enc1.tensors()) out.push_back(t);
        for (const auto& t : ed_.enc2.tensors()) out.push_back(t);
    }
    for (const auto& t : predictor_.tensors()) out.push_back(t);
    if (attention_)
        for (const auto& t : attention_->tensors()) out.push_back(t);
    for (const auto& t : head_.tensors()) out.push_back(t);
    return out;
}

LstmBaselineModel::LstmBaselineModel(std::size_t input_features, std::size_t window,
                                     const ModelSizes& sizes, Rng& rng)
    : window_(window) {
    cell_ = LstmParams::init(input_features, sizes.lstm_hidden, rng);
    out_W = weight(1, sizes.lstm_hidden, rng);
    out_b = bias(1);
}

Tensor LstmBaselineModel::forward(Tape& tape, const std::vector<Tensor>& xs) {
    std::size_t batch = xs.front().cols();
    auto states = lstm_forward(tape, cell_, xs, lstm_zero_state(cell_.hidden_size, batch));
    return tape.add_bias(tape.matmul(out_W, states.back().h), out_b);
}

std::vector<Tensor> LstmBaselineModel::parameters() {
    std::vector<Tensor> out = cell_.tensors();
    out.push_back(out_W);
    out.push_back(out_b);
    return out;
}

std::vector<std::pair<std::string, Tensor>> LstmBaselineModel::named_parameters() {
    auto out = cell_.named("lstm");
    out.emplace_back("out.W", out_W);
    out.emplace_back("out.b", out_b);
    return out;
}

GruBaselineModel::GruBaselineModel(std::size_t input_features, std::size_t window,
                                   const ModelSizes& sizes, Rng& rng)
    : window_(window) {
    layer1_ = GruParams::init(input_features, sizes.gru_hidden, rng);
    layer2_ = GruParams::init(sizes.gru_hidden, sizes.gru_hidden, rng);
    out_W = weight(1, sizes.gru_hidden, rng);
    out_b = bias(1);
}

Tensor GruBaselineModel::forward(Tape& tape, const std::vector<Tensor>& xs) {
    std::size_t batch = xs.front().cols();
    Tensor h1 = Tensor::zeros({layer1_.hidden_size, batch});
    Tensor h2 = Tensor::zeros({layer2_.hidden_size, batch});
    for (const Tensor& x : xs) {
        h1 = gru_step(tape, layer1_, x, h1);
        h2 = gru_step(tape, layer2_, h1, h2);
    }
    return tape.add_bias(tape.matmul(out_W, h2), out_b);
}

std::vector<Tensor> GruBaselineModel::parameters() {
    std::vector<Tensor> out = layer1_.tensors();
    for (const auto& t : layer2_.tensors()) out.push_back(t);
    out.push_back(out_W);
    out.push_back(out_b);
    return out;
}

std::vector<std::pair<std::string, Tensor>> GruBaselineModel::named_parameters() {
    auto out = layer1_.named("gru1");
    for (auto& kv : layer2_.named("gru2")) out.push_back(kv);
    out.emplace_back("out.W", out_W);
    out.emplace_back("out.b", out_b);
    return out;
}

MlpBaselineModel::MlpBaselineModel(std::size_t input_features, std::size_t window,
                                   const ModelSizes& sizes, Rng& rng)
    : features_(input_features), window_(window) {
    mlp_ = MlpParams::init({window * input_features, sizes.mlp_hidden1, sizes.mlp_hidden2, 1},
                           rng);
}

Tensor MlpBaselineModel::forward(Tape& tape, const std::vector<Tensor>& xs) {
    if (xs.size() != window_)
        throw std::invalid_argument("mlp forward: window length mismatch");
    std::size_t batch = xs.front().cols();
    // inputs carry no gradient, so the flattened window is built as a fresh leaf
    Tensor flat = Tensor::zeros({window_ * features_, batch});
    auto& fv = flat.values();
    for (std::size_t t = 0; t < window_; ++t) {
        const auto& xv = xs[t].values();
        std::copy(xv.begin(), xv.end(), fv.begin() + t * features_ * batch);
    }
    return mlp_forward(tape, mlp_, flat);
}

std::vector<Tensor> MlpBaselineModel::parameters() {
    return mlp_.tensors();
}

std::vector<std::pair<std::string, Tensor>> MlpBaselineModel::named_parameters() {
    return mlp_.named("mlp");
}

PersistenceModel::PersistenceModel(std::size_t input_features, std::size_t window)
    : features_(input_features), window_(window) {}

Tensor PersistenceModel::forward(Tape&, const std::vector<Tensor>& xs) {
    // last observed SDV input feature (SDV is the final feature row)
    const Tensor& last = xs.back();
    std::size_t batch = last.cols();
    Tensor out = Tensor::zeros({1, batch});
    for (std::size_t b = 0; b < batch; ++b)
        out.values()[b] = last(features_ - 1, b);
    return out;
}

std::unique_ptr<Model> make_model(const std::string& family, std::size_t input_features,
                                  std::size_t window, const ModelSizes& sizes, Rng& rng) {
    if (family_is_ed(family))
        return std::make_unique<EdPredictorModel>(family, input_features, window, sizes, rng);
    if (family == "lstm")
        return std::make_unique<LstmBaselineModel>(input_features, window, sizes, rng);
    if (family == "gru")
        return std::make_unique<GruBaselineModel>(input_features, window, sizes, rng);
    if (family == "mlp")
        return std::make_unique<MlpBaselineModel>(input_features, window, sizes, rng);
    if (family == "persistence")
        return std::make_unique<PersistenceModel>(input_features, window);
    throw std::invalid_argument("unknown model family '" + family + "'");
}

} // namespace sdv
