#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sdv/ndmath.hpp"
#include "sdv/rng.hpp"
#include "sdv/timeseries.hpp"

namespace sdv {

// All model code runs batched: an input step is a [features x batch] tensor, hidden
// states are [hidden x batch], and model outputs are [1 x batch].

// -- LSTM cell ----------------------------------------------------------------------

/// Gate parameters for the LSTM variant used throughout: input gate, candidate, forget
/// gate, and an output gate with a peephole term V_o acting on the cell state.
struct LstmParams {
    Tensor W_i, U_i, b_i;
    Tensor W_f, U_f, b_f;
    Tensor W_c, U_c, b_c;
    Tensor W_o, U_o, V_o, b_o;
    std::size_t input_size = 0;
    std::size_t hidden_size = 0;

    static LstmParams init(std::size_t input_size, std::size_t hidden_size, Rng& rng);
    static LstmParams zeros(std::size_t input_size, std::size_t hidden_size);
    std::vector<Tensor> tensors() const;
    std::vector<std::pair<std::string, Tensor>> named(const std::string& prefix) const;
};

struct LstmState {
    Tensor h, c;
};

/// Transient gate activations, exposed for inspection in tests.
struct LstmGates {
    Tensor input, forget, output, candidate;
};

LstmState lstm_zero_state(std::size_t hidden_size, std::size_t batch);

/// One step of the recurrence. The output gate peeps at the freshly updated cell state
/// (post-update), not the previous one.
LstmState lstm_step(Tape& tape, const LstmParams& p, const Tensor& x, const LstmState& prev,
                    LstmGates* gates = nullptr);

std::vector<LstmState> lstm_forward(Tape& tape, const LstmParams& p,
                                    const std::vector<Tensor>& xs, const LstmState& init);

// -- GRU cell -----------------------------------------------------------------------

struct GruParams {
    Tensor W_z, U_z, b_z;
    Tensor W_r, U_r, b_r;
    Tensor W_h, U_h, b_h;
    std::size_t input_size = 0;
    std::size_t hidden_size = 0;

    static GruParams init(std::size_t input_size, std::size_t hidden_size, Rng& rng);
    static GruParams zeros(std::size_t input_size, std::size_t hidden_size);
    std::vector<Tensor> tensors() const;
    std::vector<std::pair<std::string, Tensor>> named(const std::string& prefix) const;
};

/// h' = (1-z) . h + z . tanh(W x + U (r . h) + b)
Tensor gru_step(Tape& tape, const GruParams& p, const Tensor& x, const Tensor& h_prev);

// -- MLP ----------------------------------------------------------------------------

struct Dense {
    Tensor W, b;
};

/// Fully connected stack; tanh on every layer except the last (linear).
struct MlpParams {
    std::vector<Dense> layers;

    static MlpParams init(const std::vector<std::size_t>& widths, Rng& rng);
    std::vector<Tensor> tensors() const;
    std::vector<std::pair<std::string, Tensor>> named(const std::string& prefix) const;
};

Tensor mlp_forward(Tape& tape, const MlpParams& p, const Tensor& x);

// -- additive attention ----------------------------------------------------------------

struct AttentionParams {
    Tensor W_e, U_e, v, b; // W_e, U_e: [n x n]; v, b: [n]
    std::size_t size = 0;

    static AttentionParams init(std::size_t n, Rng& rng);
    std::vector<Tensor> tensors() const;
    std::vector<std::pair<std::string, Tensor>> named(const std::string& prefix) const;
};

/// Score per annotation: e_t = v . tanh(W_e h_t + U_e d_prev + b), stacked to [T x batch].
Tensor attention_scores(Tape& tape, const AttentionParams& p,
                        const std::vector<Tensor>& annotations, const Tensor& d_prev);

struct AttentionState {
    Tensor weights; // [T x batch], softmax over T within each column
    Tensor context; // [n x batch]
};

AttentionState attention_context(Tape& tape, const Tensor& scores,
                                 const std::vector<Tensor>& annotations);

// -- prediction head ------------------------------------------------------------------

struct HeadParams {
    Tensor W_p, W_x, W_s, b_s;

    static HeadParams init(std::size_t context_size, std::size_t hidden_size,
                           std::size_t head_size, Rng& rng);
    std::vector<Tensor> tensors() const;
    std::vector<std::pair<std::string, Tensor>> named(const std::string& prefix) const;
};

/// y = W_s tanh(W_p C + W_x h_n) + b_s
Tensor predict_head(Tape& tape, const HeadParams& p, const Tensor& context,
                    const Tensor& h_n);

// -- LSTM encoder-decoder -------------------------------------------------------------

/// Two-layer LSTM encoder (hidden1 then hidden2 units) with a mirrored decoder and a
/// linear projection back to the input channels.
struct EncoderDecoderParams {
    LstmParams enc1, enc2;
    LstmParams dec1, dec2;
    Tensor proj_W, proj_b;
    std::size_t input_size = 0;
    std::size_t hidden1 = 0;
    std::size_t hidden2 = 0;

    static EncoderDecoderParams init(std::size_t input_size, std::size_t hidden1,
                                     std::size_t hidden2, Rng& rng);
    std::vector<Tensor> tensors() const;
    std::vector<std::pair<std::string, Tensor>> named() const;
};

struct EncodeResult {
    LstmState layer1_final;
    LstmState layer2_final;
    std::vector<Tensor> annotations; // top-layer hidden sequence, T entries [hidden2 x batch]
};

EncodeResult encode(Tape& tape, const EncoderDecoderParams& ed, const std::vector<Tensor>& xs);

/// Unconditioned decoder: initialized with the encoder's final states, fed a constant
/// input each step, emitting `steps` projections. Outputs reconstruct the input sequence
/// in reverse order (decode(...)[t] targets xs[steps-1-t]).
std::vector<Tensor> decode(Tape& tape, const EncoderDecoderParams& ed,
                           const EncodeResult& embedding, std::size_t steps);

// -- assembled models -------------------------------------------------------------------

struct ModelSizes {
    std::size_t enc_hidden1 = 128;
    std::size_t enc_hidden2 = 32;
    std::size_t predictor_hidden = 128;
    std::size_t head_hidden = 128;
    std::size_t lstm_hidden = 128;
    std::size_t gru_hidden = 128;
    std::size_t mlp_hidden1 = 128;
    std::size_t mlp_hidden2 = 64;
};

const std::vector<std::string>& model_families();
bool family_is_ed(const std::string& family);
bool family_uses_wavelet(const std::string& family);
bool family_uses_attention(const std::string& family);

struct WindowBatch {
    std::vector<Tensor> xs; // T tensors [features x batch]
    Tensor targets;         // [1 x batch]
};

WindowBatch make_batch(const WindowedDataset& ds, const std::vector<std::size_t>& indices);

class Model {
public:
    virtual ~Model() = default;
    virtual std::string family() const = 0;
    virtual std::size_t input_features() const = 0;
    virtual std::size_t window_length() const = 0;
    /// Window batch in, [1 x batch] prediction out.
    virtual Tensor forward(Tape& tape, const std::vector<Tensor>& xs) = 0;
    virtual std::vector<Tensor> parameters() = 0;
    virtual std::vector<std::pair<std::string, Tensor>> named_parameters() = 0;
    /// Parameters updated by supervised predictor training.
    virtual std::vector<Tensor> trainable_parameters() { return parameters(); }
    virtual bool trainable() const { return true; }
    virtual EncoderDecoderParams* autoencoder() { return nullptr; }
};

class EdPredictorModel : public Model {
public:
    EdPredictorModel(std::string family, std::size_t input_features, std::size_t window,
                     const ModelSizes& sizes, Rng& rng);

    std::string family() const override { return family_; }
    std::size_t input_features() const override { return ed_.input_size; }
    std::size_t window_length() const override { return window_; }
    Tensor forward(Tape& tape, const std::vector<Tensor>& xs) override;
    std::vector<Tensor> parameters() override;
    std::vector<std::pair<std::string, Tensor>> named_parameters() override;
    std::vector<Tensor> trainable_parameters() override;
    EncoderDecoderParams* autoencoder() override { return &ed_; }

    bool finetune_encoder = true;

    EncoderDecoderParams& encoder_decoder() { return ed_; }
    LstmParams& predictor() { return predictor_; }
    AttentionParams* attention() { return attention_ ? &*attention_ : nullptr; }
    HeadParams& head() { return head_; }
    /// Attention weights of the most recent forward, empty tensor when attention is off.
    Tensor last_attention_weights() const { return last_weights_; }

private:
    std::string family_;
    std::size_t window_;
    EncoderDecoderParams ed_;
    LstmParams predictor_;
    std::optional<AttentionParams> attention_;
    HeadParams head_;
    Tensor last_weights_;
};

class LstmBaselineModel : public Model {
public:
    LstmBaselineModel(std::size_t input_features, std::size_t window, const ModelSizes& sizes,
                      Rng& rng);
    std::string family() const override { return "lstm"; }
    std::size_t input_features() const override { return cell_.input_size; }
    std::size_t window_length() const override { return window_; }
    Tensor forward(Tape& tape, const std::vector<Tensor>& xs) override;
    std::vector<Tensor> parameters() override;
    std::vector<std::pair<std::string, Tensor>> named_parameters() override;

private:
    std::size_t window_;
    LstmParams cell_;
    Tensor out_W, out_b;
};

class GruBaselineModel : public Model {
public:
    GruBaselineModel(std::size_t input_features, std::size_t window, const ModelSizes& sizes,
                     Rng& rng);
    std::string family() const override { return "gru"; }
    std::size_t input_features() const override { return layer1_.input_size; }
    std::size_t window_length() const override { return window_; }
    Tensor forward(Tape& tape, const std::vector<Tensor>& xs) override;
    std::vector<Tensor> parameters() override;
    std::vector<std::pair<std::string, Tensor>> named_parameters() override;

private:
    std::size_t window_;
    GruParams layer1_, layer2_;
    Tensor out_W, out_b;
};

class MlpBaselineModel : public Model {
public:
    MlpBaselineModel(std::size_t input_features, std::size_t window, const ModelSizes& sizes,
                     Rng& rng);
    std::string family() const override { return "mlp"; }
    std::size_t input_features() const override { return features_; }
    std::size_t window_length() const override { return window_; }
    Tensor forward(Tape& tape, const std::vector<Tensor>& xs) override;
    std::vector<Tensor> parameters() override;
    std::vector<std::pair<std::string, Tensor>> named_parameters() override;

private:
    std::size_t features_, window_;
    MlpParams mlp_;
};

/// Sanity floor: predicts the last observed SDV input feature. No parameters.
class PersistenceModel : public Model {
public:
    PersistenceModel(std::size_t input_features, std::size_t window);
    std::string family() const override { return "persistence"; }
    std::size_t input_features() const override { return features_; }
    std::size_t window_length() const override { return window_; }
    Tensor forward(Tape& tape, const std::vector<Tensor>& xs) override;
    std::vector<Tensor> parameters() override { return {}; }
    std::vector<std::pair<std::string, Tensor>> named_parameters() override { return {}; }
    bool trainable() const override { return false; }

private:
    std::size_t features_, window_;
};

std::unique_ptr<Model> make_model(const std::string& family, std::size_t input_features,
                                  std::size_t window, const ModelSizes& sizes, Rng& rng);

} // namespace sdv
