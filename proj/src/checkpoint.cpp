#include "sdv/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "sdv/errors.hpp"

namespace sdv {

namespace {

constexpr char kMagic[8] = {'S', 'D', 'V', 'C', 'K', 'P', 'T', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_f64(std::ostream& out, double v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_u8(std::ostream& out, std::uint8_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_str(std::ostream& out, const std::string& s) {
    write_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw DataError("checkpoint truncated");
    return v;
}

double read_f64(std::istream& in) {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw DataError("checkpoint truncated");
    return v;
}

std::uint8_t read_u8(std::istream& in) {
    std::uint8_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw DataError("checkpoint truncated");
    return v;
}

std::string read_str(std::istream& in) {
    std::uint64_t n = read_u64(in);
    if (n > (1u << 20)) throw DataError("checkpoint corrupt: oversized string");
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    if (!in) throw DataError("checkpoint truncated");
    return s;
}

void write_entry(std::ostream& out, const NormalizationParams::Entry& e) {
    write_str(out, e.name);
    write_f64(out, e.lo);
    write_f64(out, e.hi);
    write_u8(out, e.constant ? 1 : 0);
}

NormalizationParams::Entry read_entry(std::istream& in) {
    NormalizationParams::Entry e;
    e.name = read_str(in);
    e.lo = read_f64(in);
    e.hi = read_f64(in);
    e.constant = read_u8(in) != 0;
    return e;
}

} // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write checkpoint '" + path + "'");

    out.write(kMagic, sizeof(kMagic));
    write_str(out, ckpt.architecture);
    write_u64(out, ckpt.seed);
    write_u64(out, ckpt.window);
    write_u64(out, ckpt.horizon);
    write_u64(out, ckpt.stride);
    write_u64(out, ckpt.feature_names.size());
    for (const auto& n : ckpt.feature_names) write_str(out, n);

    write_u8(out, ckpt.wavelet_enabled ? 1 : 0);
    write_str(out, ckpt.wavelet_family);
    write_u64(out, ckpt.wavelet_levels);
    write_str(out, ckpt.denoise_rule);
    write_str(out, ckpt.extension);

    write_u64(out, ckpt.norm_inputs.entries.size());
    for (const auto& e : ckpt.norm_inputs.entries) write_entry(out, e);
    write_entry(out, ckpt.norm_target);

    write_u64(out, ckpt.sizes.enc_hidden1);
    write_u64(out, ckpt.sizes.enc_hidden2);
    write_u64(out, ckpt.sizes.predictor_hidden);
    write_u64(out, ckpt.sizes.head_hidden);
    write_u64(out, ckpt.sizes.lstm_hidden);
    write_u64(out, ckpt.sizes.gru_hidden);
    write_u64(out, ckpt.sizes.mlp_hidden1);
    write_u64(out, ckpt.sizes.mlp_hidden2);
    write_str(out, ckpt.peephole);

    write_u64(out, ckpt.tensors.size());
    for (const auto& [name, tensor] : ckpt.tensors) {
        write_str(out, name);
        write_u64(out, tensor.shape().size());
        for (std::size_t d : tensor.shape()) write_u64(out, d);
        const auto& v = tensor.values();
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(double)));
    }
    if (!out)
        throw DataError("failed while writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open checkpoint '" + path + "'");

    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw DataError("'" + path + "' is not a checkpoint file");

    Checkpoint ckpt;
    ckpt.architecture = read_str(in);
    ckpt.seed = read_u64(in);
    ckpt.window = read_u64(in);
    ckpt.horizon = read_u64(in);
    ckpt.stride = read_u64(in);
    std::uint64_t n_names = read_u64(in);
    for (std::uint64_t i = 0; i < n_names; ++i) ckpt.feature_names.push_back(read_str(in));

    ckpt.wavelet_enabled = read_u8(in) != 0;
    ckpt.wavelet_family = read_str(in);
    ckpt.wavelet_levels = read_u64(in);
    ckpt.denoise_rule = read_str(in);
    ckpt.extension = read_str(in);

    std::uint64_t n_entries = read_u64(in);
    for (std::uint64_t i = 0; i < n_entries; ++i)
        ckpt.norm_inputs.entries.push_back(read_entry(in));
    ckpt.norm_target = read_entry(in);

    ckpt.sizes.enc_hidden1 = read_u64(in);
    ckpt.sizes.enc_hidden2 = read_u64(in);
    ckpt.sizes.predictor_hidden = read_u64(in);
    ckpt.sizes.head_hidden = read_u64(in);
    ckpt.sizes.lstm_hidden = read_u64(in);
    ckpt.sizes.gru_hidden = read_u64(in);
    ckpt.sizes.mlp_hidden1 = read_u64(in);
    ckpt.sizes.mlp_hidden2 = read_u64(in);
    ckpt.peephole = read_str(in);

    std::uint64_t n_tensors = read_u64(in);
    for (std::uint64_t i = 0; i < n_tensors; ++i) {
        std::string name = read_str(in);
        std::uint64_t ndim = read_u64(in);
        if (ndim > 8) throw DataError("checkpoint corrupt: tensor rank");
        std::vector<std::size_t> shape(ndim);
        std::size_t numel = 1;
        for (auto& d : shape) {
            d = read_u64(in);
            numel *= d;
        }
        std::vector<double> values(numel);
        in.read(reinterpret_cast<char*>(values.data()),
                static_cast<std::streamsize>(numel * sizeof(double)));
        if (!in) throw DataError("checkpoint truncated");
        ckpt.tensors.emplace_back(name, Tensor::from(std::move(values), std::move(shape)));
    }
    return ckpt;
}

Checkpoint checkpoint_from_model(Model& model, const Checkpoint& meta) {
    Checkpoint ckpt = meta;
    ckpt.architecture = model.family();
    ckpt.tensors = model.named_parameters();
    return ckpt;
}

std::unique_ptr<Model> model_from_checkpoint(const Checkpoint& ckpt) {
    if (ckpt.feature_names.empty())
        throw DataError("checkpoint carries no feature names");
    Rng rng(ckpt.seed);
    std::unique_ptr<Model> model = make_model(ckpt.architecture, ckpt.feature_names.size(),
                                              ckpt.window, ckpt.sizes, rng);
    auto live = model->named_parameters();
    if (live.size() != ckpt.tensors.size())
        throw DataError("incompatible checkpoint: expected " + std::to_string(live.size()) +
                        " tensors, file has " + std::to_string(ckpt.tensors.size()));
    for (std::size_t i = 0; i < live.size(); ++i) {
        const auto& [name, stored] = ckpt.tensors[i];
        if (name != live[i].first)
            throw DataError("incompatible checkpoint: tensor '" + name + "' where '" +
                            live[i].first + "' was expected");
        if (stored.shape() != live[i].second.shape())
            throw DataError("incompatible checkpoint: shape mismatch for '" + name + "'");
        live[i].second.values() = stored.values();
    }
    return model;
}

} // namespace sdv
