#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "sdv/checkpoint.hpp"
#include "sdv/errors.hpp"
#include "sdv/models.hpp"
#include "sdv/rng.hpp"

using namespace sdv;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("sdv_ckpt_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

ModelSizes tiny_sizes() {
    ModelSizes s;
    s.enc_hidden1 = 4;
    s.enc_hidden2 = 2;
    s.predictor_hidden = 3;
    s.head_hidden = 3;
    s.lstm_hidden = 3;
    s.gru_hidden = 3;
    s.mlp_hidden1 = 4;
    s.mlp_hidden2 = 2;
    return s;
}

Checkpoint sample_meta() {
    Checkpoint meta;
    meta.seed = 99;
    meta.window = 5;
    meta.horizon = 2;
    meta.stride = 1;
    meta.feature_names = {"par", "co2", "temp", "rh", "sdv"};
    meta.wavelet_enabled = true;
    meta.wavelet_levels = 2;
    meta.denoise_rule = "soft_universal";
    meta.extension = "symmetric";
    meta.norm_inputs.entries = {{"par", 0.0, 800.0, false},
                                {"co2", 500.0, 900.0, false},
                                {"temp", 15.0, 25.0, false},
                                {"rh", 60.0, 80.0, false},
                                {"sdv", -0.2, 0.4, false}};
    meta.norm_target = {"sdv", -0.25, 0.45, false};
    meta.sizes = tiny_sizes();
    return meta;
}

} // namespace

TEST_CASE("checkpoint round-trips bit-exactly for every family") {
    TempDir tmp;
    for (const std::string& family : model_families()) {
        CAPTURE(family);
        Rng rng(7);
        std::unique_ptr<Model> model = make_model(family, 5, 5, tiny_sizes(), rng);
        Checkpoint ckpt = checkpoint_from_model(*model, sample_meta());

        std::string a = tmp.file(family + "_a.bin");
        std::string b = tmp.file(family + "_b.bin");
        save_checkpoint(ckpt, a);
        Checkpoint loaded = load_checkpoint(a);
        save_checkpoint(loaded, b);
        CHECK(read_bytes(a) == read_bytes(b)); // save(load(x)) is byte-identical

        CHECK(loaded.architecture == family);
        CHECK(loaded.seed == 99);
        CHECK(loaded.window == 5);
        CHECK(loaded.peephole == "post-update-cell");
        CHECK(loaded.wavelet_enabled);
        CHECK(loaded.norm_target.hi == 0.45);
        CHECK(loaded.feature_names == sample_meta().feature_names);
        REQUIRE(loaded.tensors.size() == ckpt.tensors.size());
        for (std::size_t i = 0; i < loaded.tensors.size(); ++i) {
            CHECK(loaded.tensors[i].first == ckpt.tensors[i].first);
            CHECK(loaded.tensors[i].second.values() == ckpt.tensors[i].second.values());
        }
    }
}

TEST_CASE("model rebuilt from a checkpoint predicts identically") {
    TempDir tmp;
    Rng rng(11);
    std::unique_ptr<Model> model = make_model("wt-ed-lstm-am", 5, 5, tiny_sizes(), rng);
    std::string path = tmp.file("model.bin");
    save_checkpoint(checkpoint_from_model(*model, sample_meta()), path);

    std::unique_ptr<Model> twin = model_from_checkpoint(load_checkpoint(path));
    CHECK(twin->family() == "wt-ed-lstm-am");

    Rng data(3);
    std::vector<Tensor> xs;
    for (int t = 0; t < 5; ++t) {
        Tensor x = Tensor::zeros({5, 2});
        for (double& v : x.values()) v = uniform(data, 0.0, 1.0);
        xs.push_back(x);
    }
    Tape tape;
    Tensor a = model->forward(tape, xs);
    Tensor b = twin->forward(tape, xs);
    CHECK(a.values() == b.values());
}

TEST_CASE("checkpoint rejects corruption and mismatches") {
    TempDir tmp;
    CHECK_THROWS_AS(load_checkpoint(tmp.file("absent.bin")), DataError);

    std::string junk = tmp.file("junk.bin");
    {
        std::ofstream out(junk, std::ios::binary);
        out << "definitely not a checkpoint";
    }
    CHECK_THROWS_AS(load_checkpoint(junk), DataError);

    Rng rng(5);
    std::unique_ptr<Model> model = make_model("lstm", 5, 5, tiny_sizes(), rng);
    std::string path = tmp.file("ok.bin");
    save_checkpoint(checkpoint_from_model(*model, sample_meta()), path);

    // truncated file
    std::string bytes = read_bytes(path);
    std::string clipped = tmp.file("clipped.bin");
    {
        std::ofstream out(clipped, std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    }
    CHECK_THROWS_AS(load_checkpoint(clipped), DataError);

    // architecture/shape mismatch: tamper with a tensor name
    Checkpoint tampered = load_checkpoint(path);
    tampered.tensors[0].first = "lstm.W_q";
    CHECK_THROWS_AS(model_from_checkpoint(tampered), DataError);

    Checkpoint wrong_shape = load_checkpoint(path);
    wrong_shape.sizes.lstm_hidden = 7; // rebuilt model no longer matches stored tensors
    CHECK_THROWS_AS(model_from_checkpoint(wrong_shape), DataError);
}
