#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "fixtures.hpp"
#include "gdlnn/errors.hpp"
#include "gdlnn/model.hpp"
#include "gdlnn/rng.hpp"
#include "generators.hpp"

using namespace gdlnn;

namespace {

// four-graph model with a hand-wired head: class scores are the two
// representation coordinates, so the predicted label follows the layer
Model tiny_model() {
    Model m;
    m.programs.push_back({parse_program(fixtures::kP1Text), 1, 0.5, 1, 1});
    m.programs.push_back({parse_program(fixtures::kP2Text), 2, 0.5, 1, 1});
    m.class_labels = {1, 2};
    m.mining_k = 2;
    m.mining_epsilon = 1.0;
    m.mlp = Mlp::zeros({2, 2});
    m.mlp.weights[0] = {3.0, 0.0, 0.0, 3.0};  // identity-ish head
    m.metadata["note"] = "hand built";
    return m;
}

}  // namespace

TEST_CASE("embeddings reproduce the four-graph table exactly") {
    std::vector<Program> layer = {parse_program(fixtures::kP1Text),
                                  parse_program(fixtures::kP2Text)};
    std::vector<const Program*> ptrs = {&layer[0], &layer[1]};
    CHECK(embed(fixtures::g1(), ptrs, Activation::kSigma) == std::vector<double>{1.0, 0.0});
    CHECK(embed(fixtures::g2(), ptrs, Activation::kSigma) == std::vector<double>{0.0, 1.0});
    CHECK(embed(fixtures::g3(), ptrs, Activation::kSigma) == std::vector<double>{1.0, 0.0});
    CHECK(embed(fixtures::g4(), ptrs, Activation::kSigma) == std::vector<double>{0.0, 1.0});

    CHECK(embed(fixtures::g1(), {}, Activation::kSigma).empty());
}

TEST_CASE("count activation dominates the indicator activation") {
    Rng rng(606);
    for (int trial = 0; trial < 60; ++trial) {
        Graph g = generators::random_graph(rng, 7, 1, 0);
        Program p = generators::random_program(rng, 3, 1, 0);
        std::vector<const Program*> ptrs = {&p};
        auto sig = embed(g, ptrs, Activation::kSigma);
        auto cnt = embed(g, ptrs, Activation::kSigmaCount);
        CHECK(cnt[0] >= sig[0]);
        CHECK(cnt[0] == std::floor(cnt[0]));
        CHECK((cnt[0] > 0) == (sig[0] == 1.0));
    }
}

TEST_CASE("predict composes the layer with the head") {
    Model m = tiny_model();
    auto [label1, probs1] = predict(m, fixtures::g1());
    CHECK(label1 == 1);
    auto [label2, probs2] = predict(m, fixtures::g2());
    CHECK(label2 == 2);

    auto rep = embed(fixtures::g1(), m.program_ptrs(), m.activation);
    CHECK(predict_from_representation(m, rep).first == label1);

    // all-zero head: argmax ties resolve to the lowest class index
    Model zero = tiny_model();
    zero.mlp = Mlp::zeros({2, 2});
    CHECK(predict(zero, fixtures::g1()).first == 1);
    CHECK(predict(zero, fixtures::g4()).first == 1);
}

TEST_CASE("consistently permuting programs and head columns changes nothing") {
    Model m = tiny_model();
    Model swapped = m;
    std::swap(swapped.programs[0], swapped.programs[1]);
    // swap the two input rows of the first weight matrix
    std::swap(swapped.mlp.weights[0][0], swapped.mlp.weights[0][2]);
    std::swap(swapped.mlp.weights[0][1], swapped.mlp.weights[0][3]);
    for (const Graph& g : {fixtures::g1(), fixtures::g2(), fixtures::g3(), fixtures::g4()}) {
        CHECK(predict(m, g).first == predict(swapped, g).first);
    }
}

TEST_CASE("model files round-trip bit for bit") {
    Model m = tiny_model();
    const std::string path = (std::filesystem::temp_directory_path() / "gdlnn_model_rt.txt").string();
    save_model(m, path);
    Model back = load_model(path);

    CHECK(model_to_string(back) == model_to_string(m));
    CHECK(back.activation == m.activation);
    CHECK(back.class_labels == m.class_labels);
    CHECK(back.metadata.at("note") == "hand built");
    for (const Graph& g : {fixtures::g1(), fixtures::g2(), fixtures::g3(), fixtures::g4()}) {
        CHECK(predict(back, g) == predict(m, g));
    }
    std::remove(path.c_str());
}

TEST_CASE("empty layer models round-trip") {
    Model m;
    m.class_labels = {0};
    m.mlp = Mlp::zeros({0, 1});
    std::istringstream in(model_to_string(m));
    Model back = model_from_stream(in);
    CHECK(back.programs.empty());
    CHECK(back.mlp.sizes == std::vector<int>{0, 1});
}

TEST_CASE("malformed model files are rejected") {
    Model m = tiny_model();
    std::string text = model_to_string(m);

    std::istringstream wrong_header("gdlnn-model v999\n");
    CHECK_THROWS_AS(model_from_stream(wrong_header), ModelIoError);

    std::istringstream truncated(text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(model_from_stream(truncated), ModelIoError);

    std::istringstream no_end(text.substr(0, text.rfind("end")));
    CHECK_THROWS_AS(model_from_stream(no_end), ModelIoError);

    CHECK_THROWS_AS(load_model("/nonexistent/model.txt"), ModelIoError);
}
