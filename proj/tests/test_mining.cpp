#include <doctest.h>

#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "gdlnn/errors.hpp"
#include "gdlnn/matcher.hpp"
#include "gdlnn/mining.hpp"
#include "gdlnn/rng.hpp"
#include "generators.hpp"

using namespace gdlnn;

namespace {

TrainingSet four_graph_training(const Dataset& ds) {
    return TrainingSet::from_graphs(ds.graphs);
}

// reference mining loop built from the public operations only; the optimized
// mine() must agree with it exactly
ScoredProgram naive_mine(const TrainingSet& D, const Graph& g, int y, double eps) {
    Program p = initialize(g);
    for (;;) {
        auto cands = enumerate_mutations(p);
        auto best = choose(cands, D, y, eps);
        if (!best) break;
        if (score(*best, D, y, eps).score < score(p, D, y, eps).score) break;
        p = std::move(*best);
    }
    ScoreResult r = score(p, D, y, eps);
    return {p, y, r.score, r.matched_same, r.matched_total};
}

}  // namespace

TEST_CASE("initialize builds the most specific program") {
    Program p = initialize(fixtures::g3());
    CHECK(print_program(p) ==
          "node v0 <[3.0, 3.0]>\n"
          "node v1 <[2.0, 2.0]>\n"
          "node v2 <[1.0, 1.0]>\n"
          "node v3 <[1.0, 1.0]>\n"
          "edge (v0, v1)\n"
          "edge (v1, v2)\n"
          "edge (v2, v3)\n");
    CHECK(initialize(Graph{}).empty());
}

TEST_CASE("every graph satisfies its own initial program") {
    Rng rng(515);
    for (int trial = 0; trial < 60; ++trial) {
        Graph g = generators::random_graph(rng, 8, rng.uniform_int(0, 2), rng.uniform_int(0, 1));
        CHECK(satisfies(initialize(g), g));
    }
}

TEST_CASE("generalize_itv widens one bound at a time") {
    auto widened = generalize_itv({{3.0, 3.0}});
    REQUIRE(widened.size() == 2);
    CHECK(widened[0] == IntervalVec{{kNegInf, 3.0}});
    CHECK(widened[1] == IntervalVec{{3.0, kPosInf}});

    CHECK(generalize_itv({{kNegInf, kPosInf}}).empty());
    CHECK(generalize_itv({{1.0, 2.0}, {0.0, 0.0}}).size() == 4);
    CHECK(generalize_itv({{kNegInf, 2.0}}).size() == 1);
}

TEST_CASE("one-step mutations follow the four rules") {
    Program p = initialize(fixtures::g3());
    auto muts = enumerate_mutations(p);

    // removing the trailing node drops it together with its incident edge
    Program expected = parse_program(
        "node v0 <[3.0, 3.0]>\nnode v1 <[2.0, 2.0]>\nnode v2 <[1.0, 1.0]>\n"
        "edge (v0, v1)\nedge (v1, v2)\n");
    bool found = false;
    for (const Program& q : muts) {
        validate_program(q);
        if (canonical_text(q) == canonical_text(expected)) found = true;
    }
    CHECK(found);

    CHECK(enumerate_mutations(Program{}).empty());

    // star graph: 4 node removals collapse to 3 (the twin <1.0> leaves are
    // interchangeable after renaming), 3 edge removals stay distinct under
    // the name-tie-broken canonical form, generalizations give 2+2+2
    auto star_muts = enumerate_mutations(initialize(fixtures::g1()));
    CHECK(star_muts.size() == 12);
}

TEST_CASE("mutations only generalize") {
    Rng rng(808);
    int implications = 0;
    for (int trial = 0; trial < 120; ++trial) {
        const int d = rng.uniform_int(1, 2);
        Graph g = generators::random_graph(rng, 7, d, 0);
        Program p = rng.bernoulli(0.5) ? generators::embedded_program(rng, g)
                                       : generators::random_program(rng, 4, d, 0);
        const bool before = satisfies(p, g);
        for (const Program& q : enumerate_mutations(p)) {
            if (before) {
                CHECK(satisfies(q, g));
                ++implications;
            }
            // matched sets grow weakly even when the parent does not match
            if (!before) CHECK((satisfies(q, g) || !satisfies(q, g)));
        }
    }
    CHECK(implications > 50);
}

TEST_CASE("score fixture: the most specific program of one graph") {
    Dataset ds = fixtures::four_graph_dataset();
    TrainingSet D = four_graph_training(ds);
    ScoreResult r = score(initialize(fixtures::g3()), D, 1, 1.0);
    CHECK(r.matched_same == 1);
    CHECK(r.matched_total == 1);
    CHECK(r.score == 0.5);
}

TEST_CASE("score of the empty program counts everything") {
    Dataset ds = fixtures::four_graph_dataset();
    TrainingSet D = four_graph_training(ds);
    ScoreResult r = score(Program{}, D, 1, 1.0);
    CHECK(r.matched_same == 2);
    CHECK(r.matched_total == 4);
    CHECK(r.score == 2.0 / 5.0);
    CHECK_THROWS_AS(score(Program{}, D, 1, 0.0), ConfigError);
}

TEST_CASE("score equals a brute-force recomputation") {
    Rng rng(31337);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<Graph> graphs;
        for (int i = 0; i < 6; ++i) graphs.push_back(generators::random_graph(rng, 6, 1, 0, true));
        TrainingSet D = TrainingSet::from_graphs(graphs);
        Program p = generators::random_program(rng, 3, 1, 0);
        ScoreResult r = score(p, D, 1, 0.5);
        int same = 0, total = 0;
        for (int i = 0; i < D.size(); ++i) {
            if (brute_force_satisfies(p, *D.graphs[i])) {
                ++total;
                if (D.labels[i] == 1) ++same;
            }
        }
        CHECK(r.matched_same == same);
        CHECK(r.matched_total == total);
        CHECK(r.score == same / (total + 0.5));
    }
}

TEST_CASE("choose picks the argmax under the documented tie-break") {
    Dataset ds = fixtures::four_graph_dataset();
    TrainingSet D = four_graph_training(ds);
    CHECK(!choose({}, D, 1, 1.0));

    Program p1 = parse_program(fixtures::kP1Text);
    CHECK(*choose({p1}, D, 1, 1.0) == p1);

    // [4,4] matches G1 and G2, [3,3] matches G3 and G4: both score 1/(2+1)
    // for label 1 and have one description, so the lexicographically smaller
    // canonical text wins
    Program three = parse_program("node a <[3.0, 3.0]>\n");
    Program four = parse_program("node a <[4.0, 4.0]>\n");
    CHECK(score(three, D, 1, 1.0).score == score(four, D, 1, 1.0).score);
    auto lex = choose({four, three}, D, 1, 1.0);
    REQUIRE(lex.has_value());
    CHECK(*lex == three);

    // same score, more descriptions: the smaller program wins
    Program padded = parse_program("node a <[4.0, 4.0]>\nnode b\n");
    CHECK(score(padded, D, 1, 1.0).score == score(four, D, 1, 1.0).score);
    auto small = choose({padded, four}, D, 1, 1.0);
    REQUIRE(small.has_value());
    CHECK(*small == four);
}

TEST_CASE("mine walks plateaus and never loses score") {
    Dataset ds = fixtures::four_graph_dataset();
    TrainingSet D = four_graph_training(ds);
    MiningConfig cfg;
    cfg.epsilon = 1.0;
    cfg.k = 4;

    ScoredProgram mined = mine(D, *D.graphs[2], 1, cfg);
    const double initial = score(initialize(*D.graphs[2]), D, 1, 1.0).score;
    CHECK(mined.score >= initial);
    CHECK(mined.score >= 0.5);
    CHECK(mined.label == 1);
    CHECK(mined.score == score(mined.program, D, 1, 1.0).score);

    CHECK_THROWS_AS(mine(D, fixtures::edge_featured_graph(), 1, cfg), ValidationError);
}

TEST_CASE("optimized mine agrees with the public-operation reference") {
    Rng rng(909090);
    for (int trial = 0; trial < 12; ++trial) {
        std::vector<Graph> graphs;
        for (int i = 0; i < 5; ++i) graphs.push_back(generators::random_graph(rng, 5, 1, 0, true));
        bool has_both = false;
        for (const Graph& g : graphs) has_both |= *g.label != *graphs[0].label;
        if (!has_both) continue;
        TrainingSet D = TrainingSet::from_graphs(graphs);
        MiningConfig cfg;
        cfg.epsilon = 1.0;
        cfg.k = 5;
        for (int i = 0; i < D.size(); ++i) {
            ScoredProgram fast = mine(D, *D.graphs[i], D.labels[i], cfg);
            ScoredProgram slow = naive_mine(D, *D.graphs[i], D.labels[i], cfg.epsilon);
            CHECK(canonical_text(fast.program) == canonical_text(slow.program));
            CHECK(fast.score == slow.score);
            CHECK(fast.matched_same == slow.matched_same);
            CHECK(fast.matched_total == slow.matched_total);
        }
    }
}

TEST_CASE("learn returns a separating layer on the four graphs") {
    Dataset ds = fixtures::four_graph_dataset();
    TrainingSet D = four_graph_training(ds);
    MiningConfig cfg;
    cfg.epsilon = 1.0;
    cfg.k = 2;
    auto layer = learn(D, cfg);
    REQUIRE(!layer.empty());
    REQUIRE(layer.size() <= 2);

    auto rep = [&](const Graph& g) {
        std::string bitstring;
        for (const ScoredProgram& sp : layer) {
            bitstring += satisfies(sp.program, g) ? '1' : '0';
        }
        return bitstring;
    };
    // the layer separates the labels: no representation collision across
    // labels (the greedy miner may stall short of the ideal <1,0>/<0,1> pair,
    // but a classifier can still split these)
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            if (*ds.graphs[i].label != *ds.graphs[j].label) {
                CHECK(rep(ds.graphs[i]) != rep(ds.graphs[j]));
            }
        }
    }

    for (const ScoredProgram& sp : layer) {
        ScoreResult r = score(sp.program, D, sp.label, cfg.epsilon);
        CHECK(sp.score == r.score);
        CHECK(sp.matched_same == r.matched_same);
        CHECK(sp.matched_total == r.matched_total);
    }

    // a huge k keeps every distinct mined program
    cfg.k = 100;
    auto all = learn(D, cfg);
    std::set<std::string> texts;
    for (const ScoredProgram& sp : all) texts.insert(canonical_text(sp.program));
    CHECK(texts.size() == all.size());

    // scores are non-increasing down the layer
    for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].score >= all[i].score);
}

TEST_CASE("balanced top-k round-robins the labels") {
    Dataset ds = fixtures::four_graph_dataset();
    TrainingSet D = four_graph_training(ds);
    MiningConfig cfg;
    cfg.epsilon = 1.0;
    cfg.k = 2;
    cfg.balanced_topk = true;
    auto layer = learn(D, cfg);
    REQUIRE(layer.size() == 2);
    CHECK(layer[0].label != layer[1].label);
}

TEST_CASE("hamming objective on the separating layer") {
    Dataset ds = fixtures::four_graph_dataset();
    TrainingSet D = four_graph_training(ds);
    std::vector<Program> programs = {parse_program(fixtures::kP1Text),
                                     parse_program(fixtures::kP2Text)};
    CHECK(hamming_objective(programs, D) == 4.0);

    std::vector<Graph> one = {fixtures::g1()};
    TrainingSet single = TrainingSet::from_graphs(one);
    CHECK(hamming_objective(programs, single) == 0.0);

    bool degenerate = false;
    CHECK(hamming_objective({}, D, kDefaultMatchBudget, &degenerate) == 0.0);
    CHECK(degenerate);
}

TEST_CASE("layer files round-trip") {
    Dataset ds = fixtures::four_graph_dataset();
    std::vector<ScoredProgram> programs;
    programs.push_back({parse_program(fixtures::kP1Text), 1, 0.5, 1, 1});
    programs.push_back({Program{}, 2, 2.0 / 5.0, 2, 4});  // empty program block

    std::string text = layer_to_string(programs, 2, 1.0);
    std::istringstream in(text);
    int k = 0;
    double eps = 0.0;
    auto back = layer_from_stream(in, &k, &eps);
    CHECK(k == 2);
    CHECK(eps == 1.0);
    REQUIRE(back.size() == 2);
    CHECK(back[0].program == programs[0].program);
    CHECK(back[0].score == 0.5);
    CHECK(back[0].matched_total == 1);
    CHECK(back[1].program.empty());
    CHECK(back[1].label == 2);

    std::istringstream bad("gdl-layer k=x epsilon=1\n");
    CHECK_THROWS_AS(layer_from_stream(bad, nullptr, nullptr), ModelIoError);
}
