#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "temp_dir.hpp"
#include "tubekit/corpus.hpp"
#include "tubekit/error.hpp"
#include "tubekit/prng.hpp"
#include "tubekit/synth.hpp"

using namespace tubekit;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_raw(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << content;
}

// A hand-built two-video corpus exercising every file kind.
Corpus tiny_corpus() {
    Corpus corpus;
    corpus.actions = {"run", "walk"};
    corpus.feature_dim_s = 2;
    corpus.feature_dim_m = 1;

    VideoEntry a;
    a.frame_count = 2;
    a.proposals.resize(2);
    a.features.resize(2);
    a.flow.resize(2);
    a.proposals[0] = {{"vid_a", 0, 0, Box{0, 0, 10, 10}}, {"vid_a", 0, 1, Box{2.5, 0.25, 12, 10}}};
    a.proposals[1] = {{"vid_a", 1, 0, Box{1, 0, 11, 10}}};
    a.features[0] = {{"vid_a", 0, 0, {0.5, -1.25}, {2.0}}, {"vid_a", 0, 1, {0.1, 0.2}, {-0.3}}};
    a.features[1] = {{"vid_a", 1, 0, {1.0, 1.0}, {1.0}}};
    a.flow[0] = FlowMagnitudeMap(3, 2, {0.0f, 0.5f, 1.0f, 0.25f, 0.125f, 0.75f});
    a.flow[1] = FlowMagnitudeMap(3, 2, {1.0f, 1.0f, 0.0f, 0.0f, 0.5f, 0.5f});
    corpus.videos.emplace("vid_a", std::move(a));

    VideoEntry b;
    b.frame_count = 1;
    b.proposals.resize(1);
    b.features.resize(1);
    b.flow.resize(1);
    b.proposals[0] = {{"vid_b", 0, 0, Box{3, 3, 9, 9}}};
    b.features[0] = {{"vid_b", 0, 0, {0.0, 0.0}, {0.0}}};
    b.flow[0] = FlowMagnitudeMap(1, 1, {2.0f});
    corpus.videos.emplace("vid_b", std::move(b));

    corpus.tracks.push_back({"vid_a", 0, "run", {{0, Box{0, 0, 10, 10}}, {1, Box{1, 0, 11, 10}}}});
    corpus.tracks.push_back({"vid_b", 0, "walk", {{0, Box{3, 3, 9, 9}}}});
    return corpus;
}

}  // namespace

TEST_SUITE("corpus-io") {

TEST_CASE("corpus round-trips losslessly, bytes included") {
    const Corpus corpus = tiny_corpus();
    TempDir dir_a("corpus_a");
    TempDir dir_b("corpus_b");

    write_corpus(corpus, dir_a.path);
    const Corpus loaded = load_corpus(dir_a.path);
    CHECK(loaded == corpus);

    write_corpus(loaded, dir_b.path);
    for (const char* name : {"actions.txt", "proposals.tsv", "features.tsv", "groundtruth.tsv"}) {
        CHECK(slurp(dir_a.path / name) == slurp(dir_b.path / name));
    }
    CHECK(slurp(dir_a.path / "flow/vid_a/0.flm") == slurp(dir_b.path / "flow/vid_a/0.flm"));
    CHECK(slurp(dir_a.path / "flow/vid_b/0.flm") == slurp(dir_b.path / "flow/vid_b/0.flm"));
}

TEST_CASE("a corpus with zero videos loads and rewrites identically") {
    TempDir dir_a("empty_a");
    TempDir dir_b("empty_b");
    write_corpus(Corpus{}, dir_a.path);

    const Corpus loaded = load_corpus(dir_a.path);
    CHECK(loaded.videos.empty());
    CHECK(loaded.actions.empty());
    CHECK(loaded.tracks.empty());

    write_corpus(loaded, dir_b.path);
    for (const char* name : {"actions.txt", "proposals.tsv", "features.tsv", "groundtruth.tsv"}) {
        CHECK(slurp(dir_a.path / name) == slurp(dir_b.path / name));
        CHECK(slurp(dir_a.path / name).empty());
    }
}

TEST_CASE("loading is deterministic") {
    TempDir dir("determinism");
    write_corpus(tiny_corpus(), dir.path);
    CHECK(load_corpus(dir.path) == load_corpus(dir.path));
}

TEST_CASE("missing files are load errors naming the file") {
    TempDir dir("missing");
    write_corpus(tiny_corpus(), dir.path);
    fs::remove(dir.path / "features.tsv");
    CHECK_THROWS_WITH_AS(load_corpus(dir.path), doctest::Contains("features.tsv"), IoError);
}

TEST_CASE("dangling feature references are load errors") {
    TempDir dir("dangling");
    write_corpus(tiny_corpus(), dir.path);
    write_raw(dir.path / "features.tsv", "vid_a\t0\t9\t2\t1\t0.5\t-1.25\t2\n");
    try {
        load_corpus(dir.path);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.file().find("features.tsv") != std::string::npos);
        CHECK(e.line() == 1);
        CHECK(std::string(e.what()).find("no such proposal") != std::string::npos);
    }
}

TEST_CASE("duplicate region ids are rejected") {
    TempDir dir("dup");
    write_corpus(tiny_corpus(), dir.path);
    write_raw(dir.path / "proposals.tsv",
              "vid_a\t0\t0\t0\t0\t10\t10\n"
              "vid_a\t0\t0\t1\t1\t11\t11\n");
    CHECK_THROWS_AS(load_corpus(dir.path), ParseError);
}

TEST_CASE("non-dense frame indices are rejected") {
    TempDir dir("gap");
    write_corpus(Corpus{}, dir.path);
    write_raw(dir.path / "actions.txt", "run\n");
    // Frames 0 and 2 exist; frame 1 is referenced nowhere.
    write_raw(dir.path / "proposals.tsv",
              "vid\t0\t0\t0\t0\t10\t10\n"
              "vid\t2\t0\t0\t0\t10\t10\n");
    CHECK_THROWS_WITH_AS(load_corpus(dir.path), doctest::Contains("dense"), ParseError);
}

TEST_CASE("groundtruth labels must exist in the vocabulary") {
    TempDir dir("badlabel");
    write_corpus(tiny_corpus(), dir.path);
    write_raw(dir.path / "groundtruth.tsv", "vid_a\t0\tfly\t0\t0\t0\t10\t10\n");
    CHECK_THROWS_WITH_AS(load_corpus(dir.path), doctest::Contains("fly"), ParseError);
}

TEST_CASE("flow maps round-trip, including a 1x1 grid") {
    TempDir dir("flow");
    const FlowMagnitudeMap one(1, 1, {3.25f});
    write_flow_map(one, dir.path / "one.flm");
    CHECK(read_flow_map(dir.path / "one.flm") == one);

    Prng rng(5);
    std::vector<float> values(35);
    for (float& v : values) v = static_cast<float>(rng.uniform(0.0, 9.0));
    const FlowMagnitudeMap map(7, 5, std::move(values));
    write_flow_map(map, dir.path / "map.flm");
    CHECK(read_flow_map(dir.path / "map.flm") == map);

    const std::string bytes = slurp(dir.path / "map.flm");
    write_raw(dir.path / "truncated.flm", bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(read_flow_map(dir.path / "truncated.flm"), ParseError);
    write_raw(dir.path / "badmagic.flm", "XXXX" + bytes.substr(4));
    CHECK_THROWS_AS(read_flow_map(dir.path / "badmagic.flm"), ParseError);
}

TEST_CASE("tubes round-trip") {
    TempDir dir("tubes");

    SUBCASE("empty list") {
        write_tubes({}, dir.path / "tubes.tsv");
        CHECK(read_tubes(dir.path / "tubes.tsv").empty());
        CHECK(slurp(dir.path / "tubes.tsv").empty());
    }

    SUBCASE("single three-frame tube") {
        ActionTube tube;
        tube.video_id = "vid";
        tube.action = "run";
        tube.score = -0.12345678901234567;
        tube.regions = {{0, Box{0, 0, 4, 4}}, {1, Box{0.5, 0.5, 4.5, 4.25}}, {2, Box{1, 1, 5, 5}}};
        write_tubes(std::vector<ActionTube>{tube}, dir.path / "tubes.tsv");
        const auto loaded = read_tubes(dir.path / "tubes.tsv");
        REQUIRE(loaded.size() == 1);
        CHECK(loaded[0] == tube);
    }

    SUBCASE("malformed lines carry their line number") {
        write_raw(dir.path / "tubes.tsv",
                  "vid\trun\t1.5\t1\t0\t0\t0\t4\t4\n"
                  "vid\trun\tnot_a_number\t1\t0\t0\t0\t4\t4\n");
        try {
            read_tubes(dir.path / "tubes.tsv");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
        }
    }

    SUBCASE("frames must run from zero") {
        write_raw(dir.path / "tubes.tsv", "vid\trun\t1.5\t2\t1\t0\t0\t4\t4\t2\t0\t0\t4\t4\n");
        CHECK_THROWS_AS(read_tubes(dir.path / "tubes.tsv"), ParseError);
    }
}

TEST_CASE("models round-trip bit-exactly") {
    TempDir dir("models");

    std::vector<ActionModel> models;
    models.push_back({"run", std::vector<double>(16, 0.0), 0.0});
    ActionModel random_model;
    random_model.action = "walk";
    Prng rng(123);
    for (int i = 0; i < 16; ++i) random_model.weights.push_back(rng.normal() * 3.0);
    random_model.bias = rng.normal();
    models.push_back(random_model);

    write_models(models, dir.path / "models.tsv");
    const auto loaded = read_models(dir.path / "models.tsv");
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0] == models[0]);
    CHECK(loaded[1] == models[1]);  // exact double equality via round-trip formatting

    SUBCASE("truncated rows are parse errors") {
        write_raw(dir.path / "models.tsv", "run\t4\t0.5\t1\t2\t3\n");
        CHECK_THROWS_WITH_AS(read_models(dir.path / "models.tsv"), doctest::Contains("dimension"),
                             ParseError);
    }

    SUBCASE("duplicate actions are parse errors") {
        write_raw(dir.path / "models.tsv",
                  "run\t1\t0\t1\n"
                  "run\t1\t0\t2\n");
        CHECK_THROWS_AS(read_models(dir.path / "models.tsv"), ParseError);
    }
}

TEST_CASE("score tables round-trip") {
    TempDir dir("scores");
    std::vector<ScoreRow> rows;
    rows.push_back({"vid", 0, 0, {1.5, -2.25}});
    rows.push_back({"vid", 0, 1, {0.0, 0.125}});
    write_scores(rows, dir.path / "scores.tsv");
    CHECK(read_scores(dir.path / "scores.tsv") == rows);

    write_raw(dir.path / "scores.tsv",
              "vid\t0\t0\t1\t2\n"
              "vid\t0\t1\t1\n");
    CHECK_THROWS_AS(read_scores(dir.path / "scores.tsv"), ParseError);
}

TEST_CASE("proposal files reject malformed rows") {
    TempDir dir("props");
    write_raw(dir.path / "p.tsv", "vid\t0\t0\t0\t0\t10\n");
    CHECK_THROWS_AS(read_proposals(dir.path / "p.tsv"), ParseError);
    write_raw(dir.path / "p.tsv", "vid\t0\t0\t10\t0\t0\t10\n");  // x1 > x2
    CHECK_THROWS_AS(read_proposals(dir.path / "p.tsv"), ParseError);
    write_raw(dir.path / "p.tsv", "vid\t-1\t0\t0\t0\t10\t10\n");
    CHECK_THROWS_AS(read_proposals(dir.path / "p.tsv"), ParseError);
}

TEST_CASE("a generated corpus survives write-load-write byte-for-byte") {
    SynthConfig config;
    config.num_videos = 3;
    config.frames_per_video = 4;
    config.num_actions = 2;
    config.proposals_per_frame = 5;
    config.feature_dim_s = 3;
    config.feature_dim_m = 2;
    config.seed = 99;

    TempDir dir_a("synth_a");
    TempDir dir_b("synth_b");
    const Corpus corpus = generate(config, dir_a.path);
    const Corpus loaded = load_corpus(dir_a.path);
    CHECK(loaded == corpus);

    write_corpus(loaded, dir_b.path);
    for (const auto& entry : fs::recursive_directory_iterator(dir_a.path)) {
        if (!entry.is_regular_file()) continue;
        const fs::path relative = fs::relative(entry.path(), dir_a.path);
        CHECK(slurp(dir_a.path / relative) == slurp(dir_b.path / relative));
    }
}

}  // TEST_SUITE
