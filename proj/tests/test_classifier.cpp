#include <doctest.h>

#include <vector>

#include "oracles.hpp"
#include "tubekit/classifier.hpp"
#include "tubekit/error.hpp"
#include "tubekit/prng.hpp"

using namespace tubekit;

namespace {

FusedFeature feature(std::vector<double> phi) { return FusedFeature{std::move(phi)}; }

double accuracy(const ActionModel& model, const std::vector<std::vector<double>>& xs,
                const std::vector<double>& ys) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double s = score_region(model, xs[i]);
        const double predicted = s > 0.0 ? 1.0 : -1.0;
        if (predicted == ys[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(xs.size());
}

// Corpus with two annotated videos and one empty action, for label
// assignment checks. Feature dims are (1, 1).
Corpus labeled_corpus() {
    Corpus corpus;
    corpus.actions = {"alpha", "beta", "gamma"};
    corpus.feature_dim_s = 1;
    corpus.feature_dim_m = 1;

    VideoEntry v1;
    v1.frame_count = 1;
    v1.proposals.resize(1);
    v1.features.resize(1);
    v1.flow.resize(1);
    v1.proposals[0] = {
        {"v1", 0, 0, Box{0, 0, 10, 10}},        // the ground-truth box
        {"v1", 0, 1, Box{5.5, 0, 15.5, 10}},    // IoU 45/155 = 0.2903... -> negative
        {"v1", 0, 2, Box{5, 0, 15, 10}},        // IoU 1/3 -> neither side
        {"v1", 0, 3, Box{30, 30, 40, 40}},      // disjoint -> negative
        {"v1", 0, 4, Box{31, 31, 41, 41}},      // no feature record: ignored
        {"v1", 0, 5, Box{0, 0, 10, 5}},         // IoU exactly 0.5 -> neither side
    };
    v1.features[0] = {
        {"v1", 0, 0, {1.0}, {10.0}},
        {"v1", 0, 1, {2.0}, {20.0}},
        {"v1", 0, 2, {3.0}, {30.0}},
        {"v1", 0, 3, {4.0}, {40.0}},
        {"v1", 0, 5, {5.5}, {55.0}},
    };
    corpus.videos.emplace("v1", std::move(v1));

    VideoEntry v2;
    v2.frame_count = 1;
    v2.proposals.resize(1);
    v2.features.resize(1);
    v2.flow.resize(1);
    v2.proposals[0] = {
        {"v2", 0, 0, Box{0, 0, 8, 8}},
        {"v2", 0, 1, Box{20, 20, 28, 28}},
    };
    v2.features[0] = {
        {"v2", 0, 0, {5.0}, {50.0}},
        {"v2", 0, 1, {6.0}, {60.0}},
    };
    corpus.videos.emplace("v2", std::move(v2));

    corpus.tracks.push_back({"v1", 0, "alpha", {{0, Box{0, 0, 10, 10}}}});
    corpus.tracks.push_back({"v2", 0, "beta", {{0, Box{0, 0, 8, 8}}}});
    return corpus;
}

}  // namespace

TEST_SUITE("classifier") {

TEST_CASE("fuse concatenates appearance then motion") {
    const std::vector<double> empty;
    const std::vector<double> x{4.0, 5.0};
    CHECK(fuse(empty, x).phi == x);
    CHECK(fuse(x, empty).phi == x);

    const FusedFeature fused = fuse(std::vector<double>{1, 2}, std::vector<double>{3});
    CHECK(fused.phi == std::vector<double>{1, 2, 3});

    // slicing recovers both parts
    const std::vector<double> again_s(fused.phi.begin(), fused.phi.begin() + 2);
    const std::vector<double> again_m(fused.phi.begin() + 2, fused.phi.end());
    CHECK(again_s == std::vector<double>{1, 2});
    CHECK(again_m == std::vector<double>{3});

    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(fuse(std::vector<double>{inf}, x), InvalidInputError);
}

TEST_CASE("training labels follow the overlap rule") {
    const Corpus corpus = labeled_corpus();
    const TrainingSet set = assign_training_labels(corpus, "alpha", 0.3);

    REQUIRE(set.positives.size() == 1);
    CHECK(set.positives[0].phi == std::vector<double>{1.0, 10.0});

    // v1: the 0.29-overlap box and the disjoint box; the 1/3-overlap box is
    // excluded. v2 has no alpha ground truth, so everything there with
    // features is negative.
    REQUIRE(set.negatives.size() == 4);
    CHECK(set.negatives[0].phi == std::vector<double>{2.0, 20.0});
    CHECK(set.negatives[1].phi == std::vector<double>{4.0, 40.0});
    CHECK(set.negatives[2].phi == std::vector<double>{5.0, 50.0});
    CHECK(set.negatives[3].phi == std::vector<double>{6.0, 60.0});
}

TEST_CASE("labels for an action without ground truth fail") {
    const Corpus corpus = labeled_corpus();
    CHECK_THROWS_WITH_AS(assign_training_labels(corpus, "gamma", 0.3), doctest::Contains("gamma"),
                         TrainingError);
    CHECK_THROWS_AS(assign_training_labels(corpus, "unknown", 0.3), TrainingError);
}

TEST_CASE("a ground-truth box without a matching proposal fails") {
    Corpus corpus = labeled_corpus();
    corpus.tracks[0].boxes[0].box = Box{0.5, 0, 10.5, 10};  // no longer proposal 0
    CHECK_THROWS_WITH_AS(assign_training_labels(corpus, "alpha", 0.3),
                         doctest::Contains("no matching proposal"), TrainingError);
}

TEST_CASE("train_svm separates a trivial 1-D problem") {
    const std::vector<FusedFeature> pos{feature({2.0}), feature({2.5}), feature({3.0})};
    const std::vector<FusedFeature> neg{feature({-2.0}), feature({-2.5}), feature({-3.0})};
    TrainConfig config;
    config.seed = 1;
    const ActionModel model = train_svm("x", pos, neg, config);
    for (const auto& p : pos) CHECK(score_region(model, p.phi) > 0.0);
    for (const auto& n : neg) CHECK(score_region(model, n.phi) < 0.0);
}

TEST_CASE("train_svm matches the reference solver on separable blobs") {
    Prng rng(42);
    const auto problem = oracle::make_blobs(rng, 50, 8.0);

    std::vector<FusedFeature> pos, neg;
    for (std::size_t i = 0; i < problem.xs.size(); ++i) {
        (problem.ys[i] > 0 ? pos : neg).push_back(feature(problem.xs[i]));
    }

    TrainConfig config;
    config.seed = 7;
    TrainDiagnostics diag;
    const ActionModel model = train_svm("blob", pos, neg, config, &diag);
    const oracle::RefSvmModel reference = oracle::reference_svm(problem.xs, problem.ys, config.cost);

    const ActionModel reference_as_model{"ref", reference.weights, reference.bias};
    CHECK(accuracy(model, problem.xs, problem.ys) >= 0.99);
    CHECK(accuracy(reference_as_model, problem.xs, problem.ys) >= 0.99);

    for (std::size_t i = 0; i < problem.xs.size(); ++i) {
        const double mine = score_region(model, problem.xs[i]);
        const double theirs = score_region(reference_as_model, problem.xs[i]);
        CHECK((mine > 0.0) == (theirs > 0.0));
    }
}

TEST_CASE("identical positives and negatives land on the prior objective") {
    std::vector<FusedFeature> pos(10, feature({1.5, -2.0}));
    std::vector<FusedFeature> neg(10, feature({1.5, -2.0}));
    TrainConfig config;
    config.seed = 3;
    TrainDiagnostics diag;
    const ActionModel model = train_svm("same", pos, neg, config, &diag);

    // With every sample identical and classes balanced, the optimum is the
    // zero model: objective C * n, accuracy one half.
    CHECK(diag.objective == doctest::Approx(config.cost * 20.0));
    std::size_t correct = 0;
    for (const auto& p : pos) {
        if (score_region(model, p.phi) > 0.0) ++correct;
    }
    for (const auto& n : neg) {
        if (!(score_region(model, n.phi) > 0.0)) ++correct;
    }
    CHECK(static_cast<double>(correct) / 20.0 == doctest::Approx(0.5));
}

TEST_CASE("training is deterministic given a seed") {
    Prng rng(9);
    const auto problem = oracle::make_blobs(rng, 30, 6.0);
    std::vector<FusedFeature> pos, neg;
    for (std::size_t i = 0; i < problem.xs.size(); ++i) {
        (problem.ys[i] > 0 ? pos : neg).push_back(feature(problem.xs[i]));
    }
    TrainConfig config;
    config.seed = 1234;
    const ActionModel a = train_svm("d", pos, neg, config);
    const ActionModel b = train_svm("d", pos, neg, config);
    CHECK(a.weights == b.weights);  // bit-identical
    CHECK(a.bias == b.bias);
}

TEST_CASE("hard negative mining pulls in margin violators") {
    // Most negatives are far, a band of them sits inside the margin. A tiny
    // initial subset forces mining to find the band.
    Prng rng(31);
    std::vector<FusedFeature> pos, neg;
    for (int i = 0; i < 10; ++i) pos.push_back(feature({3.0 + 0.1 * i}));
    for (int i = 0; i < 60; ++i) neg.push_back(feature({-3.0 - 0.01 * i}));
    for (int i = 0; i < 20; ++i) neg.push_back(feature({-0.4 - 0.01 * i}));  // violators

    TrainConfig config;
    config.seed = 77;
    config.initial_neg_per_pos = 1;  // 10 of 80 negatives to start
    TrainDiagnostics diag;
    const ActionModel model = train_svm("mine", pos, neg, config, &diag);

    CHECK(diag.active_history.front() == 10);
    CHECK(diag.active_negatives >= diag.active_history.front());
    // The active set grows monotonically across rounds.
    for (std::size_t r = 1; r < diag.active_history.size(); ++r) {
        CHECK(diag.active_history[r] >= diag.active_history[r - 1]);
    }
    // Either the mining closed (no violator outside the active set) or the
    // round budget was exhausted; verify whichever is claimed.
    if (diag.fully_mined) {
        for (std::size_t i = 0; i < neg.size(); ++i) {
            if (!diag.active[i]) {
                CHECK(score_region(model, neg[i].phi) <= -1.0);
            }
        }
    } else {
        CHECK(diag.rounds == config.hnm_rounds);
    }
    // Objective at exit never exceeds the entry objective of the last round
    // (the zero model scores C * active samples).
    CHECK(diag.objective <= config.cost * static_cast<double>(pos.size() + diag.active_negatives));
}

TEST_CASE("train_svm rejects empty classes") {
    const std::vector<FusedFeature> pos{feature({1.0})};
    TrainConfig config;
    CHECK_THROWS_AS(train_svm("x", pos, {}, config), TrainingError);
    CHECK_THROWS_AS(train_svm("x", {}, pos, config), TrainingError);
}

TEST_CASE("score_region is the affine model response") {
    const ActionModel zero{"z", {0.0, 0.0}, 0.0};
    CHECK(score_region(zero, std::vector<double>{5.0, -3.0}) == 0.0);

    const ActionModel model{"m", {1.0, -1.0}, 0.5};
    CHECK(score_region(model, std::vector<double>{2.0, 1.0}) == doctest::Approx(1.5));

    // linearity: score(c*phi) - b == c * (score(phi) - b)
    const std::vector<double> phi{0.7, -1.3};
    const double base = score_region(model, phi) - model.bias;
    for (const double c : {-2.0, 0.5, 3.0}) {
        const std::vector<double> scaled{c * phi[0], c * phi[1]};
        CHECK(score_region(model, scaled) - model.bias == doctest::Approx(c * base).epsilon(1e-12));
    }

    CHECK_THROWS_AS(score_region(model, std::vector<double>{1.0}), InvalidInputError);
}

TEST_CASE("score_vector covers the vocabulary in order") {
    const std::vector<std::string> vocabulary{"run", "walk"};
    const std::vector<ActionModel> models{
        {"walk", {1.0, 0.0}, 0.0},
        {"run", {0.0, 1.0}, 1.0},
    };
    const std::vector<double> phi{2.0, 3.0};
    const auto scores = score_vector(models, vocabulary, phi);
    REQUIRE(scores.size() == 2);
    CHECK(scores[0].first == "run");
    CHECK(scores[0].second == score_region(models[1], phi));
    CHECK(scores[1].first == "walk");
    CHECK(scores[1].second == score_region(models[0], phi));

    const std::vector<std::string> bigger{"run", "walk", "jump"};
    CHECK_THROWS_AS(score_vector(models, bigger, phi), InvalidInputError);

    const std::vector<ActionModel> duplicated{models[0], models[0], models[1]};
    CHECK_THROWS_AS(score_vector(duplicated, vocabulary, phi), InvalidInputError);

    const std::vector<std::string> single{"walk"};
    const std::vector<ActionModel> one{models[0]};
    const auto reduced = score_vector(one, single, phi);
    REQUIRE(reduced.size() == 1);
    CHECK(reduced[0].second == score_region(models[0], phi));
}

}  // TEST_SUITE
