#include "tubekit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <numbers>
#include <tuple>

#include "tubekit/error.hpp"
#include "tubekit/prng.hpp"

namespace tubekit {

namespace {

const char* kActionNames[] = {"run",  "walk",  "jump",  "wave",  "kick",  "clap",
                              "swing", "climb", "throw", "bend",  "sit",   "stand"};

std::string action_label(int index) {
    if (index < static_cast<int>(std::size(kActionNames))) return kActionNames[index];
    return "action" + std::to_string(index);
}

std::string video_label(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "video_%04d", index);
    return buf;
}

// Shifts the box to lie inside [0, w) x [0, h) without changing its size.
Box clamp_into(Box box, double w, double h) {
    if (box.x1 < 0.0) box = box.translated(-box.x1, 0.0);
    if (box.y1 < 0.0) box = box.translated(0.0, -box.y1);
    if (box.x2 > w) box = box.translated(w - box.x2, 0.0);
    if (box.y2 > h) box = box.translated(0.0, h - box.y2);
    return box;
}

}  // namespace

void SynthConfig::validate() const {
    if (num_videos < 1 || frames_per_video < 1 || num_actions < 1 || proposals_per_frame < 1) {
        throw InvalidInputError("synth config: counts must be positive");
    }
    if (feature_dim_s < 0 || feature_dim_m < 0 || feature_dim_s + feature_dim_m < 1) {
        throw InvalidInputError("synth config: feature dimensions must sum to at least 1");
    }
    if (num_actions > feature_dim_s + feature_dim_m) {
        throw InvalidInputError("synth config: num_actions must not exceed the fused feature dimension");
    }
    if (!(class_separation >= 0.0) || !std::isfinite(class_separation)) {
        throw InvalidInputError("synth config: class_separation must be finite and >= 0");
    }
    if (!(actor_flow > 0.0) || !(background_flow >= 0.0) || background_flow * 1.1 > actor_flow) {
        throw InvalidInputError("synth config: require 1.1 * background_flow <= actor_flow so the actor "
                                "dominates the normalized flow");
    }
    if (!(jitter >= 0.0) || !std::isfinite(jitter)) {
        throw InvalidInputError("synth config: jitter must be finite and >= 0");
    }
    if (map_width < 24 || map_height < 24) {
        throw InvalidInputError("synth config: flow maps must be at least 24x24");
    }
}

Corpus generate(const SynthConfig& config) {
    config.validate();
    Prng rng(config.seed);

    Corpus corpus;
    corpus.feature_dim_s = config.feature_dim_s;
    corpus.feature_dim_m = config.feature_dim_m;
    for (int a = 0; a < config.num_actions; ++a) {
        corpus.actions.push_back(action_label(a));
    }

    const int dim = config.feature_dim_s + config.feature_dim_m;
    const double w = config.map_width;
    const double h = config.map_height;
    const int T = config.frames_per_video;

    // Class means sit on scaled axes so every pair is class_separation
    // apart; the background mean sits away from all of them.
    std::vector<std::vector<double>> means(static_cast<std::size_t>(config.num_actions),
                                           std::vector<double>(static_cast<std::size_t>(dim), 0.0));
    for (int a = 0; a < config.num_actions; ++a) {
        means[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)] =
            config.class_separation / std::numbers::sqrt2;
    }
    std::vector<double> background_mean(static_cast<std::size_t>(dim),
                                        -config.class_separation / std::sqrt(static_cast<double>(dim)));

    const auto draw_feature = [&rng, dim](const std::vector<double>& mean) {
        std::vector<double> phi(static_cast<std::size_t>(dim));
        for (int d = 0; d < dim; ++d) {
            phi[static_cast<std::size_t>(d)] = mean[static_cast<std::size_t>(d)] + rng.normal();
        }
        return phi;
    };

    for (int v = 0; v < config.num_videos; ++v) {
        const std::string video_id = video_label(v);
        const int action_index = v % config.num_actions;

        VideoEntry video;
        video.frame_count = T;
        video.proposals.resize(static_cast<std::size_t>(T));
        video.features.resize(static_cast<std::size_t>(T));
        video.flow.resize(static_cast<std::size_t>(T));

        // Actor trajectory confined to the left part of the map so static
        // distractors can always be placed clear of it on the right.
        const double bw = std::clamp(w / 5.0, 5.0, w / 3.0);
        const double bh = std::clamp(h / 4.0, 5.0, h / 3.0);
        const double x_lo = 1.0;
        const double x_hi = 0.60 * w - bw;
        const double y_lo = 1.0;
        const double y_hi = h - bh - 1.0;
        const double x_start = rng.uniform(x_lo, x_hi);
        const double x_end = rng.uniform(x_lo, x_hi);
        const double y_start = rng.uniform(y_lo, y_hi);
        const double y_end = rng.uniform(y_lo, y_hi);
        const double steps = T > 1 ? static_cast<double>(T - 1) : 1.0;

        GroundTruthTrack track;
        track.video_id = video_id;
        track.track_id = 0;
        track.action = corpus.actions[static_cast<std::size_t>(action_index)];

        const int num_jitters = (config.proposals_per_frame - 1) / 2;
        const int num_distractors = config.proposals_per_frame - 1 - num_jitters;

        // Static distractors, drawn once per video.
        std::vector<Box> distractors;
        for (int d = 0; d < num_distractors; ++d) {
            const double dw = std::clamp(bw * rng.uniform(0.8, 1.2), 4.0, 0.3 * w);
            const double dh = std::clamp(bh * rng.uniform(0.8, 1.2), 4.0, 0.5 * h);
            const double dx = rng.uniform(0.65 * w, w - dw - 0.5);
            const double dy = rng.uniform(0.5, h - dh - 0.5);
            distractors.push_back(Box{dx, dy, dx + dw, dy + dh});
        }

        for (int t = 0; t < T; ++t) {
            const double fraction = static_cast<double>(t) / steps;
            const double ax = x_start + (x_end - x_start) * fraction;
            const double ay = y_start + (y_end - y_start) * fraction;
            const Box actor{ax, ay, ax + bw, ay + bh};
            track.boxes.push_back({t, actor});

            // Flow: low-magnitude noise everywhere, actor_flow inside the
            // actor box (pixel-center membership, as the saliency scoring
            // uses). The per-frame maximum is therefore actor_flow.
            std::vector<float> flow(static_cast<std::size_t>(config.map_width) *
                                    static_cast<std::size_t>(config.map_height));
            for (int y = 0; y < config.map_height; ++y) {
                for (int x = 0; x < config.map_width; ++x) {
                    const double noise = rng.uniform() * 0.1 * config.background_flow;
                    double value = config.background_flow + noise;
                    const double cx = x + 0.5;
                    const double cy = y + 0.5;
                    if (cx >= actor.x1 && cx < actor.x2 && cy >= actor.y1 && cy < actor.y2) {
                        value = config.actor_flow;
                    }
                    flow[static_cast<std::size_t>(y) * config.map_width + static_cast<std::size_t>(x)] =
                        static_cast<float>(value);
                }
            }
            video.flow[static_cast<std::size_t>(t)] =
                FlowMagnitudeMap(config.map_width, config.map_height, std::move(flow));

            auto& proposals = video.proposals[static_cast<std::size_t>(t)];
            auto& features = video.features[static_cast<std::size_t>(t)];
            const auto add_proposal = [&](int region_id, const Box& box, const std::vector<double>& mean) {
                RegionProposal p;
                p.video_id = video_id;
                p.frame = t;
                p.region_id = region_id;
                p.box = box;
                proposals.push_back(p);

                FeatureRecord record;
                record.video_id = video_id;
                record.frame = t;
                record.region_id = region_id;
                std::vector<double> phi = draw_feature(mean);
                record.phi_s.assign(phi.begin(), phi.begin() + config.feature_dim_s);
                record.phi_m.assign(phi.begin() + config.feature_dim_s, phi.end());
                features.push_back(std::move(record));
            };

            // Region 0 is the ground-truth box itself; only it looks like
            // the action in feature space.
            add_proposal(0, actor, means[static_cast<std::size_t>(action_index)]);

            // Jittered copies in two overlap tiers: well above the negative
            // threshold, or clearly below it while still motion salient.
            // The low tier targets an overlap fraction whose saliency score
            // stays above 0.3 even after pixel-center discretization, while
            // its IoU (f / (2 - f)) stays below the 0.3 training threshold.
            for (int k = 0; k < num_jitters; ++k) {
                const bool high_tier = k < (num_jitters + 1) / 2;
                const double overlap = high_tier ? rng.uniform(0.88, 0.97) : rng.uniform(0.36, 0.46);
                const double split = rng.uniform(0.3, 0.7);
                double dx = bw * (1.0 - std::pow(overlap, split)) * config.jitter;
                double dy = bh * (1.0 - std::pow(overlap, 1.0 - split)) * config.jitter;
                if (rng.uniform() < 0.5) dx = -dx;
                if (rng.uniform() < 0.5) dy = -dy;
                const Box box = clamp_into(actor.translated(dx, dy), w, h);
                add_proposal(1 + k, box, background_mean);
            }

            for (int d = 0; d < num_distractors; ++d) {
                add_proposal(1 + num_jitters + d, distractors[static_cast<std::size_t>(d)],
                             background_mean);
            }
        }

        corpus.videos.emplace(video_id, std::move(video));
        corpus.tracks.push_back(std::move(track));
    }

    std::sort(corpus.tracks.begin(), corpus.tracks.end(),
              [](const GroundTruthTrack& a, const GroundTruthTrack& b) {
                  return std::tie(a.video_id, a.track_id) < std::tie(b.video_id, b.track_id);
              });
    return corpus;
}

Corpus generate(const SynthConfig& config, const std::filesystem::path& root) {
    Corpus corpus = generate(config);
    write_corpus(corpus, root);
    return corpus;
}

}  // namespace tubekit
