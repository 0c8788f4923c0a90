// tubekit: batch pipeline for linking per-frame region proposals into
// scored action tubes and evaluating them.
//
// Stages: synth -> filter -> train -> score -> link -> classify -> eval.
// Every stage writes its output atomically plus a .manifest.json capturing
// the resolved flags; `rerun` replays a manifest bit-for-bit.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "tubekit/classifier.hpp"
#include "tubekit/corpus.hpp"
#include "tubekit/error.hpp"
#include "tubekit/linker.hpp"
#include "tubekit/metrics.hpp"
#include "tubekit/pipeline.hpp"
#include "tubekit/synth.hpp"
#include "tubekit/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tubekit;

namespace {

constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 success, 1 usage, 2 data/validation, 3 internal.
enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

std::string one_line(std::string text) {
    for (char& c : text) {
        if (c == '\n' || c == '\t' || c == '\r') c = ' ';
    }
    return text;
}

void print_error(const std::string& stage, const std::string& file, const std::string& reason) {
    std::cerr << "error\t" << stage << '\t' << (file.empty() ? "-" : file) << '\t' << one_line(reason)
              << '\n';
}

int guarded(const std::string& stage, const std::function<void()>& body) {
    try {
        body();
        return kOk;
    } catch (const ParseError& e) {
        print_error(stage, e.file(), e.what());
        return kData;
    } catch (const Error& e) {
        print_error(stage, "", e.what());
        return kData;
    } catch (const std::exception& e) {
        print_error(stage, "", std::string("internal: ") + e.what());
        return kInternal;
    }
}

// Ordered flag list -> manifest json + replayable argv.
struct Manifest {
    std::string subcommand;
    std::string corpus;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> flags;

    void add(const std::string& name, const std::string& value) { flags.emplace_back(name, value); }
    void add(const std::string& name, double value) { flags.emplace_back(name, format_real(value)); }
    void add(const std::string& name, int value) { flags.emplace_back(name, std::to_string(value)); }
    void add(const std::string& name, std::uint64_t value) {
        flags.emplace_back(name, std::to_string(value));
    }

    void write(const fs::path& where) const {
        json j;
        j["tool"] = "tubekit";
        j["version"] = kVersion;
        j["subcommand"] = subcommand;
        j["corpus"] = corpus;
        j["seed"] = seed;
        json flag_obj = json::object();
        json argv = json::array();
        argv.push_back(subcommand);
        for (const auto& [name, value] : flags) {
            flag_obj[name] = value;
            argv.push_back("--" + name);
            argv.push_back(value);
        }
        j["flags"] = flag_obj;
        j["argv"] = argv;
        write_file_atomic(where, j.dump(2) + "\n");
    }
};

void require_file(const fs::path& file, const std::string& hint) {
    if (!fs::exists(file)) {
        throw IoError(file.string() + ": not found (" + hint + ")");
    }
}

std::string saliency_report_line(const SaliencyReport& report) {
    return "saliency-report\t" + std::to_string(report.total_count) + '\t' +
           std::to_string(report.retained_count) + '\t' + format_real(report.discard_fraction) + '\t' +
           format_real(report.alpha);
}

int dispatch(const std::vector<std::string>& args);

// ---------------------------------------------------------------- synth --

struct SynthArgs {
    std::string out;
    SynthConfig config;
};

void add_synth(CLI::App& app, int& exit_code) {
    auto args = std::make_shared<SynthArgs>();
    CLI::App* cmd = app.add_subcommand("synth", "Generate a deterministic synthetic corpus");
    cmd->add_option("--out", args->out, "Corpus output directory")->required();
    cmd->add_option("--seed", args->config.seed, "Random seed");
    cmd->add_option("--num-videos", args->config.num_videos, "Videos to generate");
    cmd->add_option("--frames", args->config.frames_per_video, "Frames per video");
    cmd->add_option("--num-actions", args->config.num_actions, "Size of the action vocabulary");
    cmd->add_option("--proposals-per-frame", args->config.proposals_per_frame, "Proposals per frame");
    cmd->add_option("--feature-dim-s", args->config.feature_dim_s, "Appearance feature dimension");
    cmd->add_option("--feature-dim-m", args->config.feature_dim_m, "Motion feature dimension");
    cmd->add_option("--class-separation", args->config.class_separation,
                    "Distance between class feature means, in noise units");
    cmd->add_option("--actor-flow", args->config.actor_flow, "Flow magnitude inside the actor box");
    cmd->add_option("--background-flow", args->config.background_flow, "Flow magnitude elsewhere");
    cmd->add_option("--jitter", args->config.jitter, "Scale of proposal box perturbation");
    cmd->add_option("--map-width", args->config.map_width, "Flow map width in pixels");
    cmd->add_option("--map-height", args->config.map_height, "Flow map height in pixels");
    cmd->callback([args, &exit_code] {
        exit_code = guarded("synth", [&] {
            const Corpus corpus = generate(args->config, args->out);

            Manifest manifest;
            manifest.subcommand = "synth";
            manifest.corpus = args->out;
            manifest.seed = args->config.seed;
            manifest.add("out", args->out);
            manifest.add("seed", args->config.seed);
            manifest.add("num-videos", args->config.num_videos);
            manifest.add("frames", args->config.frames_per_video);
            manifest.add("num-actions", args->config.num_actions);
            manifest.add("proposals-per-frame", args->config.proposals_per_frame);
            manifest.add("feature-dim-s", args->config.feature_dim_s);
            manifest.add("feature-dim-m", args->config.feature_dim_m);
            manifest.add("class-separation", args->config.class_separation);
            manifest.add("actor-flow", args->config.actor_flow);
            manifest.add("background-flow", args->config.background_flow);
            manifest.add("jitter", args->config.jitter);
            manifest.add("map-width", args->config.map_width);
            manifest.add("map-height", args->config.map_height);
            manifest.write(fs::path(args->out) / "synth.manifest.json");

            std::cout << "synth: " << corpus.videos.size() << " videos, " << corpus.actions.size()
                      << " actions -> " << args->out << '\n';
        });
    });
}

// --------------------------------------------------------------- filter --

struct FilterArgs {
    std::string corpus;
    std::string out;
    std::string report;
    double alpha = 0.3;
};

void add_filter(CLI::App& app, int& exit_code) {
    auto args = std::make_shared<FilterArgs>();
    CLI::App* cmd = app.add_subcommand("filter", "Discard proposals that are not motion salient");
    cmd->add_option("--corpus", args->corpus, "Corpus root")->required();
    cmd->add_option("--alpha", args->alpha, "Saliency threshold in [0,1]");
    cmd->add_option("--out", args->out, "Retained-proposals file")->required();
    cmd->add_option("--report", args->report, "Optional saliency report file");
    cmd->callback([args, &exit_code] {
        exit_code = guarded("filter", [&] {
            const Corpus corpus = load_corpus(args->corpus);
            const FilterResult result = run_filter(corpus, args->alpha);
            write_proposals(result.retained, args->out);

            const std::string line = saliency_report_line(result.report);
            std::cout << line << '\n';
            if (!args->report.empty()) {
                write_file_atomic(args->report, line + "\n");
            }

            Manifest manifest;
            manifest.subcommand = "filter";
            manifest.corpus = args->corpus;
            manifest.add("corpus", args->corpus);
            manifest.add("alpha", args->alpha);
            manifest.add("out", args->out);
            if (!args->report.empty()) manifest.add("report", args->report);
            manifest.write(args->out + ".manifest.json");
        });
    });
}

// ---------------------------------------------------------------- train --

struct TrainArgs {
    std::string corpus;
    std::string out;
    TrainConfig config;
};

void add_train(CLI::App& app, int& exit_code) {
    auto args = std::make_shared<TrainArgs>();
    CLI::App* cmd = app.add_subcommand("train", "Train per-action SVMs with hard negative mining");
    cmd->add_option("--corpus", args->corpus, "Corpus root")->required();
    cmd->add_option("--out", args->out, "Models output file")->required();
    cmd->add_option("--neg-overlap", args->config.neg_overlap, "Negative IoU threshold");
    cmd->add_option("-C,--cost", args->config.cost, "Hinge loss weight");
    cmd->add_option("--hnm-rounds", args->config.hnm_rounds, "Mining round cap");
    cmd->add_option("--neg-per-pos", args->config.initial_neg_per_pos, "Initial negatives per positive");
    cmd->add_option("--seed", args->config.seed, "Random seed");
    cmd->add_option("--max-iterations", args->config.max_iterations, "Solver iteration cap");
    cmd->add_option("--tolerance", args->config.tolerance, "Solver objective tolerance");
    cmd->callback([args, &exit_code] {
        exit_code = guarded("train", [&] {
            const Corpus corpus = load_corpus(args->corpus);
            const auto models = run_train(corpus, args->config);
            write_models(models, args->out);

            Manifest manifest;
            manifest.subcommand = "train";
            manifest.corpus = args->corpus;
            manifest.seed = args->config.seed;
            manifest.add("corpus", args->corpus);
            manifest.add("out", args->out);
            manifest.add("neg-overlap", args->config.neg_overlap);
            manifest.add("cost", args->config.cost);
            manifest.add("hnm-rounds", args->config.hnm_rounds);
            manifest.add("neg-per-pos", args->config.initial_neg_per_pos);
            manifest.add("seed", args->config.seed);
            manifest.add("max-iterations", args->config.max_iterations);
            manifest.add("tolerance", args->config.tolerance);
            manifest.write(args->out + ".manifest.json");

            std::cout << "train: " << models.size() << " models (dim "
                      << (models.empty() ? 0 : models.front().weights.size()) << ") -> " << args->out
                      << '\n';
        });
    });
}

// ---------------------------------------------------------------- score --

struct ScoreArgs {
    std::string corpus;
    std::string models;
    std::string out;
    std::string proposals;
};

void add_score(CLI::App& app, int& exit_code) {
    auto args = std::make_shared<ScoreArgs>();
    CLI::App* cmd = app.add_subcommand("score", "Score every proposal under every action model");
    cmd->add_option("--corpus", args->corpus, "Corpus root")->required();
    cmd->add_option("--models", args->models, "Models file from the train stage")->required();
    cmd->add_option("--out", args->out, "Score table output file")->required();
    cmd->add_option("--proposals", args->proposals, "Optional filtered-proposals file");
    cmd->callback([args, &exit_code] {
        exit_code = guarded("score", [&] {
            const Corpus corpus = load_corpus(args->corpus);
            require_file(args->models, "run the train stage first");
            const auto models = read_models(args->models);

            std::vector<RegionProposal> subset;
            const std::vector<RegionProposal>* subset_ptr = nullptr;
            if (!args->proposals.empty()) {
                subset = read_proposals(args->proposals);
                subset_ptr = &subset;
            }
            const auto rows = run_score(corpus, models, subset_ptr);
            write_scores(rows, args->out);

            Manifest manifest;
            manifest.subcommand = "score";
            manifest.corpus = args->corpus;
            manifest.add("corpus", args->corpus);
            manifest.add("models", args->models);
            manifest.add("out", args->out);
            if (!args->proposals.empty()) manifest.add("proposals", args->proposals);
            manifest.write(args->out + ".manifest.json");

            std::cout << "score: " << rows.size() << " regions x " << corpus.actions.size()
                      << " actions -> " << args->out << '\n';
        });
    });
}

// ----------------------------------------------------------------- link --

struct LinkArgs {
    std::string corpus;
    std::string models;
    std::string out;
    std::string proposals;
    LinkConfig config;
};

void add_link(CLI::App& app, int& exit_code) {
    auto args = std::make_shared<LinkArgs>();
    CLI::App* cmd = app.add_subcommand("link", "Link scored regions into action tubes");
    cmd->add_option("--corpus", args->corpus, "Corpus root")->required();
    cmd->add_option("--models", args->models, "Models file from the train stage")->required();
    cmd->add_option("--out", args->out, "Tubes output file")->required();
    cmd->add_option("--lambda", args->config.lambda, "Overlap weight in the link score");
    cmd->add_option("--max-tubes", args->config.max_tubes, "Tubes per (video, action)");
    cmd->add_option("--proposals", args->proposals, "Optional filtered-proposals file");
    cmd->callback([args, &exit_code] {
        exit_code = guarded("link", [&] {
            const Corpus corpus = load_corpus(args->corpus);
            require_file(args->models, "run the train stage first");
            const auto models = read_models(args->models);

            std::vector<RegionProposal> subset;
            const std::vector<RegionProposal>* subset_ptr = nullptr;
            if (!args->proposals.empty()) {
                subset = read_proposals(args->proposals);
                subset_ptr = &subset;
            }
            const auto tubes = run_link(corpus, models, args->config, subset_ptr);
            write_tubes(tubes, args->out);

            Manifest manifest;
            manifest.subcommand = "link";
            manifest.corpus = args->corpus;
            manifest.add("corpus", args->corpus);
            manifest.add("models", args->models);
            manifest.add("out", args->out);
            manifest.add("lambda", args->config.lambda);
            manifest.add("max-tubes", args->config.max_tubes);
            if (!args->proposals.empty()) manifest.add("proposals", args->proposals);
            manifest.write(args->out + ".manifest.json");

            std::cout << "link: " << tubes.size() << " tubes -> " << args->out << '\n';
        });
    });
}

// ------------------------------------------------------------- classify --

struct ClassifyArgs {
    std::string corpus;
    std::string tubes;
    std::string out;
};

void add_classify(CLI::App& app, int& exit_code) {
    auto args = std::make_shared<ClassifyArgs>();
    CLI::App* cmd = app.add_subcommand("classify", "Label videos by their best action tube");
    cmd->add_option("--corpus", args->corpus, "Corpus root (for the vocabulary)")->required();
    cmd->add_option("--tubes", args->tubes, "Tubes file from the link stage")->required();
    cmd->add_option("--out", args->out, "Per-video labels output file")->required();
    cmd->callback([args, &exit_code] {
        exit_code = guarded("classify", [&] {
            const Corpus corpus = load_corpus(args->corpus);
            require_file(args->tubes, "run the link stage first");
            const auto tubes = read_tubes(args->tubes);
            const auto labels = run_classify(tubes, corpus.actions);

            std::string out;
            for (const auto& [video, label] : labels) {
                out += video;
                out += '\t';
                out += label;
                out += '\n';
            }
            write_file_atomic(args->out, out);

            Manifest manifest;
            manifest.subcommand = "classify";
            manifest.corpus = args->corpus;
            manifest.add("corpus", args->corpus);
            manifest.add("tubes", args->tubes);
            manifest.add("out", args->out);
            manifest.write(args->out + ".manifest.json");

            std::cout << "classify: " << labels.size() << " videos -> " << args->out << '\n';
        });
    });
}

// ----------------------------------------------------------------- eval --

struct EvalArgs {
    std::string corpus;
    std::string scores;
    std::string tubes;
    std::string out;
    std::string roc_out;
    std::string pr_out;
    EvalConfig config;
};

std::string format_ap_rows(const char* metric, const char* mean_metric, const APReport& report,
                           double sigma) {
    std::string rows;
    const std::string sigma_str = format_real(sigma);
    for (const ClassAP& entry : report.per_class) {
        rows += metric;
        rows += '\t' + entry.action + '\t' + sigma_str + '\t';
        rows += entry.defined ? format_real(entry.ap) : "undefined";
        rows += '\n';
    }
    rows += mean_metric;
    rows += "\t-\t" + sigma_str + '\t' + format_real(report.mean_ap) + '\n';
    return rows;
}

void add_eval(CLI::App& app, int& exit_code) {
    auto args = std::make_shared<EvalArgs>();
    CLI::App* cmd = app.add_subcommand("eval", "Compute detection and classification metrics");
    cmd->add_option("--corpus", args->corpus, "Corpus root (ground truth)")->required();
    cmd->add_option("--scores", args->scores, "Score table for frame-level AP");
    cmd->add_option("--tubes", args->tubes, "Tubes file for video-level metrics");
    cmd->add_option("--sigma", args->config.sigma, "Overlap threshold");
    cmd->add_option("--fpr-max", args->config.fpr_max, "ROC truncation point");
    cmd->add_option("--topk", args->config.topk, "Tubes kept per class and video for the ROC");
    cmd->add_option("--out", args->out, "Metrics report output file")->required();
    cmd->add_option("--roc-out", args->roc_out, "Optional ROC point dump");
    cmd->add_option("--pr-out", args->pr_out, "Optional PR point dump");
    cmd->callback([args, &exit_code] {
        exit_code = guarded("eval", [&] {
            const Corpus corpus = load_corpus(args->corpus);

            std::vector<ScoreRow> scores;
            const std::vector<ScoreRow>* scores_ptr = nullptr;
            if (!args->scores.empty()) {
                require_file(args->scores, "run the score stage first");
                scores = read_scores(args->scores);
                scores_ptr = &scores;
            }
            std::vector<ActionTube> tubes;
            const std::vector<ActionTube>* tubes_ptr = nullptr;
            if (!args->tubes.empty()) {
                require_file(args->tubes, "run the link stage first");
                tubes = read_tubes(args->tubes);
                tubes_ptr = &tubes;
            }

            const EvalReport report = run_eval(corpus, scores_ptr, tubes_ptr, args->config);

            std::string out;
            std::string summary;
            if (report.frame.has_value()) {
                out += format_ap_rows("frame_ap", "frame_map", *report.frame, args->config.sigma);
                summary += "eval: frame-mAP " + format_real(report.frame->mean_ap) + '\n';
            }
            if (report.video.has_value()) {
                out += format_ap_rows("video_ap", "video_map", *report.video, args->config.sigma);
                summary += "eval: video-mAP " + format_real(report.video->mean_ap) + '\n';
            }
            if (report.roc.has_value()) {
                out += "auc\t-\t" + format_real(args->config.sigma) + '\t' +
                       format_real(report.roc->auc) + '\n';
                summary += "eval: AUC " + format_real(report.roc->auc) + '\n';
            }
            if (report.confusion.has_value()) {
                out += "accuracy\t-\t-\t" + format_real(report.confusion->accuracy) + '\n';
                const auto& m = *report.confusion;
                for (std::size_t t = 0; t < m.labels.size(); ++t) {
                    for (std::size_t p = 0; p < m.labels.size(); ++p) {
                        out += "confusion\t" + m.labels[t] + '/' + m.labels[p] + "\t-\t" +
                               std::to_string(m.at(t, p)) + '\n';
                    }
                }
                summary += "eval: accuracy " + format_real(report.confusion->accuracy) + '\n';
            }
            write_file_atomic(args->out, out);

            if (!args->roc_out.empty() && report.roc.has_value()) {
                std::string dump;
                for (const RocPoint& point : report.roc->points) {
                    dump += "roc\t" + format_real(point.threshold) + '\t' + format_real(point.fpr) +
                            '\t' + format_real(point.tpr) + '\n';
                }
                write_file_atomic(args->roc_out, dump);
            }
            if (!args->pr_out.empty()) {
                std::string dump;
                const auto dump_curves = [&dump](const char* metric, const APReport& ap) {
                    for (const ClassAP& entry : ap.per_class) {
                        for (const PRPoint& point : entry.curve.points) {
                            dump += std::string(metric) + '\t' + entry.action + '\t' +
                                    format_real(point.threshold) + '\t' + format_real(point.precision) +
                                    '\t' + format_real(point.recall) + '\n';
                        }
                    }
                };
                if (report.frame.has_value()) dump_curves("frame_pr", *report.frame);
                if (report.video.has_value()) dump_curves("video_pr", *report.video);
                write_file_atomic(args->pr_out, dump);
            }

            Manifest manifest;
            manifest.subcommand = "eval";
            manifest.corpus = args->corpus;
            manifest.add("corpus", args->corpus);
            if (!args->scores.empty()) manifest.add("scores", args->scores);
            if (!args->tubes.empty()) manifest.add("tubes", args->tubes);
            manifest.add("sigma", args->config.sigma);
            manifest.add("fpr-max", args->config.fpr_max);
            manifest.add("topk", args->config.topk);
            manifest.add("out", args->out);
            if (!args->roc_out.empty()) manifest.add("roc-out", args->roc_out);
            if (!args->pr_out.empty()) manifest.add("pr-out", args->pr_out);
            manifest.write(args->out + ".manifest.json");

            std::cout << summary;
        });
    });
}

// ---------------------------------------------------------------- rerun --

void add_rerun(CLI::App& app, int& exit_code) {
    auto manifest_path = std::make_shared<std::string>();
    CLI::App* cmd = app.add_subcommand("rerun", "Replay a stage from its manifest");
    cmd->add_option("--manifest", *manifest_path, "Manifest file of a previous run")->required();
    cmd->callback([manifest_path, &exit_code] {
        exit_code = guarded("rerun", [&] {
            require_file(*manifest_path, "point --manifest at a .manifest.json");
            std::ifstream in(*manifest_path);
            json j;
            try {
                in >> j;
            } catch (const json::exception& e) {
                throw ParseError(*manifest_path, 0, std::string("not a manifest: ") + e.what());
            }
            if (!j.contains("tool") || j["tool"] != "tubekit" || !j.contains("argv")) {
                throw ParseError(*manifest_path, 0, "not a tubekit manifest");
            }
            if (j["subcommand"] == "rerun") {
                throw InvalidInputError("refusing to replay a rerun manifest");
            }
            std::vector<std::string> args;
            for (const auto& token : j["argv"]) {
                args.push_back(token.get<std::string>());
            }
            const int replay = dispatch(args);
            if (replay != kOk) {
                throw Error("replay exited with code " + std::to_string(replay));
            }
        });
    });
}

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"Action-tube toolkit: filter, score, link, and evaluate region proposals"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    int exit_code = kOk;
    add_synth(app, exit_code);
    add_filter(app, exit_code);
    add_train(app, exit_code);
    add_score(app, exit_code);
    add_link(app, exit_code);
    add_classify(app, exit_code);
    add_eval(app, exit_code);
    add_rerun(app, exit_code);

    std::vector<const char*> argv;
    argv.push_back("tubekit");
    for (const std::string& arg : args) argv.push_back(arg.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("usage", "", e.what());
        return kUsage;
    }
    return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return dispatch(args);
}
