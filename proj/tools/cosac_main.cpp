// cosac command-line front-end: generate synthetic corpora, fit topic
// estimates, compute coverage bounds, evaluate against ground truth, and
// replay any run from its manifest.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cosac/corpus.hpp"
#include "cosac/eval.hpp"
#include "cosac/geometry.hpp"
#include "cosac/scan.hpp"
#include "cosac/serialize.hpp"
#include "cosac/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kArtifactVersion = "cosac 0.1.0";

// exit codes: 0 ok, 2 I/O, 3 validation/parse, 4 no topics found
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoTopicsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class StageTimer {
public:
    void start(const std::string& stage) {
        stage_ = stage;
        t0_ = std::chrono::steady_clock::now();
    }
    void stop() {
        const auto t1 = std::chrono::steady_clock::now();
        const double sec = std::chrono::duration<double>(t1 - t0_).count();
        timings_[stage_] = sec;
        std::printf("  [%-10s] %.3f s\n", stage_.c_str(), sec);
    }
    const std::map<std::string, double>& timings() const { return timings_; }

private:
    std::string stage_;
    std::chrono::steady_clock::time_point t0_;
    std::map<std::string, double> timings_;
};

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument("invalid JSON in " + path + ": " + e.what());
    }
    return j;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

void write_file_checked(const std::string& path, const std::string& content) {
    try {
        cosac::write_text_file(path, content);
    } catch (const std::runtime_error& e) {
        throw IoError(e.what());
    }
}

void write_manifest(const std::string& path, const std::string& subcommand, const json& config,
                    const json& inputs, const json& outputs, std::uint64_t seed,
                    const std::map<std::string, double>& timings) {
    json j;
    j["format_version"] = cosac::kFormatVersion;
    j["artifact_version"] = kArtifactVersion;
    j["subcommand"] = subcommand;
    j["seed"] = seed;
    j["config"] = config;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["timings_sec"] = timings;
    write_file_checked(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------- generate

struct GenerateConfig {
    std::size_t topics = 15;
    std::size_t vocab = 1000;
    std::size_t docs = 5000;
    std::size_t doc_length = 500;
    double alpha = 0.1;
    double eta = 0.1;
    std::uint64_t seed = 0;
    std::string out_dir = "run";
    double plant_anchors = 0.0;  // anchor mass; 0 disables planting
};

void to_json(json& j, const GenerateConfig& c) {
    j = json{{"topics", c.topics},   {"vocab", c.vocab},
             {"docs", c.docs},       {"doc_length", c.doc_length},
             {"alpha", c.alpha},     {"eta", c.eta},
             {"seed", c.seed},       {"out_dir", c.out_dir},
             {"plant_anchors", c.plant_anchors}};
}
void from_json(const json& j, GenerateConfig& c) {
    j.at("topics").get_to(c.topics);
    j.at("vocab").get_to(c.vocab);
    j.at("docs").get_to(c.docs);
    j.at("doc_length").get_to(c.doc_length);
    j.at("alpha").get_to(c.alpha);
    j.at("eta").get_to(c.eta);
    j.at("seed").get_to(c.seed);
    j.at("out_dir").get_to(c.out_dir);
    j.at("plant_anchors").get_to(c.plant_anchors);
}

int run_generate(const GenerateConfig& cfg) {
    cosac::LdaSpec spec;
    spec.n_topics = cfg.topics;
    spec.vocab_size = cfg.vocab;
    spec.n_docs = cfg.docs;
    spec.doc_lengths = {static_cast<std::uint32_t>(cfg.doc_length)};
    spec.alpha = {cfg.alpha};
    spec.eta = {cfg.eta};
    spec.seed = cfg.seed;
    spec.validate();
    if (spec.vocab_size < spec.n_topics)
        std::fprintf(stderr, "warning: vocabulary smaller than topic count\n");

    StageTimer timer;
    timer.start("sample");
    cosac::BagOfWords bow;
    cosac::GroundTruth truth;
    std::vector<std::uint32_t> anchors;
    if (cfg.plant_anchors > 0.0) {
        auto s = cosac::sample_planted_anchor_lda(spec, cfg.plant_anchors);
        bow = std::move(s.bow);
        truth = std::move(s.truth);
        anchors = std::move(s.anchors);
    } else {
        auto s = cosac::sample_lda(spec);
        bow = std::move(s.bow);
        truth = std::move(s.truth);
    }
    timer.stop();

    timer.start("write");
    ensure_dir(cfg.out_dir);
    const fs::path dir(cfg.out_dir);
    {
        std::ostringstream ss;
        cosac::save_uci_bow(ss, bow);
        write_file_checked((dir / "corpus.uci").string(), ss.str());
    }
    {
        std::string vocab;
        for (std::size_t w = 1; w <= cfg.vocab; ++w) vocab += "w" + std::to_string(w) + "\n";
        write_file_checked((dir / "vocab.txt").string(), vocab);
    }
    write_file_checked((dir / "ground_truth.json").string(),
                       cosac::ground_truth_to_json(truth).dump() + "\n");
    json outputs = {{"corpus", (dir / "corpus.uci").string()},
                    {"vocab", (dir / "vocab.txt").string()},
                    {"ground_truth", (dir / "ground_truth.json").string()}};
    if (!anchors.empty()) {
        json aj = {{"format_version", cosac::kFormatVersion}, {"anchors", anchors}};
        write_file_checked((dir / "anchors.json").string(), aj.dump() + "\n");
        outputs["anchors"] = (dir / "anchors.json").string();
    }
    timer.stop();

    write_manifest((dir / "manifest.json").string(), "generate", json(cfg), json::object(),
                   outputs, cfg.seed, timer.timings());
    std::printf("generated M=%zu V=%zu K=%zu -> %s\n", bow.n_docs, bow.vocab_size, cfg.topics,
                cfg.out_dir.c_str());
    return 0;
}

// --------------------------------------------------------------------- fit

struct FitConfig {
    std::string input;
    std::string mode = "documents";  // documents | points | anchors
    double omega = -1.0;             // resolved per mode below
    double norm_quantile = 0.5;
    double lambda = -1.0;
    std::size_t kmeans_iters = 30;
    double mean_shift_tol = 1e-6;
    std::size_t mean_shift_iters = 100;
    std::string out = "topics";
    std::string vocab_file;

    void resolve_defaults() {
        if (omega < 0.0) omega = (mode == "anchors") ? 0.4 : 0.6;
        if (lambda < 0.0) lambda = (mode == "anchors") ? 0.015 : 0.001;
    }
};

void to_json(json& j, const FitConfig& c) {
    j = json{{"input", c.input},
             {"mode", c.mode},
             {"omega", c.omega},
             {"norm_quantile", c.norm_quantile},
             {"lambda", c.lambda},
             {"kmeans_iters", c.kmeans_iters},
             {"mean_shift_tol", c.mean_shift_tol},
             {"mean_shift_iters", c.mean_shift_iters},
             {"out", c.out},
             {"vocab_file", c.vocab_file}};
}
void from_json(const json& j, FitConfig& c) {
    j.at("input").get_to(c.input);
    j.at("mode").get_to(c.mode);
    j.at("omega").get_to(c.omega);
    j.at("norm_quantile").get_to(c.norm_quantile);
    j.at("lambda").get_to(c.lambda);
    j.at("kmeans_iters").get_to(c.kmeans_iters);
    j.at("mean_shift_tol").get_to(c.mean_shift_tol);
    j.at("mean_shift_iters").get_to(c.mean_shift_iters);
    j.at("out").get_to(c.out);
    j.at("vocab_file").get_to(c.vocab_file);
}

int run_fit(FitConfig cfg) {
    cfg.resolve_defaults();
    if (cfg.mode != "documents" && cfg.mode != "points" && cfg.mode != "anchors")
        throw std::invalid_argument("fit: --mode must be documents, points or anchors");
    if (cfg.omega > 1.5)
        std::fprintf(stderr,
                     "warning: omega %.3g exceeds the single-vertex aperture bound "
                     "1 + 1/(K-1) of every equilateral geometry with K >= 3; proceeding\n",
                     cfg.omega);

    cosac::ScanConfig scan_cfg;
    scan_cfg.omega = cfg.omega;
    scan_cfg.norm_threshold_quantile = cfg.norm_quantile;
    scan_cfg.outlier_fraction = cfg.lambda;
    scan_cfg.kmeans_iters = cfg.kmeans_iters;
    scan_cfg.mean_shift_tol = cfg.mean_shift_tol;
    scan_cfg.mean_shift_max_iters = cfg.mean_shift_iters;
    scan_cfg.validate();

    StageTimer timer;
    timer.start("load");
    std::ifstream in(cfg.input, std::ios::binary);
    if (!in) throw IoError("cannot open " + cfg.input);
    const cosac::BagOfWords bow = cosac::load_uci_bow(in);
    timer.stop();
    if (const fs::path parent = fs::path(cfg.out).parent_path(); !parent.empty())
        ensure_dir(parent.string());

    json outputs;
    std::size_t k_hat = 0;
    if (cfg.mode == "anchors") {
        timer.start("cooccur");
        const auto rows = cosac::cooccurrence(bow);
        timer.stop();
        timer.start("scan");
        cosac::ScanTrace trace;
        const auto anchors = cosac::find_anchors(rows, scan_cfg, &trace);
        timer.stop();
        k_hat = anchors.size();
        timer.start("write");
        json aj = {{"format_version", cosac::kFormatVersion},
                   {"omega", cfg.omega},
                   {"lambda", cfg.lambda},
                   {"anchors", anchors}};
        if (!cfg.vocab_file.empty()) {
            std::ifstream vf(cfg.vocab_file);
            if (!vf) throw IoError("cannot open " + cfg.vocab_file);
            std::vector<std::string> words;
            std::string w;
            while (std::getline(vf, w)) words.push_back(w);
            json tokens = json::array();
            for (auto a : anchors)
                tokens.push_back(a < words.size() ? words[a] : ("w" + std::to_string(a + 1)));
            aj["anchor_tokens"] = tokens;
        }
        write_file_checked(cfg.out + ".anchors.json", aj.dump(2) + "\n");
        write_file_checked(cfg.out + ".scan.csv", cosac::scan_trace_to_csv(trace));
        outputs = {{"anchors", cfg.out + ".anchors.json"}, {"scan_csv", cfg.out + ".scan.csv"}};
        timer.stop();
        std::printf("anchors found: %zu\n", anchors.size());
        for (auto a : anchors) std::printf("  word %u\n", a + 1);
    } else {
        timer.start("center");
        const cosac::CenteredCorpus corpus = cosac::normalize_and_center(bow);
        timer.stop();
        timer.start("scan");
        cosac::ScanTrace trace;
        cosac::TopicEstimate est;
        if (cfg.mode == "documents") {
            est = cosac::scan_documents(corpus, scan_cfg, &trace);
        } else {
            const double threshold =
                scan_cfg.explicit_norm_threshold
                    ? *scan_cfg.explicit_norm_threshold
                    : cosac::norm_threshold_from_quantile(corpus.norms, cfg.norm_quantile);
            est = cosac::scan_points(corpus, cfg.omega, threshold, &trace);
        }
        timer.stop();
        k_hat = est.k_hat;
        timer.start("write");
        write_file_checked(cfg.out + ".json", cosac::topic_estimate_to_json(est).dump() + "\n");
        write_file_checked(cfg.out + ".csv", cosac::topics_to_csv(est));
        write_file_checked(cfg.out + ".scan.csv", cosac::scan_trace_to_csv(trace));
        write_file_checked(cfg.out + ".docs.csv", cosac::document_records_to_csv(corpus, est));
        outputs = {{"topics_json", cfg.out + ".json"},
                   {"topics_csv", cfg.out + ".csv"},
                   {"scan_csv", cfg.out + ".scan.csv"},
                   {"docs_csv", cfg.out + ".docs.csv"}};
        timer.stop();
        std::printf("k_hat = %zu\n", est.k_hat);
    }

    write_manifest(cfg.out + ".manifest.json", "fit", json(cfg),
                   json{{"input", cfg.input}}, outputs, 0, timer.timings());
    if (k_hat == 0) throw NoTopicsError("no topics found");
    return 0;
}

// ------------------------------------------------------------------ bounds

struct BoundsConfig {
    std::string truth;          // ground-truth JSON; empty when --equilateral given
    std::size_t equilateral = 0;  // K for a regular simplex
    double ball_quantile = 0.5;
    double omega = 0.6;
    std::size_t mc_samples = 100000;
    double alpha = -1.0;  // symmetric; default 1/K
    std::uint64_t seed = 0;
    std::string out_dir;  // optional report + manifest
};

void to_json(json& j, const BoundsConfig& c) {
    j = json{{"truth", c.truth},       {"equilateral", c.equilateral},
             {"ball_quantile", c.ball_quantile}, {"omega", c.omega},
             {"mc_samples", c.mc_samples},       {"alpha", c.alpha},
             {"seed", c.seed},                   {"out_dir", c.out_dir}};
}
void from_json(const json& j, BoundsConfig& c) {
    j.at("truth").get_to(c.truth);
    j.at("equilateral").get_to(c.equilateral);
    j.at("ball_quantile").get_to(c.ball_quantile);
    j.at("omega").get_to(c.omega);
    j.at("mc_samples").get_to(c.mc_samples);
    j.at("alpha").get_to(c.alpha);
    j.at("seed").get_to(c.seed);
    j.at("out_dir").get_to(c.out_dir);
}

int run_bounds(const BoundsConfig& cfg) {
    if (cfg.truth.empty() == (cfg.equilateral == 0))
        throw std::invalid_argument("bounds: give exactly one of --truth or --equilateral");

    cosac::SimplexGeometry geom;
    if (cfg.equilateral > 0) {
        geom = cosac::regular_simplex(cfg.equilateral);
    } else {
        const json gt = load_json_file(cfg.truth);
        const auto beta = gt.at("beta").get<std::vector<cosac::DenseVector>>();
        if (beta.size() < 2) throw std::invalid_argument("bounds: need at least 2 topics");
        // center at the intrinsic incenter (a property of the vertex set)
        const cosac::DenseVector zero(beta.front().size(), 0.0);
        const auto pre = cosac::simplex_geometry(beta, zero);
        geom = cosac::simplex_geometry(beta, pre.incenter_offset);
    }
    const std::size_t k = geom.n_vertices;
    const double alpha_sym = cfg.alpha > 0.0 ? cfg.alpha : 1.0 / static_cast<double>(k);
    const std::vector<double> alpha(k, alpha_sym);

    auto norms = cosac::monte_carlo_point_norms(geom, cfg.mc_samples, alpha, cfg.seed);
    const double ball = cosac::norm_threshold_from_quantile(norms, cfg.ball_quantile);
    const auto bounds = cosac::compute_omega_bounds(geom, ball, cfg.omega);
    const double covered =
        cosac::monte_carlo_coverage(geom, cfg.omega, ball, cfg.mc_samples, alpha, cfg.seed);
    double cap_mass = std::numeric_limits<double>::quiet_NaN();
    if (bounds.c_lambda > 0.0 && bounds.c_lambda < 1.0) {
        cap_mass = cosac::cap_mass_lower_bound(bounds.c_lambda, alpha, 0);
        for (std::size_t i = 1; i < k; ++i)
            cap_mass = std::min(cap_mass, cosac::cap_mass_lower_bound(bounds.c_lambda, alpha, i));
    }

    std::printf("K = %zu, inradius/R_max = %.6g\n", k, geom.inradius / geom.r_max);
    std::printf("omega1            = %.6g\n", bounds.omega1);
    std::printf("omega2            = %.6g   (loose ceiling; conservative variant %.6g)\n",
                bounds.omega2, bounds.omega2_proof);
    std::printf("min angular dist  = %.6g   (single-vertex aperture ceiling)\n",
                bounds.angular_min);
    std::printf("omega3            = %.6g   (ball radius %.6g = %.2f-quantile of %zu samples)\n",
                bounds.omega3, ball, cfg.ball_quantile, cfg.mc_samples);
    std::printf("c_lambda(omega=%.3g) = %.6g\n", cfg.omega, bounds.c_lambda);
    std::printf("cap mass bound    = %.6g   (symmetric alpha = %.6g)\n", cap_mass, alpha_sym);
    std::printf("covered fraction  = %.6g   (omega %.3g, ball %.6g)\n", covered, cfg.omega, ball);
    if (cfg.equilateral > 0) {
        const auto range = cosac::equilateral_aperture_range(k);
        std::printf("equilateral closed-form range: (%.6g, %.6g)\n", range.first, range.second);
        const bool remark_ok = cfg.omega > 0.3 && cfg.omega < 1.0 && k <= 2000;
        std::printf("median-R scan admissibility (omega in (0.3, 1), K <= 2000): %s\n",
                    remark_ok ? "yes" : "no");
    }

    if (!cfg.out_dir.empty()) {
        ensure_dir(cfg.out_dir);
        const fs::path dir(cfg.out_dir);
        json report = {{"format_version", cosac::kFormatVersion},
                       {"k", k},
                       {"omega1", bounds.omega1},
                       {"omega2", bounds.omega2},
                       {"omega2_proof", bounds.omega2_proof},
                       {"angular_min", bounds.angular_min},
                       {"omega3", bounds.omega3},
                       {"ball_radius", ball},
                       {"omega", cfg.omega},
                       {"c_lambda", bounds.c_lambda},
                       {"cap_mass_bound", cap_mass},
                       {"covered_fraction", covered}};
        write_file_checked((dir / "bounds.json").string(), report.dump(2) + "\n");
        write_manifest((dir / "manifest.json").string(), "bounds", json(cfg),
                       cfg.truth.empty() ? json::object() : json{{"truth", cfg.truth}},
                       json{{"report", (dir / "bounds.json").string()}}, cfg.seed, {});
    }
    return 0;
}

// -------------------------------------------------------------------- eval

struct EvalConfig {
    std::string estimate;
    std::string truth;
    std::string heldout;
    double smoothing = 1e-9;
    std::string out_dir = ".";
};

void to_json(json& j, const EvalConfig& c) {
    j = json{{"estimate", c.estimate},
             {"truth", c.truth},
             {"heldout", c.heldout},
             {"smoothing", c.smoothing},
             {"out_dir", c.out_dir}};
}
void from_json(const json& j, EvalConfig& c) {
    j.at("estimate").get_to(c.estimate);
    j.at("truth").get_to(c.truth);
    j.at("heldout").get_to(c.heldout);
    j.at("smoothing").get_to(c.smoothing);
    j.at("out_dir").get_to(c.out_dir);
}

int run_eval(const EvalConfig& cfg) {
    if (cfg.estimate.empty()) throw std::invalid_argument("eval: --estimate is required");
    if (cfg.truth.empty() && cfg.heldout.empty())
        throw std::invalid_argument("eval: need --truth and/or --heldout");
    const auto est = cosac::topic_estimate_from_json(load_json_file(cfg.estimate));
    if (est.k_hat == 0) throw NoTopicsError("eval: estimate contains no topics");

    json records = json::array();
    std::string csv = "metric,value\n";
    if (!cfg.truth.empty()) {
        const json gt = load_json_file(cfg.truth);
        const auto beta = gt.at("beta").get<std::vector<cosac::DenseVector>>();
        const auto match = cosac::min_matching_distance(est.topics, beta);
        std::printf("K_hat = %zu, K_true = %zu, unmatched = %zu\n", est.topics.size(),
                    beta.size(), match.unmatched);
        std::printf("min-matching distance (mean) = %.6g, max = %.6g\n", match.distance,
                    match.max_distance);
        auto add = [&](const std::string& name, double value) {
            records.push_back({{"metric", name},
                               {"value", value},
                               {"config", json{{"estimate", cfg.estimate}, {"truth", cfg.truth}}},
                               {"seed", 0}});
            csv += name + "," + cosac::detail::format_double(value) + "\n";
        };
        add("min_matching_distance_mean", match.distance);
        add("min_matching_distance_max", match.max_distance);
        add("k_hat", static_cast<double>(est.topics.size()));
        add("k_true", static_cast<double>(beta.size()));
        add("unmatched", static_cast<double>(match.unmatched));
    }
    if (!cfg.heldout.empty()) {
        std::ifstream in(cfg.heldout, std::ios::binary);
        if (!in) throw IoError("cannot open " + cfg.heldout);
        const auto held = cosac::load_uci_bow(in);
        const double perp = cosac::perplexity(held, est.topics, cfg.smoothing);
        std::printf("held-out perplexity = %.6g (smoothing %.3g)\n", perp, cfg.smoothing);
        records.push_back({{"metric", "perplexity"},
                           {"value", perp},
                           {"config", json{{"estimate", cfg.estimate},
                                           {"heldout", cfg.heldout},
                                           {"smoothing", cfg.smoothing}}},
                           {"seed", 0}});
        csv += "perplexity," + cosac::detail::format_double(perp) + "\n";
    }

    ensure_dir(cfg.out_dir);
    const fs::path dir(cfg.out_dir);
    write_file_checked((dir / "eval.json").string(), records.dump(2) + "\n");
    write_file_checked((dir / "eval.csv").string(), csv);
    write_manifest((dir / "manifest.json").string(), "eval", json(cfg),
                   json{{"estimate", cfg.estimate}, {"truth", cfg.truth},
                        {"heldout", cfg.heldout}},
                   json{{"eval_json", (dir / "eval.json").string()},
                        {"eval_csv", (dir / "eval.csv").string()}},
                   0, {});
    return 0;
}

// ------------------------------------------------------------------ replay

int run_replay(const std::string& manifest_path, const std::string& out_override) {
    const json manifest = load_json_file(manifest_path);
    const std::string sub = manifest.at("subcommand").get<std::string>();
    const json& config = manifest.at("config");
    if (sub == "generate") {
        GenerateConfig cfg = config.get<GenerateConfig>();
        if (!out_override.empty()) cfg.out_dir = out_override;
        return run_generate(cfg);
    }
    if (sub == "fit") {
        FitConfig cfg = config.get<FitConfig>();
        if (!out_override.empty()) cfg.out = out_override;
        return run_fit(cfg);
    }
    if (sub == "bounds") {
        BoundsConfig cfg = config.get<BoundsConfig>();
        if (!out_override.empty()) cfg.out_dir = out_override;
        return run_bounds(cfg);
    }
    if (sub == "eval") {
        EvalConfig cfg = config.get<EvalConfig>();
        if (!out_override.empty()) cfg.out_dir = out_override;
        return run_eval(cfg);
    }
    throw std::invalid_argument("replay: unknown subcommand in manifest: " + sub);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conic scan topic-geometry toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Config file (keys mirror flag names; flags win)");
    std::size_t threads = 0;
    app.add_option("--threads", threads, "Worker cap (0 = auto; env COSAC_THREADS)");

    GenerateConfig gen;
    auto* cmd_gen = app.add_subcommand("generate", "Sample a synthetic corpus with ground truth");
    cmd_gen->add_option("--topics", gen.topics, "Number of topics K")->required();
    cmd_gen->add_option("--vocab", gen.vocab, "Vocabulary size V")->required();
    cmd_gen->add_option("--docs", gen.docs, "Number of documents M")->required();
    cmd_gen->add_option("--doc-length", gen.doc_length, "Words per document N");
    cmd_gen->add_option("--alpha", gen.alpha, "Symmetric Dirichlet over topic proportions");
    cmd_gen->add_option("--eta", gen.eta, "Symmetric Dirichlet over topics");
    cmd_gen->add_option("--seed", gen.seed, "RNG seed");
    cmd_gen->add_option("--out-dir", gen.out_dir, "Output directory");
    cmd_gen->add_option("--plant-anchors", gen.plant_anchors,
                        "Give each topic an exclusive anchor word with this mass");

    FitConfig fit;
    auto* cmd_fit = app.add_subcommand("fit", "Estimate topics from a UCI bag-of-words file");
    cmd_fit->add_option("--input", fit.input, "UCI bag-of-words file")->required();
    cmd_fit->add_option("--mode", fit.mode, "documents | points | anchors");
    cmd_fit->add_option("--omega", fit.omega, "Cone aperture (default 0.6; 0.4 in anchors mode)");
    cmd_fit->add_option("--norm-quantile", fit.norm_quantile, "Norm threshold quantile");
    cmd_fit->add_option("--lambda", fit.lambda,
                        "Outlier fraction (default 0.001; 0.015 in anchors mode)");
    cmd_fit->add_option("--kmeans-iters", fit.kmeans_iters, "Spherical k-means iterations");
    cmd_fit->add_option("--mean-shift-tol", fit.mean_shift_tol, "Mean-shift stop tolerance");
    cmd_fit->add_option("--mean-shift-iters", fit.mean_shift_iters, "Mean-shift iteration cap");
    cmd_fit->add_option("--out", fit.out, "Output prefix");
    cmd_fit->add_option("--vocab-file", fit.vocab_file, "Token list for anchor reporting");

    BoundsConfig bounds;
    auto* cmd_bounds = app.add_subcommand("bounds", "Coverage bounds for a topic geometry");
    cmd_bounds->add_option("--truth", bounds.truth, "Ground-truth JSON with beta");
    cmd_bounds->add_option("--equilateral", bounds.equilateral, "Use a regular simplex with K vertices");
    cmd_bounds->add_option("--ball-quantile", bounds.ball_quantile, "Ball radius quantile");
    cmd_bounds->add_option("--omega", bounds.omega, "Aperture for c_lambda and coverage");
    cmd_bounds->add_option("--mc-samples", bounds.mc_samples, "Monte-Carlo sample count");
    cmd_bounds->add_option("--alpha", bounds.alpha, "Symmetric Dirichlet (default 1/K)");
    cmd_bounds->add_option("--seed", bounds.seed, "RNG seed");
    cmd_bounds->add_option("--out-dir", bounds.out_dir, "Optional report directory");

    EvalConfig eval;
    auto* cmd_eval = app.add_subcommand("eval", "Score an estimate against ground truth");
    cmd_eval->add_option("--estimate", eval.estimate, "Topic estimate JSON")->required();
    cmd_eval->add_option("--truth", eval.truth, "Ground-truth JSON");
    cmd_eval->add_option("--heldout", eval.heldout, "Held-out UCI bag-of-words file");
    cmd_eval->add_option("--smoothing", eval.smoothing, "Perplexity smoothing");
    cmd_eval->add_option("--out-dir", eval.out_dir, "Report directory");

    std::string manifest_path, replay_out;
    auto* cmd_replay = app.add_subcommand("replay", "Re-run a recorded manifest");
    cmd_replay->add_option("manifest", manifest_path, "Manifest JSON")->required();
    cmd_replay->add_option("--out", replay_out, "Override the output directory/prefix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 3;
    }
    if (threads > 0) {
        // library helpers read COSAC_THREADS; propagate the flag
        setenv("COSAC_THREADS", std::to_string(threads).c_str(), 1);
    }

    try {
        if (cmd_gen->parsed()) return run_generate(gen);
        if (cmd_fit->parsed()) return run_fit(fit);
        if (cmd_bounds->parsed()) return run_bounds(bounds);
        if (cmd_eval->parsed()) return run_eval(eval);
        if (cmd_replay->parsed()) return run_replay(manifest_path, replay_out);
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const NoTopicsError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 4;
    } catch (const cosac::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
