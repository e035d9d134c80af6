// JSON and CSV serialization for topic estimates, ground truth and scan
// diagnostics.
#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cosac/common.hpp"
#include "cosac/scan.hpp"
#include "cosac/synth.hpp"

namespace cosac {

inline constexpr const char* kFormatVersion = "1";

inline nlohmann::json topic_estimate_to_json(const TopicEstimate& est) {
    nlohmann::json j;
    j["format_version"] = kFormatVersion;
    j["k_hat"] = est.k_hat;
    j["omega"] = est.omega;
    j["norm_threshold"] = est.norm_threshold;
    j["lambda"] = est.outlier_fraction;
    j["topics"] = est.topics;
    j["radii"] = est.radii;
    j["cone_cardinalities"] = est.cone_cardinalities;
    j["rejected_cones"] = est.rejected_cones;
    return j;
}

inline TopicEstimate topic_estimate_from_json(const nlohmann::json& j) {
    TopicEstimate est;
    est.k_hat = j.at("k_hat").get<std::size_t>();
    est.omega = j.at("omega").get<double>();
    est.norm_threshold = j.at("norm_threshold").get<double>();
    est.outlier_fraction = j.at("lambda").get<double>();
    est.topics = j.at("topics").get<std::vector<DenseVector>>();
    est.radii = j.at("radii").get<std::vector<double>>();
    est.cone_cardinalities = j.at("cone_cardinalities").get<std::vector<std::size_t>>();
    if (j.contains("rejected_cones")) est.rejected_cones = j.at("rejected_cones").get<std::size_t>();
    return est;
}

inline nlohmann::json ground_truth_to_json(const GroundTruth& truth) {
    nlohmann::json j;
    j["format_version"] = kFormatVersion;
    j["beta"] = truth.topics;
    j["theta"] = truth.proportions;
    return j;
}

inline GroundTruth ground_truth_from_json(const nlohmann::json& j) {
    GroundTruth truth;
    truth.topics = j.at("beta").get<std::vector<DenseVector>>();
    truth.proportions = j.at("theta").get<std::vector<DenseVector>>();
    for (std::size_t m = 0; m < truth.proportions.size(); ++m) {
        DenseVector p(truth.topics.empty() ? 0 : truth.topics.front().size(), 0.0);
        for (std::size_t k = 0; k < truth.topics.size(); ++k) {
            const double t = truth.proportions[m][k];
            for (std::size_t c = 0; c < p.size(); ++c) p[c] += t * truth.topics[k][c];
        }
        truth.doc_distributions.push_back(std::move(p));
    }
    return truth;
}

namespace detail {

inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace detail

/// Dense CSV: one row per topic, V columns.
inline std::string topics_to_csv(const TopicEstimate& est) {
    std::string out;
    for (const auto& topic : est.topics) {
        for (std::size_t c = 0; c < topic.size(); ++c) {
            if (c) out += ',';
            out += detail::format_double(topic[c]);
        }
        out += '\n';
    }
    return out;
}

/// Per-iteration scan diagnostics.
inline std::string scan_trace_to_csv(const ScanTrace& trace) {
    std::string out = "iteration,seed_doc,max_norm,cone_size,kept\n";
    for (const auto& it : trace.iterations) {
        out += std::to_string(it.iteration) + ',' + std::to_string(it.seed_doc) + ',' +
               detail::format_double(it.max_norm) + ',' + std::to_string(it.cone_size) + ',' +
               (it.kept ? "1" : "0") + '\n';
    }
    return out;
}

/// Per-document records (norm, nearest direction, cosine distance, cone
/// membership) from which the norm-vs-angle scatter plots are reproducible.
inline std::string document_records_to_csv(const CenteredCorpus& corpus,
                                           const TopicEstimate& est) {
    std::string out = "doc,norm,nearest_direction,cosine_distance,in_cone\n";
    for (std::size_t m = 0; m < corpus.n_docs; ++m) {
        std::ptrdiff_t nearest = -1;
        double best = 2.0;
        if (corpus.norms[m] > 0.0) {
            for (std::size_t k = 0; k < est.k_hat; ++k) {
                const double c =
                    dot(est.directions[k], corpus.row(m)) / corpus.norms[m];
                const double d = 1.0 - std::clamp(c, -1.0, 1.0);
                if (d < best) {
                    best = d;
                    nearest = static_cast<std::ptrdiff_t>(k);
                }
            }
        }
        const bool in_cone = nearest >= 0 && best < est.omega;
        out += std::to_string(m) + ',' + detail::format_double(corpus.norms[m]) + ',' +
               std::to_string(nearest) + ',' +
               (nearest >= 0 ? detail::format_double(best) : std::string("nan")) + ',' +
               (in_cone ? "1" : "0") + '\n';
    }
    return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace cosac
