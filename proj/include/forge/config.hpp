#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "forge/errors.hpp"
#include "forge/hash.hpp"
#include "forge/text.hpp"

namespace forge {

// Every knob the pipeline exposes, with the defaults the datasets are built
// under. The canonical serialization below is hashed into every output
// artifact so mismatched artifacts can be refused.
struct PipelineConfig {
    double rho = 0.5;               // P_ST keep / mark-assignment threshold
    int max_passage_tokens = 256;
    int negative_rank_low = 30;     // 1-based, inclusive
    int negative_rank_high = 50;    // 1-based, inclusive
    int num_negatives = 4;
    int max_refs = 5;
    double mu = 0.0;                // absolute signature threshold; 0 = derive
    double mu_fraction = 0.25;      // fraction of max pooled weight when mu == 0
    double upper = 0.9;
    double lower = 0.1;
    double bm25_k1 = 0.9;
    double bm25_b = 0.4;
    double lambda_q = 5e-4;
    double lambda_d = 5e-3;
    uint64_t seed = 42;
    std::string stopword_version = "v1";

    void validate() const {
        auto fail = [](const std::string& msg) {
            throw Error(ErrorCode::SchemaError, "config: " + msg);
        };
        if (rho <= 0.0) fail("rho must be > 0");
        if (max_passage_tokens <= 0) fail("max_passage_tokens must be > 0");
        if (negative_rank_low < 1 || negative_rank_high < negative_rank_low) {
            fail("negatives range must satisfy 1 <= low <= high");
        }
        if (num_negatives < 1) fail("num_negatives must be >= 1");
        if (max_refs < 0) fail("max_refs must be >= 0");
        if (mu < 0.0) fail("mu must be >= 0");
        if (mu_fraction <= 0.0 || mu_fraction >= 1.0) fail("mu_fraction must be in (0, 1)");
        if (!(0.0 <= lower && lower < upper && upper <= 1.0)) {
            fail("filter thresholds must satisfy 0 <= lower < upper <= 1");
        }
        if (bm25_k1 < 0.0) fail("bm25_k1 must be >= 0");
        if (bm25_b < 0.0 || bm25_b > 1.0) fail("bm25_b must be in [0, 1]");
        if (stopword_version.empty()) fail("stopword_version must be set");
    }
};

namespace detail {

inline std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace detail

inline std::vector<std::pair<std::string, std::string>> config_items(const PipelineConfig& c) {
    return {
        {"bm25_b", detail::fmt_double(c.bm25_b)},
        {"bm25_k1", detail::fmt_double(c.bm25_k1)},
        {"lambda_d", detail::fmt_double(c.lambda_d)},
        {"lambda_q", detail::fmt_double(c.lambda_q)},
        {"lower", detail::fmt_double(c.lower)},
        {"max_passage_tokens", std::to_string(c.max_passage_tokens)},
        {"max_refs", std::to_string(c.max_refs)},
        {"mu", detail::fmt_double(c.mu)},
        {"mu_fraction", detail::fmt_double(c.mu_fraction)},
        {"negative_rank_high", std::to_string(c.negative_rank_high)},
        {"negative_rank_low", std::to_string(c.negative_rank_low)},
        {"num_negatives", std::to_string(c.num_negatives)},
        {"rho", detail::fmt_double(c.rho)},
        {"seed", std::to_string(c.seed)},
        {"stopword_version", c.stopword_version},
        {"upper", detail::fmt_double(c.upper)},
    };
}

inline std::string serialize_config(const PipelineConfig& c) {
    std::string out;
    for (const auto& [k, v] : config_items(c)) {
        out += k;
        out.push_back('=');
        out += v;
        out.push_back('\n');
    }
    return out;
}

inline std::string config_hash(const PipelineConfig& c) {
    return to_hex(fnv1a64(serialize_config(c)));
}

inline void set_config_key(PipelineConfig& c, const std::string& key, const std::string& value) {
    auto as_double = [&] {
        try {
            size_t used = 0;
            double v = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
            return v;
        } catch (const std::exception&) {
            throw Error(ErrorCode::SchemaError, "config value for " + key + " is not a number");
        }
    };
    auto as_int = [&] {
        try {
            size_t used = 0;
            long v = std::stol(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
            return static_cast<int>(v);
        } catch (const std::exception&) {
            throw Error(ErrorCode::SchemaError, "config value for " + key + " is not an integer");
        }
    };

    if (key == "rho") c.rho = as_double();
    else if (key == "max_passage_tokens") c.max_passage_tokens = as_int();
    else if (key == "negative_rank_low") c.negative_rank_low = as_int();
    else if (key == "negative_rank_high") c.negative_rank_high = as_int();
    else if (key == "num_negatives") c.num_negatives = as_int();
    else if (key == "max_refs") c.max_refs = as_int();
    else if (key == "mu") c.mu = as_double();
    else if (key == "mu_fraction") c.mu_fraction = as_double();
    else if (key == "upper") c.upper = as_double();
    else if (key == "lower") c.lower = as_double();
    else if (key == "bm25_k1") c.bm25_k1 = as_double();
    else if (key == "bm25_b") c.bm25_b = as_double();
    else if (key == "lambda_q") c.lambda_q = as_double();
    else if (key == "lambda_d") c.lambda_d = as_double();
    else if (key == "seed") c.seed = static_cast<uint64_t>(std::stoull(value));
    else if (key == "stopword_version") c.stopword_version = value;
    else throw Error(ErrorCode::SchemaError, "unknown config key '" + key + "'");
}

// Flat key=value file; '#' starts a comment, blank lines are ignored.
inline void load_config_file(PipelineConfig& c, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config file " + path);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::string trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        size_t eq = trimmed.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::SchemaError,
                        path + ":" + std::to_string(line_no) + ": expected key=value");
        }
        set_config_key(c, detail::trim(trimmed.substr(0, eq)),
                       detail::trim(trimmed.substr(eq + 1)));
    }
}

// "--set key=value" override.
inline void apply_config_override(PipelineConfig& c, const std::string& assignment) {
    size_t eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw Error(ErrorCode::SchemaError, "--set expects key=value, got '" + assignment + "'");
    }
    set_config_key(c, detail::trim(assignment.substr(0, eq)),
                   detail::trim(assignment.substr(eq + 1)));
}

}  // namespace forge
