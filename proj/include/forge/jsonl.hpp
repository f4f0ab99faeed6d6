#pragma once

#include <fstream>
#include <functional>
#include <string>

#include "json.hpp"

#include "forge/errors.hpp"
#include "forge/text.hpp"

namespace forge {

using Json = nlohmann::json;

// Streams a JSONL file line by line; fn(record, line_no). Blank lines are
// skipped, anything unparseable is fatal.
inline void read_jsonl(const std::string& path,
                       const std::function<void(const Json&, size_t)>& fn) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        Json j = Json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw Error(ErrorCode::SchemaError,
                        path + ":" + std::to_string(line_no) + ": invalid JSON");
        }
        fn(j, line_no);
    }
}

inline std::string require_string(const Json& j, const char* field, const std::string& where) {
    if (!j.contains(field) || !j.at(field).is_string()) {
        throw Error(ErrorCode::SchemaError,
                    where + ": missing string field '" + std::string(field) + "'");
    }
    return j.at(field).get<std::string>();
}

class JsonlWriter {
public:
    explicit JsonlWriter(const std::string& path) : path_(path), out_(path, std::ios::trunc) {
        if (!out_) throw Error(ErrorCode::IoError, "cannot write " + path);
    }

    void row(const Json& j) {
        out_ << j.dump() << '\n';
        if (!out_) throw Error(ErrorCode::IoError, "short write to " + path_);
    }

    void close() { out_.close(); }

private:
    std::string path_;
    std::ofstream out_;
};

// Every dataset file starts with a header row naming the artifact kind, the
// pipeline config hash, and the stopword list version.
inline Json artifact_header(const std::string& kind, const std::string& config_hash,
                            const std::string& stopword_version) {
    return Json{{"type", "header"},
                {"kind", kind},
                {"config_hash", config_hash},
                {"stopword_version", stopword_version}};
}

inline bool is_header_row(const Json& j) {
    return j.is_object() && j.contains("type") && j.at("type") == "header";
}

// Consumers refuse artifacts hashed under a different config unless forced.
inline void check_header(const Json& header, const std::string& expected_hash,
                         const std::string& where, bool force) {
    if (!is_header_row(header)) {
        throw Error(ErrorCode::SchemaError, where + ": first row is not an artifact header");
    }
    std::string got = header.value("config_hash", "");
    if (!force && got != expected_hash) {
        throw Error(ErrorCode::ConfigMismatch,
                    where + ": artifact config hash " + got + " != current " + expected_hash +
                        " (use --force to override)");
    }
}

}  // namespace forge
