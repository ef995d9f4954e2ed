// manifest.hpp — run manifests and config files as flat key = value documents,
// with FNV-1a content digests for output verification
//
// Document format: one `key = value` per line, `#` starts a comment. List
// entries use indexed keys (output.0.path, output.0.digest, ...). Config
// files for the train subcommand use the same format.

#pragma once

#include "qsn/csv.hpp"
#include "qsn/version.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsn::manifest {

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

inline std::string digest_string(const std::string& bytes) {
    std::ostringstream out;
    out << "fnv1a64:" << std::hex << fnv1a64(bytes);
    return out.str();
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::string digest_file(const std::filesystem::path& path) {
    return digest_string(read_file(path));
}

using Document = std::map<std::string, std::string>;

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

inline Document parse_document(const std::string& text) {
    Document doc;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("manifest: missing '=' on line " + std::to_string(lineno));
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("manifest: empty key on line " + std::to_string(lineno));
        doc[key] = value;
    }
    return doc;
}

inline Document load_document(const std::filesystem::path& path) {
    return parse_document(read_file(path));
}

inline std::string serialize_document(const Document& doc) {
    std::string out;
    for (const auto& [key, value] : doc) {
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    }
    return out;
}

struct OutputRecord {
    std::string path;     // relative to the manifest's directory
    std::string digest;
    std::uintmax_t bytes{0};
};

struct RunManifest {
    std::string subcommand;
    Document params;
    double duration_seconds{0.0};
    std::vector<OutputRecord> outputs;

    Document to_document() const {
        Document doc;
        doc["manifest_version"] = "1";
        doc["tool"] = std::string("qsn ") + qsn::version;
        doc["subcommand"] = subcommand;
        doc["duration_seconds"] = csv::format_double(duration_seconds);
        for (const auto& [key, value] : params) doc["param." + key] = value;
        for (std::size_t i = 0; i < outputs.size(); ++i) {
            const std::string prefix = "output." + std::to_string(i) + ".";
            doc[prefix + "path"] = outputs[i].path;
            doc[prefix + "digest"] = outputs[i].digest;
            doc[prefix + "bytes"] = std::to_string(outputs[i].bytes);
        }
        return doc;
    }
};

inline void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
    csv::write_file_atomic(path, serialize_document(manifest.to_document()));
}

struct VerifyEntry {
    std::string path;
    bool ok{false};
    std::string expected;
    std::string actual;
};

// Recompute digests of the files a manifest lists; paths resolve relative to
// the manifest's own directory.
inline std::vector<VerifyEntry> verify_manifest(const std::filesystem::path& manifest_path) {
    const Document doc = load_document(manifest_path);
    const std::filesystem::path base = manifest_path.parent_path();
    std::vector<VerifyEntry> entries;
    for (std::size_t i = 0;; ++i) {
        const std::string prefix = "output." + std::to_string(i) + ".";
        const auto path_it = doc.find(prefix + "path");
        if (path_it == doc.end()) break;
        const auto digest_it = doc.find(prefix + "digest");
        if (digest_it == doc.end()) throw std::invalid_argument("manifest: missing digest for " + path_it->second);
        VerifyEntry entry;
        entry.path = path_it->second;
        entry.expected = digest_it->second;
        try {
            entry.actual = digest_file(base / entry.path);
            entry.ok = entry.actual == entry.expected;
        } catch (const std::exception&) {
            entry.actual = "<unreadable>";
            entry.ok = false;
        }
        entries.push_back(std::move(entry));
    }
    if (entries.empty()) throw std::invalid_argument("manifest lists no outputs: " + manifest_path.string());
    return entries;
}

} // namespace qsn::manifest
