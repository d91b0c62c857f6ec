#pragma once

// Output plumbing for the epw tool: 17-digit CSV, sorted-key JSON, SHA-256 manifests
// and the flat key=value config file.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"

namespace epwcli {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

/// One CSV cell; numbers go through fmt, strings are quoted when needed.
struct Cell {
    std::string text;
    Cell(double x) : text(fmt(x)) {}
    Cell(int x) : text(std::to_string(x)) {}
    Cell(long x) : text(std::to_string(x)) {}
    Cell(std::size_t x) : text(std::to_string(x)) {}
    Cell(bool b) : text(b ? "true" : "false") {}
    Cell(const char* s) : text(csv_field(s)) {}
    Cell(const std::string& s) : text(csv_field(s)) {}
};

using Row = std::vector<Cell>;

inline void write_csv(std::ostream& os, const std::vector<std::string>& header, const std::vector<Row>& rows) {
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << csv_field(header[i]);
    os << "\r\n";
    for (const Row& r : rows) {
        if (r.size() != header.size()) throw IoError("write_csv: row width does not match the header");
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i].text;
        os << "\r\n";
    }
}

/// Reads a header + numeric rows CSV written by write_csv.
inline std::map<std::string, std::vector<double>> read_csv_columns(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    auto split = [](std::string s) {
        if (!s.empty() && s.back() == '\r') s.pop_back();
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(item);
        return out;
    };
    if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
    const auto header = split(line);
    std::map<std::string, std::vector<double>> cols;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto f = split(line);
        if (f.size() != header.size()) throw IoError(path.string() + ":" + std::to_string(lineno) + ": wrong field count");
        for (std::size_t i = 0; i < f.size(); ++i) {
            // strtod rather than stod: stod rejects subnormals that %.17g writes
            char* end = nullptr;
            const double x = std::strtod(f[i].c_str(), &end);
            if (f[i].empty() || end != f[i].c_str() + f[i].size())
                throw IoError(path.string() + ":" + std::to_string(lineno) + ": not a number: " + f[i]);
            cols[header[i]].push_back(x);
        }
    }
    return cols;
}

inline std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for hashing");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

/// Collects the files a command writes into one directory and finishes with manifest.json.
class OutputDir {
public:
    OutputDir(fs::path dir, std::string command_line, std::string config)
        : dir_(std::move(dir)), cmd_(std::move(command_line)), config_(std::move(config)),
          start_(std::chrono::steady_clock::now()) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create " + dir_.string() + ": " + ec.message());
    }

    [[nodiscard]] const fs::path& path() const { return dir_; }

    void csv(const std::string& name, const std::vector<std::string>& header, const std::vector<Row>& rows) {
        std::ostringstream os;
        write_csv(os, header, rows);
        text(name, os.str());
    }

    void json_file(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }

    void text(const std::string& name, const std::string& content) {
        const fs::path p = dir_ / name;
        std::ofstream out(p, std::ios::binary);
        if (!out) throw IoError("cannot write " + p.string());
        out << content;
        if (!out) throw IoError("write failed for " + p.string());
        files_.push_back(name);
    }

    void finish() {
        json m;
        m["command_line"] = cmd_;
        m["config"] = config_;
        m["tool_version"] = kToolVersion;
        m["wall_time_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        json digests = json::object();
        for (const auto& f : files_) digests[f] = sha256_file(dir_ / f);
        m["digests"] = digests;
        const fs::path p = dir_ / "manifest.json";
        std::ofstream out(p, std::ios::binary);
        if (!out) throw IoError("cannot write " + p.string());
        out << m.dump(2) << "\n";
    }

private:
    fs::path dir_;
    std::string cmd_, config_;
    std::chrono::steady_clock::time_point start_;
    std::vector<std::string> files_;
};

/// Flat key=value config. Blank lines and lines starting with # or ; are ignored.
inline std::vector<std::pair<std::string, std::string>> read_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    long lineno = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return std::string();
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.rfind("--", 0) == 0) key = key.substr(2);
        if (key.empty()) throw IoError(path.string() + ":" + std::to_string(lineno) + ": empty key");
        out.emplace_back(key, val);
    }
    return out;
}

}  // namespace epwcli
