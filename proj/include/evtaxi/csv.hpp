#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace evtaxi {

// Minimal CSV handling for the plain numeric schemas used here: comma
// separated, header row required, no quoting.

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

class CsvReader {
  public:
    explicit CsvReader(const std::string& path) : in_(path), path_(path) {
        if (!in_) throw std::runtime_error("cannot open " + path);
        std::string header;
        if (!std::getline(in_, header)) throw std::runtime_error(path + ": empty file, header row required");
        auto names = split_csv_line(header);
        for (std::size_t i = 0; i < names.size(); ++i) columns_[names[i]] = i;
    }

    // Throws if a required column is missing from the header.
    std::size_t column(const std::string& name) const {
        auto it = columns_.find(name);
        if (it == columns_.end()) throw std::runtime_error(path_ + ": missing required column '" + name + "'");
        return it->second;
    }

    bool has_column(const std::string& name) const { return columns_.count(name) > 0; }

    bool next(std::vector<std::string>& fields) {
        std::string line;
        while (std::getline(in_, line)) {
            if (line.empty() || line == "\r") continue;
            fields = split_csv_line(line);
            return true;
        }
        return false;
    }

  private:
    std::ifstream in_;
    std::string path_;
    std::unordered_map<std::string, std::size_t> columns_;
};

// Fixed-format float so repeated runs serialize byte-identically.
inline std::string fmt_double(double v, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

inline bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size() && std::isfinite(out);
    } catch (...) {
        return false;
    }
}

inline bool parse_int64(const std::string& s, std::int64_t& out) {
    if (s.empty()) return false;
    try {
        std::size_t pos = 0;
        out = std::stoll(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

}  // namespace evtaxi
