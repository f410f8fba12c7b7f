#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "agelab/error.hpp"

namespace agelab {

// Whole-token integer parse; trailing junk is as much an error as no digits.
inline int parse_strict_int(const std::string& s) {
    std::size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(s, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (pos != s.size()) throw ConfigError("not an integer: '" + s + "'");
    return v;
}

inline double parse_strict_double(const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (pos != s.size()) throw ConfigError("not a number: '" + s + "'");
    return v;
}

inline std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

} // namespace agelab
