#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

inline std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline std::string fixture(const std::string& name) {
    return read_file(std::string(NCU_FIXTURE_DIR) + "/" + name);
}

/// Runs f expecting it to throw E; returns the machine-readable error code,
/// or "" when nothing was thrown.
template <typename E, typename F>
std::string error_code(F&& f) {
    try {
        f();
    } catch (const E& e) {
        return e.code();
    }
    return "";
}
