#pragma once

#include <Eigen/Core>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>

#include "sbc/errors.hpp"
#include "sbc/gramian.hpp"

namespace sbc {

// Shortest decimal representation that round-trips to the same double;
// keeps CSV/matrix output byte-deterministic at full precision.
inline std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc())
        throw NumericalError("failed to format floating-point value");
    return std::string(buf, ptr);
}

// write-temp-then-rename so readers never observe partial files
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open output file " + tmp.string());
        out << content;
        if (!out) throw ConfigError("failed writing " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline std::string format_matrix(const Eigen::MatrixXd& M) {
    std::ostringstream os;
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j) os << ' ';
            os << format_double(M(i, j));
        }
        os << '\n';
    }
    return os.str();
}

// Plain-text Gramian dump: header line then the matrix, row-major.
inline std::string format_gramian(const Eigen::MatrixXd& M, int N, const GramianSpec& spec) {
    std::ostringstream os;
    os << "gramian N=" << N << " omega=" << format_double(spec.omega)
       << " S=" << format_double(spec.S) << " kind=" << to_string(spec.kind) << '\n';
    os << format_matrix(M);
    return os.str();
}

}  // namespace sbc
