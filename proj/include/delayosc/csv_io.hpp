#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "delayosc/errors.hpp"
#include "delayosc/types.hpp"

namespace delayosc {

/// Shortest 17-significant-digit decimal rendering; losslessly round-trips
/// binary64, which the golden-file tests rely on.
[[nodiscard]] inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Write content to path via a temp file in the same directory plus rename.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open " + tmp.string() + " for writing");
        }
        out << content;
        if (!out) {
            throw IoError("write failure on " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        throw IoError("cannot rename " + tmp.string() + " to " + path + ": " + ec.message());
    }
}

/// Row sink that renders every number with format_g17.
class CsvBuilder {
public:
    void header(const std::vector<std::string>& names) {
        append_row(names);
    }

    void row(const std::vector<std::string>& cells) { append_row(cells); }

    [[nodiscard]] static std::string cell(double v) { return format_g17(v); }

    [[nodiscard]] const std::string& str() const { return out_; }

private:
    void append_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) {
                out_ += ',';
            }
            out_ += cells[i];
        }
        out_ += '\n';
    }

    std::string out_;
};

}  // namespace delayosc
