// CSV emission: '.' decimal separator, mandatory header row, newline
// terminated.  Doubles are printed with 17 significant digits so a re-parse
// reproduces the exact value.  Files are written to a temporary name and
// renamed into place so a failed run leaves no partial output.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

namespace erasefl::io {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

/// Row-oriented CSV builder; commit() performs the atomic write.
class CsvBuilder {
public:
    explicit CsvBuilder(std::string header) { buffer_ = std::move(header) + "\n"; }

    CsvBuilder& field(const std::string& v) {
        if (!row_.empty()) row_ += ',';
        row_ += v;
        return *this;
    }
    CsvBuilder& field(double v) { return field(format_double(v)); }
    CsvBuilder& field(unsigned long long v) { return field(std::to_string(v)); }
    CsvBuilder& field(unsigned long v) { return field(std::to_string(v)); }
    CsvBuilder& field(int v) { return field(std::to_string(v)); }

    void end_row() {
        buffer_ += row_ + "\n";
        row_.clear();
    }

    const std::string& content() const { return buffer_; }

    void commit(const std::filesystem::path& path) const { atomic_write_file(path, buffer_); }

private:
    std::string buffer_;
    std::string row_;
};

}  // namespace erasefl::io
