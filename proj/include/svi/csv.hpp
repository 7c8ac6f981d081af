// Minimal deterministic CSV writing (fixed %.17g formatting, no timestamps,
// so reruns are byte-identical).
#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace svi {

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    }

    void row(const std::string& line) { out_ << line << '\n'; }

    template <class... Ts>
    void cells(const Ts&... vals)
    {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(vals), first = false), ...);
        out_ << '\n';
    }

    static std::string cell(double v)
    {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(long v) { return std::to_string(v); }
    static std::string cell(unsigned long v) { return std::to_string(v); }
    static std::string cell(unsigned long long v) { return std::to_string(v); }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }

private:
    std::ofstream out_;
};

} // namespace svi
