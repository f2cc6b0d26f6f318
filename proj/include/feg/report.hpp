#pragma once
// Deterministic CSV / SVG emission and output manifests.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace feg::report {

// Six significant digits, "NA" for undefined values.
std::string format_number(double value);
std::string format_number(std::optional<double> value);
std::string format_count(std::uint64_t value);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    std::string to_string() const;
};

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;  // NaN entries break the line and are skipped
};

struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
};

std::string render_svg(const LineChart& chart);

std::string sha256_hex(std::string_view bytes);

// Writes files below a root directory and remembers what was written.
class OutputSink {
public:
    explicit OutputSink(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }
    void write(const std::string& relative, std::string_view content);

    struct Entry {
        std::string path;
        std::string sha256;
        std::size_t bytes = 0;
    };
    const std::vector<Entry>& entries() const { return entries_; }

    // manifest.json listing every written file (sorted by path).
    void write_manifest();

private:
    std::filesystem::path root_;
    std::vector<Entry> entries_;
};

}  // namespace feg::report
