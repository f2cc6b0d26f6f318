#include "feg/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <openssl/evp.h>

#include "json.hpp"

#include "feg/error.hpp"

namespace feg::report {

std::string format_number(double value) {
    if (std::isnan(value)) return "NA";
    if (value == 0.0) return "0";  // folds -0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", value);
    return buf;
}

std::string format_number(std::optional<double> value) { return value ? format_number(*value) : "NA"; }

std::string format_count(std::uint64_t value) { return std::to_string(value); }

void CsvTable::add_row(std::vector<std::string> row) {
    if (row.size() != header.size()) throw InvariantError("csv row width does not match header");
    rows.push_back(std::move(row));
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

const char* kPalette[] = {"#d62728", "#ff7f0e", "#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

}  // namespace

std::string CsvTable::to_string() const {
    std::string out;
    auto emit = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += csv_field(row[i]);
        }
        out += '\n';
    };
    emit(header);
    for (const auto& r : rows) emit(r);
    return out;
}

std::string render_svg(const LineChart& chart) {
    constexpr double width = 640, height = 400;
    constexpr double left = 70, right = 150, top = 40, bottom = 50;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : chart.series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (std::isnan(s.y[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (xmax == xmin) xmin -= 0.5, xmax += 0.5;
    if (ymax == ymin) ymin -= 0.5, ymax += 0.5;
    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * plot_w; };
    auto py = [&](double y) { return top + (1.0 - (y - ymin) / (ymax - ymin)) * plot_h; };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
    out += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
    out += "<text x=\"" + fixed2(width / 2 - right / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" +
           xml_escape(chart.title) + "</text>\n";
    out += "<line x1=\"" + fixed2(left) + "\" y1=\"" + fixed2(top + plot_h) + "\" x2=\"" + fixed2(left + plot_w) +
           "\" y2=\"" + fixed2(top + plot_h) + "\" stroke=\"black\"/>\n";
    out += "<line x1=\"" + fixed2(left) + "\" y1=\"" + fixed2(top) + "\" x2=\"" + fixed2(left) + "\" y2=\"" +
           fixed2(top + plot_h) + "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double xv = xmin + (xmax - xmin) * t / 4.0;
        const double yv = ymin + (ymax - ymin) * t / 4.0;
        out += "<text x=\"" + fixed2(px(xv)) + "\" y=\"" + fixed2(top + plot_h + 16) +
               "\" text-anchor=\"middle\" font-size=\"11\">" + format_number(xv) + "</text>\n";
        out += "<text x=\"" + fixed2(left - 6) + "\" y=\"" + fixed2(py(yv) + 4) +
               "\" text-anchor=\"end\" font-size=\"11\">" + format_number(yv) + "</text>\n";
    }
    out += "<text x=\"" + fixed2(left + plot_w / 2) + "\" y=\"" + fixed2(height - 10) +
           "\" text-anchor=\"middle\" font-size=\"13\">" + xml_escape(chart.x_label) + "</text>\n";
    out += "<text x=\"16\" y=\"" + fixed2(top + plot_h / 2) + "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 " +
           fixed2(top + plot_h / 2) + ")\">" + xml_escape(chart.y_label) + "</text>\n";

    for (std::size_t s = 0; s < chart.series.size(); ++s) {
        const auto& series = chart.series[s];
        const char* color = kPalette[s % (sizeof kPalette / sizeof kPalette[0])];
        std::string points;
        for (std::size_t i = 0; i < series.x.size(); ++i) {
            if (std::isnan(series.y[i])) continue;
            if (!points.empty()) points += ' ';
            points += fixed2(px(series.x[i])) + "," + fixed2(py(series.y[i]));
        }
        out += "<polyline data-series=\"" + xml_escape(series.name) + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
        const double ly = top + 14 + 18 * static_cast<double>(s);
        out += "<line x1=\"" + fixed2(left + plot_w + 12) + "\" y1=\"" + fixed2(ly) + "\" x2=\"" +
               fixed2(left + plot_w + 32) + "\" y2=\"" + fixed2(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + fixed2(left + plot_w + 38) + "\" y=\"" + fixed2(ly + 4) + "\" font-size=\"12\">" +
               xml_escape(series.name) + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw InvariantError("sha256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

OutputSink::OutputSink(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec || !std::filesystem::is_directory(root_))
        throw UsageError("cannot create output directory '" + root_.string() + "'");
}

void OutputSink::write(const std::string& relative, std::string_view content) {
    const auto path = root_ / relative;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write '" + path.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw UsageError("write failed for '" + path.string() + "'");
    Entry e{relative, sha256_hex(content), content.size()};
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& x) { return x.path == relative; });
    if (it != entries_.end())
        *it = std::move(e);
    else
        entries_.push_back(std::move(e));
}

void OutputSink::write_manifest() {
    auto sorted = entries_;
    std::sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) { return a.path < b.path; });
    nlohmann::json files = nlohmann::json::array();
    for (const auto& e : sorted) files.push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
    nlohmann::json manifest = {{"files", files}};
    const std::string text = manifest.dump(2) + "\n";
    const auto path = root_ / "manifest.json";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write '" + path.string() + "'");
    out << text;
}

}  // namespace feg::report
