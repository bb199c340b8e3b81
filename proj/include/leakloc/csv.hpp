#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "leakloc/errors.hpp"
#include "leakloc/types.hpp"
#include "leakloc/xcorr.hpp"

namespace leakloc {

namespace detail {

// shortest representation that parses back to the identical double
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_double_17g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc{} && res.ptr == last && std::isfinite(out);
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = line.find(sep, pos);
        if (next == std::string_view::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

} // namespace detail

struct RecordingMetadata {
    std::string sensor_id;
    double pressure_kgfcm2 = 0.0;
    double flow_lpm = 0.0;
    Scenario scenario = Scenario::NoLeak;
    Side side = Side::Left;
};

/// Parse a sensor CSV stream (header `t,ax,ay,az`, one sample per line,
/// t in seconds, axes in g). The sample rate is inferred from the first two
/// timestamps and every later gap is checked against it; a gap off by more
/// than half a period raises NonUniformSampling.
inline SensorRecording parse_recording(std::istream& in, const RecordingMetadata& metadata) {
    std::string line;
    bool saw_header = false;
    std::vector<double> t;
    std::array<std::vector<double>, 3> axes;
    std::size_t line_no = 0;

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = detail::trim(line);
        if (line_no == 1 && sv.substr(0, 3) == "\xEF\xBB\xBF") sv.remove_prefix(3);
        if (sv.empty()) continue;
        if (!saw_header) {
            // tolerate whitespace around the header fields
            const auto cols = detail::split(sv, ',');
            if (cols.size() != 4 || detail::trim(cols[0]) != "t" ||
                detail::trim(cols[1]) != "ax" || detail::trim(cols[2]) != "ay" ||
                detail::trim(cols[3]) != "az")
                throw MalformedRow("line 1: expected header `t,ax,ay,az`");
            saw_header = true;
            continue;
        }
        const auto cols = detail::split(sv, ',');
        if (cols.size() != 4)
            throw MalformedRow("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                               std::to_string(cols.size()));
        double vals[4];
        for (int i = 0; i < 4; ++i)
            if (!detail::parse_double(cols[i], vals[i]))
                throw MalformedRow("line " + std::to_string(line_no) + ": non-numeric field `" +
                                   std::string(cols[static_cast<std::size_t>(i)]) + "`");
        if (!t.empty() && vals[0] <= t.back())
            throw NonUniformSampling("line " + std::to_string(line_no) +
                                     ": timestamps must increase");
        t.push_back(vals[0]);
        axes[0].push_back(vals[1]);
        axes[1].push_back(vals[2]);
        axes[2].push_back(vals[3]);
    }

    if (!saw_header || t.empty())
        throw EmptyFile("no data rows");
    if (t.size() < 2)
        throw NonUniformSampling("a single row cannot define a sampling grid");

    const double period = t[1] - t[0];
    if (!(period > 0))
        throw NonUniformSampling("first two timestamps coincide");
    const double fs = 1.0 / period;
    for (std::size_t i = 1; i < t.size(); ++i) {
        const double gap = t[i] - t[i - 1];
        if (std::abs(gap - period) > 0.5 * period)
            throw NonUniformSampling("gap of " + detail::format_double(gap) + " s before row " +
                                     std::to_string(i + 1) + " deviates from the " +
                                     detail::format_double(period) + " s period");
    }

    SensorRecording rec{metadata.sensor_id,
                        TriAxialSeries(fs, t[0], std::move(axes)),
                        metadata.pressure_kgfcm2,
                        metadata.flow_lpm,
                        metadata.scenario,
                        metadata.side};
    rec.validate();
    return rec;
}

inline SensorRecording parse_recording_file(const std::string& path,
                                            const RecordingMetadata& metadata) {
    std::ifstream in(path);
    if (!in)
        throw IoFailure("cannot open " + path);
    return parse_recording(in, metadata);
}

/// Write the series back out in the sensor CSV format. Axis values use the
/// shortest exact decimal form, so write-then-parse returns bit-identical
/// samples.
inline void write_recording(std::ostream& out, const TriAxialSeries& series) {
    out << "t,ax,ay,az\n";
    const auto x = series.axis(Axis::X);
    const auto y = series.axis(Axis::Y);
    const auto z = series.axis(Axis::Z);
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << detail::format_double(series.time_at(i)) << ',' << detail::format_double(x[i])
            << ',' << detail::format_double(y[i]) << ',' << detail::format_double(z[i]) << '\n';
    }
    if (!out)
        throw IoFailure("sensor CSV write failed");
}

inline void write_recording_file(const std::string& path, const TriAxialSeries& series) {
    std::ofstream out(path, std::ios::binary); // LF line endings on every platform
    if (!out)
        throw IoFailure("cannot open " + path + " for writing");
    write_recording(out, series);
}

/// Two-column plot-data export (lag_s,value), lossless at 17 significant
/// digits.
inline void export_correlation(std::ostream& out, const CorrelationFunction& corr) {
    out << "lag_s,value\n";
    for (std::size_t i = 0; i < corr.size(); ++i)
        out << detail::format_double_17g(corr.lags_s[i]) << ','
            << detail::format_double_17g(corr.values[i]) << '\n';
    if (!out)
        throw IoFailure("correlation CSV write failed");
}

inline void export_correlation_file(const std::string& path, const CorrelationFunction& corr) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoFailure("cannot open " + path + " for writing");
    export_correlation(out, corr);
}

inline CorrelationFunction import_correlation(std::istream& in) {
    std::string line;
    CorrelationFunction corr;
    corr.normalized = false;
    bool saw_header = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view sv = detail::trim(line);
        if (sv.empty()) continue;
        if (!saw_header) {
            if (sv != "lag_s,value")
                throw MalformedRow("line 1: expected header `lag_s,value`");
            saw_header = true;
            continue;
        }
        const auto cols = detail::split(sv, ',');
        double lag = 0, value = 0;
        if (cols.size() != 2 || !detail::parse_double(cols[0], lag) ||
            !detail::parse_double(cols[1], value))
            throw MalformedRow("line " + std::to_string(line_no) + ": bad correlation row");
        corr.lags_s.push_back(lag);
        corr.values.push_back(value);
    }
    if (!saw_header || corr.values.empty())
        throw EmptyFile("no correlation rows");
    return corr;
}

} // namespace leakloc
