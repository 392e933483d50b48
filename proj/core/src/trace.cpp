#include "aapcd/trace.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace aapcd {

namespace {

void put_double(std::ostream& out, double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, res.ptr - buf);
}

template <class T> T parse_number(std::string_view field, std::size_t line)
{
    T value{};
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
        if constexpr (std::is_floating_point_v<T>) {
            // from_chars rejects the spellings to_chars uses for non-finite values
            if (field == "nan" || field == "-nan") return std::numeric_limits<T>::quiet_NaN();
            if (field == "inf") return std::numeric_limits<T>::infinity();
            if (field == "-inf") return -std::numeric_limits<T>::infinity();
        }
        throw std::runtime_error("trace line " + std::to_string(line) + ": bad field '" +
                                 std::string(field) + "'");
    }
    return value;
}

std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        out.push_back(line.substr(pos, comma - pos));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

} // namespace

void write_trace_csv(std::ostream& out, const IterationTrace& trace)
{
    out << "# F0=";
    put_double(out, trace.initial_objective);
    out << '\n' << kTraceHeader << '\n';
    for (const auto& r : trace.records) {
        out << r.k << ',' << r.block << ',' << r.delay << ',';
        put_double(out, r.beta);
        out << ',' << to_string(r.branch) << ',';
        put_double(out, r.F);
        out << ',';
        put_double(out, r.xi);
        out << ',';
        put_double(out, r.G);
        out << ',';
        put_double(out, r.step_sq);
        out << ',' << r.wallclock_ns << '\n';
    }
}

void write_trace_csv(const std::filesystem::path& path, const IterationTrace& trace)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write trace: " + path.string());
    write_trace_csv(out, trace);
    if (!out) throw std::runtime_error("error writing trace: " + path.string());
}

IterationTrace read_trace_csv(std::istream& in)
{
    IterationTrace trace;
    trace.initial_objective = std::numeric_limits<double>::quiet_NaN();
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.starts_with("# F0=")) {
            trace.initial_objective = parse_number<double>(std::string_view(line).substr(5), line_no);
            continue;
        }
        if (line.front() == '#') continue;
        if (!header) {
            if (line != kTraceHeader)
                throw std::runtime_error("trace: unexpected header '" + line + "'");
            header = true;
            continue;
        }
        const auto f = split(line);
        if (f.size() != 10)
            throw std::runtime_error("trace line " + std::to_string(line_no) + ": expected 10 fields");
        IterationRecord r;
        r.k = parse_number<std::size_t>(f[0], line_no);
        r.block = parse_number<std::size_t>(f[1], line_no);
        r.delay = parse_number<std::size_t>(f[2], line_no);
        r.beta = parse_number<double>(f[3], line_no);
        r.branch = parse_branch(f[4]);
        r.F = parse_number<double>(f[5], line_no);
        r.xi = parse_number<double>(f[6], line_no);
        r.G = parse_number<double>(f[7], line_no);
        r.step_sq = parse_number<double>(f[8], line_no);
        r.wallclock_ns = parse_number<std::int64_t>(f[9], line_no);
        trace.records.push_back(r);
    }
    if (!header) throw std::runtime_error("trace: missing header");
    return trace;
}

IterationTrace read_trace_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open trace: " + path.string());
    return read_trace_csv(in);
}

std::uint64_t file_hash(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 14];
    while (in) {
        in.read(buf, sizeof buf);
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

} // namespace aapcd
