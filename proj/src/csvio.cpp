#include "floc/csvio.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>

#include "floc/errors.hpp"

namespace floc {

namespace {

std::string strip(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(strip(line.substr(start)));
            break;
        }
        out.push_back(strip(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}

long parse_long(const std::string& s, std::size_t line, const char* what) {
    if (s.empty()) throw ParseError(line, std::string("empty ") + what);
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (errno != 0 || end != s.c_str() + s.size())
        throw ParseError(line, std::string("invalid ") + what + ": '" + s + "'");
    return v;
}

double parse_double(const std::string& s, std::size_t line, const char* what) {
    if (s.empty()) throw ParseError(line, std::string("empty ") + what);
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (errno != 0 || end != s.c_str() + s.size())
        throw ParseError(line, std::string("invalid ") + what + ": '" + s + "'");
    return v;
}

}  // namespace

std::vector<RawPoint> read_long_csv(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw EmptyInput();
    ++lineno;
    // tolerate a UTF-8 byte-order mark on the header
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    {
        const auto fields = split_fields(line);
        if (fields.size() != 3 || fields[0] != "subject" || fields[1] != "t" ||
            fields[2] != "y")
            throw ParseError(lineno, "expected header 'subject,t,y'");
    }

    std::vector<RawPoint> out;
    while (std::getline(in, line)) {
        ++lineno;
        if (strip(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 3)
            throw ParseError(lineno, "expected 3 comma-separated fields, got " +
                                         std::to_string(fields.size()));
        RawPoint p;
        p.subject = parse_long(fields[0], lineno, "subject id");
        p.t = parse_double(fields[1], lineno, "t");
        p.y = parse_double(fields[2], lineno, "y");
        out.push_back(p);
    }
    if (out.empty()) throw EmptyInput();
    return out;
}

std::vector<RawPoint> read_long_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open input file: " + path);
    return read_long_csv(in);
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmtg(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace floc
