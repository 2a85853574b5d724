#include "io.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

namespace rankest::io {

namespace {

std::string_view strip(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(sep, start);
        out.push_back(strip(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

bool to_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    // strtod copes with inf/nan spellings that from_chars on older libstdc++ may not.
    const std::string tmp(s);
    char* end = nullptr;
    errno = 0;
    out = std::strtod(tmp.c_str(), &end);
    return end == tmp.c_str() + tmp.size() && errno != ERANGE;
}

}  // namespace

Table parse_csv(std::string_view text, bool require_header) {
    Table table;
    std::size_t line_no = 0;
    std::size_t start = 0;
    bool first = true;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find('\n', start), text.size());
        const std::string_view line = strip(text.substr(start, end - start));
        start = end + 1;
        ++line_no;
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        auto cells = split(line, ',');
        if (first) {
            first = false;
            double probe = 0.0;
            const bool numeric = std::all_of(cells.begin(), cells.end(),
                                             [&](std::string_view c) { return to_double(c, probe); });
            if (!numeric || require_header) {
                if (numeric) throw Error(ErrorCode::ParseError, "header row required");
                for (auto c : cells) table.header.emplace_back(c);
                continue;
            }
        }
        std::vector<double> row(cells.size());
        for (std::size_t j = 0; j < cells.size(); ++j)
            if (!to_double(cells[j], row[j]))
                throw Error(ErrorCode::ParseError,
                            "line " + std::to_string(line_no) + ": '" + std::string(cells[j]) + "' is not a number");
        const std::size_t width = table.header.empty() ? (table.rows.empty() ? row.size() : table.rows[0].size())
                                                       : table.header.size();
        if (row.size() != width)
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                                   std::to_string(width) + " fields, got " +
                                                   std::to_string(row.size()));
        table.rows.push_back(std::move(row));
        if (end == text.size()) break;
    }
    if (table.header.empty() && table.rows.empty()) throw Error(ErrorCode::ParseError, "file is empty");
    if (table.rows.empty()) throw Error(ErrorCode::ParseError, "no data rows");
    return table;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw Error(ErrorCode::IoError, "read failed: " + path.string());
    return buf.str();
}

Sample sample_from_table(const Table& table) {
    std::map<std::string, std::size_t> index;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        const std::string& name = table.header[j];
        if (!index.emplace(name, j).second) throw Error(ErrorCode::ParseError, "duplicate column " + name);
    }
    std::size_t num_x = 0;
    while (index.count("x" + std::to_string(num_x + 1))) ++num_x;
    for (const auto& [name, j] : index) {
        const bool known = name == "y" || name == "r" || name == "v" || name == "w";
        bool is_x = false;
        if (name.size() > 1 && name[0] == 'x') {
            std::size_t k = 0;
            const auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), k);
            is_x = ec == std::errc() && ptr == name.data() + name.size() && k >= 1;
            if (is_x && k > num_x)
                throw Error(ErrorCode::MissingColumn, "x" + std::to_string(num_x + 1) + " (found " + name + ")");
        }
        if (!known && !is_x) throw Error(ErrorCode::ParseError, "unknown column " + name);
    }
    if (!index.count("y")) throw Error(ErrorCode::MissingColumn, "y");
    if (num_x == 0) throw Error(ErrorCode::MissingColumn, "x1");

    const auto n = static_cast<Eigen::Index>(table.rows.size());
    auto column = [&](std::size_t j) {
        Eigen::VectorXd c(n);
        for (Eigen::Index i = 0; i < n; ++i) c[i] = table.rows[static_cast<std::size_t>(i)][j];
        return c;
    };
    Sample s;
    s.y = column(index.at("y"));
    s.x.resize(n, static_cast<Eigen::Index>(num_x));
    for (std::size_t k = 0; k < num_x; ++k) s.x.col(static_cast<Eigen::Index>(k)) = column(index.at("x" + std::to_string(k + 1)));
    if (index.count("r")) s.r = column(index.at("r"));
    if (index.count("v")) s.v = column(index.at("v"));
    if (index.count("w")) s.w = column(index.at("w"));
    return s;
}

Sample read_sample(const std::filesystem::path& path) { return sample_from_table(parse_csv(read_file(path))); }

std::vector<double> read_column(const std::filesystem::path& path, const std::string& column) {
    const Table table = parse_csv(read_file(path), false);
    std::size_t j = 0;
    if (!column.empty()) {
        const auto it = std::find(table.header.begin(), table.header.end(), column);
        if (it == table.header.end()) throw Error(ErrorCode::MissingColumn, column);
        j = static_cast<std::size_t>(it - table.header.begin());
    } else if (table.rows[0].size() != 1) {
        throw Error(ErrorCode::ParseError, "expected one column; pick one with --column");
    }
    std::vector<double> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows) out.push_back(row[j]);
    return out;
}

std::string fmt(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::vector<double> parse_list(std::string_view text) {
    std::vector<double> out;
    for (auto cell : split(text, ',')) {
        double v = 0.0;
        if (!to_double(cell, v)) throw Error(ErrorCode::ConfigError, "'" + std::string(cell) + "' is not a number");
        out.push_back(v);
    }
    return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw Error(ErrorCode::IoError, "write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorCode::IoError, "cannot move output into " + path.string());
    }
}

}  // namespace rankest::io
