#include "chieb/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "chieb/errors.hpp"

namespace chieb {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
        std::size_t b = 0;
        while (b < field.size() && field[b] == ' ') ++b;
        out.push_back(field.substr(b));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s, std::size_t row, const std::string& col) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw data_error("row " + std::to_string(row) + ": cannot parse " + col + " value '" + s + "'");
    }
}

}  // namespace

Battery ingest_csv(const std::string& path, std::optional<double> default_k) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw data_error(path + ": empty file");

    const auto header = split_csv_line(line);
    int col_id = -1, col_x = -1, col_k = -1, col_null = -1, col_lambda = -1;
    for (int i = 0; i < static_cast<int>(header.size()); ++i) {
        if (header[i] == "id") col_id = i;
        else if (header[i] == "x") col_x = i;
        else if (header[i] == "k") col_k = i;
        else if (header[i] == "is_null") col_null = i;
        else if (header[i] == "lambda") col_lambda = i;
    }
    if (col_id < 0 || col_x < 0) throw data_error(path + ": header must contain id,x");
    if (col_k < 0 && !default_k) {
        throw config_error(path + ": no k column and no default df given");
    }

    Battery b;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        const int needed = std::max({col_id, col_x, col_k, col_null, col_lambda});
        if (static_cast<int>(f.size()) <= needed) {
            throw data_error(path + ": row " + std::to_string(row) + ": too few fields");
        }
        BatteryRecord r;
        r.id = f[col_id];
        r.x = parse_double(f[col_x], row, "x");
        r.k = col_k >= 0 && !f[col_k].empty() ? parse_double(f[col_k], row, "k")
                                              : *default_k;
        if (col_null >= 0 && !f[col_null].empty()) {
            r.is_null = f[col_null] == "1" || f[col_null] == "true";
        }
        if (col_lambda >= 0 && !f[col_lambda].empty()) {
            r.lambda = parse_double(f[col_lambda], row, "lambda");
        }
        if (!(r.x > 0.0)) {
            throw data_error(path + ": row " + std::to_string(row) + ": x must be positive");
        }
        b.records.push_back(std::move(r));
    }
    b.validate();
    return b;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_estimates_csv(const std::string& path, const std::vector<EstimateRow>& rows) {
    std::ostringstream out;
    out << "id,x,k,mean,var,lo,hi,fdr,significant,flags\n";
    for (const auto& r : rows) {
        const auto& s = r.summary;
        out << r.id << ',' << format_double(s.x) << ',' << format_double(s.k) << ','
            << format_double(s.mean) << ',' << format_double(s.variance) << ','
            << format_double(s.interval_lo) << ',' << format_double(s.interval_hi) << ','
            << (s.fdr ? format_double(*s.fdr) : std::string()) << ','
            << (r.significant ? '1' : '0') << ',' << s.flags.to_string() << '\n';
    }
    write_text(path, out.str());
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write " + path);
    out << content;
}

}  // namespace chieb
