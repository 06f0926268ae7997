#include "fbl/field_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fbl {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string to_fld_string(const ScalarField& f) {
    const GridSpec& s = f.spec;
    std::string out;
    out.reserve(s.size() * 24 + 64);
    out += std::to_string(s.nx) + ' ' + std::to_string(s.ny) + ' ' + format_number(s.x0) + ' ' +
           format_number(s.y0) + ' ' + format_number(s.h) + '\n';
    for (int j = 0; j < s.ny; ++j) {
        for (int i = 0; i < s.nx; ++i) {
            if (i) out += ' ';
            out += format_number(f(i, j));
        }
        out += '\n';
    }
    return out;
}

ScalarField parse_fld(const std::string& text) {
    std::istringstream in(text);
    GridSpec s;
    in >> s.nx >> s.ny >> s.x0 >> s.y0 >> s.h;
    ensure(static_cast<bool>(in), ErrorKind::Io, "malformed .fld header");
    s.validate();
    ScalarField f(s);
    for (auto& v : f.values) {
        in >> v;
        ensure(static_cast<bool>(in), ErrorKind::Io, "truncated .fld body");
        ensure(std::isfinite(v), ErrorKind::Io, "non-finite value in .fld");
    }
    return f;
}

void write_fld(const std::filesystem::path& path, const ScalarField& f) {
    std::ofstream out(path);
    ensure(static_cast<bool>(out), ErrorKind::Io, "cannot write " + path.string());
    out << to_fld_string(f);
}

ScalarField read_fld(const std::filesystem::path& path) {
    std::ifstream in(path);
    ensure(static_cast<bool>(in), ErrorKind::Io, "cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_fld(buf.str());
}

void write_complex_fld(const std::filesystem::path& stem, const GridSpec& spec,
                       const std::vector<std::complex<double>>& values) {
    ScalarField re(spec), im(spec);
    for (std::size_t k = 0; k < values.size(); ++k) {
        re.values[k] = values[k].real();
        im.values[k] = values[k].imag();
    }
    write_fld(stem.string() + "_re.fld", re);
    write_fld(stem.string() + "_im.fld", im);
}

std::vector<std::complex<double>> read_complex_fld(const std::filesystem::path& stem,
                                                   GridSpec* spec) {
    const auto re = read_fld(stem.string() + "_re.fld");
    const auto im = read_fld(stem.string() + "_im.fld");
    ensure(re.spec == im.spec, ErrorKind::Io, "real and imaginary grids differ");
    std::vector<std::complex<double>> out(re.values.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = {re.values[k], im.values[k]};
    if (spec) *spec = re.spec;
    return out;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::parse(const std::string& text) {
    Config c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        ensure(eq != std::string::npos, ErrorKind::Config,
               "line " + std::to_string(lineno) + ": expected key = value");
        const auto key = trim(line.substr(0, eq));
        ensure(!key.empty(), ErrorKind::Config, "line " + std::to_string(lineno) + ": empty key");
        c.entries_[key] = trim(line.substr(eq + 1));
    }
    return c;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    ensure(static_cast<bool>(in), ErrorKind::Io, "cannot read config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string Config::get(const std::string& key) const {
    const auto it = entries_.find(key);
    ensure(it != entries_.end(), ErrorKind::Config, "missing config key '" + key + "'");
    return it->second;
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        ensure(used == it->second.size(), ErrorKind::Config, "trailing characters");
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::Config, "config key '" + key + "' is not a number");
    }
}

int Config::get_int(const std::string& key, int fallback) const {
    const double v = get_double(key, fallback);
    ensure(v == std::floor(v), ErrorKind::Config, "config key '" + key + "' is not an integer");
    return static_cast<int>(v);
}

std::vector<double> Config::get_doubles(const std::string& key,
                                        const std::vector<double>& fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    std::vector<double> out;
    std::string item;
    std::istringstream in(it->second);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw Error(ErrorKind::Config, "config key '" + key + "' has a non-numeric entry");
        }
    }
    return out;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    ensure(static_cast<bool>(out), ErrorKind::Io, "cannot write " + path.string());
    for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_number(row[k]);
        out << '\n';
    }
}

}  // namespace fbl
