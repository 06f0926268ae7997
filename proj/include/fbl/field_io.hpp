#pragma once

// .fld text fields, key = value configs and number formatting.

#include <complex>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fbl/grid.hpp"

namespace fbl {

/// Decimal with 17 significant digits; round-trips every double.
std::string format_number(double v);

/// Header `nx ny x0 y0 h`, then ny lines of nx values, bottom row first.
std::string to_fld_string(const ScalarField& f);
ScalarField parse_fld(const std::string& text);

void write_fld(const std::filesystem::path& path, const ScalarField& f);
ScalarField read_fld(const std::filesystem::path& path);

/// Complex fields as `<stem>_re.fld` and `<stem>_im.fld`.
void write_complex_fld(const std::filesystem::path& stem, const GridSpec& spec,
                       const std::vector<std::complex<double>>& values);
std::vector<std::complex<double>> read_complex_fld(const std::filesystem::path& stem,
                                                   GridSpec* spec = nullptr);

/// Flat `key = value` text; `#` starts a comment.
class Config {
public:
    Config() = default;
    static Config parse(const std::string& text);
    static Config load(const std::filesystem::path& path);

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    std::string get(const std::string& key) const;
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::vector<double> get_doubles(const std::string& key,
                                    const std::vector<double>& fallback) const;
    void set(const std::string& key, const std::string& value) { entries_[key] = value; }
    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

/// Comma-separated table with a header row.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace fbl
