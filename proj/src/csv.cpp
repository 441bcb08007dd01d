#include "entrykin/csv.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "entrykin/errors.hpp"

namespace entrykin {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";  // folds -0 as well
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string format_number(std::int64_t v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path), width_(header.size()) {
    if (!out_) throw Error(fmt::format("cannot write '{}'", path.string()));
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
}

void CsvWriter::sep() {
    if (col_ >= width_) throw ContractViolation(fmt::format("{}: row wider than header", path_.string()));
    if (col_++) out_ << ',';
}

CsvWriter& CsvWriter::operator<<(double v) {
    sep();
    out_ << format_number(v);
    return *this;
}

CsvWriter& CsvWriter::operator<<(std::int64_t v) {
    sep();
    out_ << format_number(v);
    return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& v) {
    sep();
    out_ << v;
    return *this;
}

void CsvWriter::end_row() {
    if (col_ != width_)
        throw ContractViolation(fmt::format("{}: row has {} fields, header {}", path_.string(), col_, width_));
    out_ << '\n';
    col_ = 0;
}

void CsvWriter::close() {
    out_.close();
    if (!out_) throw Error(fmt::format("failed writing '{}'", path_.string()));
}

std::vector<std::string> moment_series_header(std::size_t windows) {
    std::vector<std::string> h{"t", "mass", "alpha", "beta", "a", "b", "c", "d", "energy", "grad_energy", "phi"};
    for (std::size_t w = 0; w < windows; ++w) h.push_back(fmt::format("sorting_R{}", w + 1));
    h.emplace_back("bmass_left");
    h.emplace_back("bmass_right");
    return h;
}

std::vector<std::string> abm_series_header(std::size_t windows) {
    std::vector<std::string> h{"n", "t", "m_mean", "m_se", "alpha_hat", "a_hat"};
    for (std::size_t w = 0; w < windows; ++w) h.push_back(fmt::format("sort_frac_R{}", w + 1));
    h.emplace_back("replica_count");
    return h;
}

void write_moment_series(const std::filesystem::path& path, const MomentSeries& series) {
    CsvWriter w(path, moment_series_header(series.windows.size()));
    for (const auto& r : series.records) {
        w << r.t << r.mass << r.alpha << r.beta << r.a << r.b << r.c << r.d << r.energy << r.grad_energy << r.phi;
        for (double s : r.sorting) w << s;
        w << r.bmass_left << r.bmass_right;
        w.end_row();
    }
    w.close();
}

void write_abm_series(const std::filesystem::path& path, const AbmEnsemble& ens) {
    CsvWriter w(path, abm_series_header(ens.windows.size()));
    for (const auto& r : ens.rows) {
        w << r.n << r.t << r.m_mean << r.m_se << r.alpha_hat << r.a_hat;
        for (double s : r.sort_frac) w << s;
        w << static_cast<std::int64_t>(r.replica_count);
        w.end_row();
    }
    w.close();
}

void write_histogram(const std::filesystem::path& path, const Grid& grid, const std::vector<double>& f_hat) {
    if (f_hat.size() != grid.size()) throw ContractViolation("histogram size differs from grid");
    CsvWriter w(path, {"x_center", "f_hat"});
    for (std::size_t i = 0; i < grid.size(); ++i) {
        w << grid.center(i) << f_hat[i];
        w.end_row();
    }
    w.close();
}

void write_pde_snapshot(const std::filesystem::path& path, const Grid& grid, const Snapshot& snap) {
    CsvWriter w(path, {"x_center", "f", "p", "pf_flux_left_face"});
    for (std::size_t i = 0; i < grid.size(); ++i) {
        w << grid.center(i) << snap.f[i] << snap.p[i] << snap.flux_left_face[i];
        w.end_row();
    }
    w.close();
}

void KeyValueReport::add(const std::string& key, const std::string& value) { kv_.emplace_back(key, value); }
void KeyValueReport::add(const std::string& key, double value) { kv_.emplace_back(key, format_number(value)); }
void KeyValueReport::add(const std::string& key, std::int64_t value) { kv_.emplace_back(key, format_number(value)); }
void KeyValueReport::add(const std::string& key, bool value) { kv_.emplace_back(key, value ? "true" : "false"); }

std::string KeyValueReport::str() const {
    std::string s;
    for (const auto& [k, v] : kv_) s += k + "=" + v + "\n";
    return s;
}

void KeyValueReport::write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << str();
    if (!out) throw Error(fmt::format("failed writing '{}'", path.string()));
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(fmt::format("cannot read '{}'", path.string()));
    auto split = [](const std::string& line) {
        std::vector<std::string> out;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) out.push_back(tok);
        if (!line.empty() && line.back() == ',') out.emplace_back();
        return out;
    };
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw Error(fmt::format("'{}' is empty", path.string()));
    t.header = split(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto row = split(line);
        if (row.size() != t.header.size())
            throw Error(fmt::format("'{}': row {} has {} fields, header {}", path.string(), t.rows.size() + 1,
                                    row.size(), t.header.size()));
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace entrykin
