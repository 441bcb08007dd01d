#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "entrykin/abm.hpp"
#include "entrykin/grid.hpp"
#include "entrykin/moments.hpp"
#include "entrykin/solve.hpp"

namespace entrykin {

/// Shortest decimal that round-trips (std::to_chars), so output is locale- and platform-stable.
[[nodiscard]] std::string format_number(double v);
[[nodiscard]] std::string format_number(std::int64_t v);

/// Minimal comma-separated writer; fields are never quoted, so callers pass plain tokens.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    CsvWriter& operator<<(double v);
    CsvWriter& operator<<(std::int64_t v);
    CsvWriter& operator<<(const std::string& v);
    void end_row();
    void close();

private:
    void sep();
    std::ofstream out_;
    std::filesystem::path path_;
    std::size_t width_;
    std::size_t col_ = 0;
};

[[nodiscard]] std::vector<std::string> moment_series_header(std::size_t windows);
[[nodiscard]] std::vector<std::string> abm_series_header(std::size_t windows);

/// t, mass, alpha, beta, a, b, c, d, energy, grad_energy, phi, sorting_R1.., bmass_left, bmass_right
void write_moment_series(const std::filesystem::path& path, const MomentSeries& series);
/// n, t, m_mean, m_se, alpha_hat, a_hat, sort_frac_R1.., replica_count
void write_abm_series(const std::filesystem::path& path, const AbmEnsemble& ens);
/// x_center, f_hat
void write_histogram(const std::filesystem::path& path, const Grid& grid, const std::vector<double>& f_hat);
/// x_center, f, p, pf_flux_left_face
void write_pde_snapshot(const std::filesystem::path& path, const Grid& grid, const Snapshot& snap);

/// Plain key=value lines in insertion order.
class KeyValueReport {
public:
    void add(const std::string& key, const std::string& value);
    void add(const std::string& key, double value);
    void add(const std::string& key, std::int64_t value);
    void add(const std::string& key, bool value);
    [[nodiscard]] std::string str() const;
    void write(const std::filesystem::path& path) const;
    [[nodiscard]] const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return kv_; }

private:
    std::vector<std::pair<std::string, std::string>> kv_;
};

/// Splits a CSV file into a header and rows of raw fields. Throws Error on ragged rows.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
[[nodiscard]] CsvTable read_csv(const std::filesystem::path& path);

}  // namespace entrykin
