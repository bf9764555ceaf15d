#ifndef RMTK_IO_HPP
#define RMTK_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "rmtk/ensembles.hpp"
#include "rmtk/stats.hpp"
#include "rmtk/theory.hpp"

namespace rmtk::io {

// 17 significant digits: doubles round-trip exactly.
std::string format_double(double v);

// header `alpha,e,r` (unperturbed) or `alpha,E,z` (perturbed), one row per state
void write_spectrum_csv(const std::filesystem::path& path, const ensembles::Spectrum& s,
                        bool perturbed);

void write_theory_curve_csv(const std::filesystem::path& path, const theory::TheoryCurve& c);

// `bin_lo,bin_hi,density`
void write_histogram_csv(const std::filesystem::path& path, const stats::Histogram& h);

// `q,value,stderr`
struct MomentRow {
    double q;
    double value;
    double std_error;
};
void write_moments_csv(const std::filesystem::path& path, const std::vector<MomentRow>& rows);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

void write_text(const std::filesystem::path& path, const std::string& text);

// FNV-1a 64-bit of the file contents, hex-encoded; stable across runs.
std::string file_hash(const std::filesystem::path& path);

nlohmann::json params_to_json(const ensembles::EnsembleParams& p);
ensembles::EnsembleParams params_from_json(const nlohmann::json& j);

} // namespace rmtk::io

#endif
