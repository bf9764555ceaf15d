#include "rmtk/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rmtk/common.hpp"

namespace rmtk::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);   // binary: no platform newline translation
    if (!out) throw Error("cannot open for writing: " + path.string());
    return out;
}

} // namespace

void write_spectrum_csv(const std::filesystem::path& path, const ensembles::Spectrum& s,
                        bool perturbed) {
    auto out = open_out(path);
    out << (perturbed ? "alpha,E,z\n" : "alpha,e,r\n");
    for (Eigen::Index i = 0; i < s.size(); ++i)
        out << (i + 1) << ',' << format_double(s.energies[i]) << ','
            << format_double(s.weights[i]) << '\n';
    if (!out) throw Error("write failed: " + path.string());
}

void write_theory_curve_csv(const std::filesystem::path& path, const theory::TheoryCurve& c) {
    auto out = open_out(path);
    out << "grid,value\n";
    for (std::size_t i = 0; i < c.grid.size(); ++i)
        out << format_double(c.grid[i]) << ',' << format_double(c.values[i]) << '\n';
    if (!out) throw Error("write failed: " + path.string());
}

void write_histogram_csv(const std::filesystem::path& path, const stats::Histogram& h) {
    auto out = open_out(path);
    out << "bin_lo,bin_hi,density\n";
    for (std::size_t i = 0; i < h.density.size(); ++i)
        out << format_double(h.bin_lo[i]) << ',' << format_double(h.bin_hi[i]) << ','
            << format_double(h.density[i]) << '\n';
    if (!out) throw Error("write failed: " + path.string());
}

void write_moments_csv(const std::filesystem::path& path, const std::vector<MomentRow>& rows) {
    auto out = open_out(path);
    out << "q,value,stderr\n";
    for (const auto& r : rows)
        out << format_double(r.q) << ',' << format_double(r.value) << ','
            << format_double(r.std_error) << '\n';
    if (!out) throw Error("write failed: " + path.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    if (!out) throw Error("write failed: " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
    if (!out) throw Error("write failed: " + path.string());
}

std::string file_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open for hashing: " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    char hex[20];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

nlohmann::json params_to_json(const ensembles::EnsembleParams& p) {
    return {{"n", p.n},       {"beta", p.beta},         {"sigma", p.sigma},
            {"coupling", p.coupling}, {"kappa", p.kappa()}, {"seed", p.seed}};
}

ensembles::EnsembleParams params_from_json(const nlohmann::json& j) {
    ensembles::EnsembleParams p;
    p.n = j.value("n", 1000);
    p.beta = j.value("beta", 1);
    p.sigma = j.value("sigma", 1.0);
    p.seed = j.value("seed", std::uint64_t{1});
    const bool has_kappa = j.contains("kappa");
    const bool has_coupling = j.contains("coupling");
    if (has_kappa && has_coupling)
        throw Error("params: specify exactly one of kappa and coupling");
    if (has_kappa)
        p.coupling = j["kappa"].get<double>() * p.sigma * std::sqrt(static_cast<double>(p.n));
    else if (has_coupling)
        p.coupling = j["coupling"].get<double>();
    p.validate();
    return p;
}

} // namespace rmtk::io
