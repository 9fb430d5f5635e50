#include "multifrac/csv.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace multifrac {

namespace {

std::ofstream open_out(const std::string& file) {
    std::ofstream out(file, std::ios::binary);  // binary: no platform newline games
    if (!out) throw std::runtime_error("cannot open for writing: " + file);
    return out;
}

}  // namespace

std::string format_double(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

void write_path_csv(const std::string& file, const SampledPath& path,
                    const SampledPath* hurst) {
    auto out = open_out(file);
    out << (hurst ? "t,value,H\n" : "t,value\n");
    for (std::size_t k = 0; k < path.values.size(); ++k) {
        out << format_double(path.grid.node(k)) << ',' << format_double(path.values[k]);
        if (hurst) out << ',' << format_double(hurst->at_time(path.grid.node(k)));
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + file);
}

void write_paths_csv(const std::string& file, const std::vector<SampledPath>& paths,
                     const std::vector<SampledPath>* hurst_paths) {
    auto out = open_out(file);
    out << (hurst_paths ? "t,value,H,path_id\n" : "t,value,path_id\n");
    for (std::size_t p = 0; p < paths.size(); ++p) {
        for (std::size_t k = 0; k < paths[p].values.size(); ++k) {
            out << format_double(paths[p].grid.node(k)) << ','
                << format_double(paths[p].values[k]);
            if (hurst_paths)
                out << ',' << format_double((*hurst_paths)[p].at_time(paths[p].grid.node(k)));
            out << ',' << p << '\n';
        }
    }
    if (!out) throw std::runtime_error("write failed: " + file);
}

void write_covariance_csv(const std::string& file, const CovarianceTable& table) {
    auto out = open_out(file);
    out << "t,s,value,model\n";
    for (std::size_t i = 0; i < table.values.size(); ++i)
        out << format_double(table.queries[i].first) << ','
            << format_double(table.queries[i].second) << ',' << format_double(table.values[i])
            << ',' << table.model << '\n';
    if (!out) throw std::runtime_error("write failed: " + file);
}

void write_rescaling_csv(const std::string& file, const RescalingReport& rep) {
    auto out = open_out(file);
    out << "h,r,v,empirical,std_error,limit,abs_err\n";
    for (std::size_t hi = 0; hi < rep.h_values.size(); ++hi)
        for (std::size_t q = 0; q < rep.rv_pairs.size(); ++q)
            out << format_double(rep.h_values[hi]) << ','
                << format_double(rep.rv_pairs[q].first) << ','
                << format_double(rep.rv_pairs[q].second) << ','
                << format_double(rep.empirical[hi][q]) << ','
                << format_double(rep.std_error[hi][q]) << ',' << format_double(rep.limit[q])
                << ',' << format_double(std::abs(rep.empirical[hi][q] - rep.limit[q]))
                << '\n';
    if (!out) throw std::runtime_error("write failed: " + file);
}

void write_kc_csv(const std::string& file, const KcCheckReport& rep) {
    auto out = open_out(file);
    out << "t,h,ratio\n";
    for (std::size_t ti = 0; ti < rep.t_grid.size(); ++ti)
        for (std::size_t hi = 0; hi < rep.h_grid.size(); ++hi)
            out << format_double(rep.t_grid[ti]) << ',' << format_double(rep.h_grid[hi]) << ','
                << format_double(rep.ratios[ti][hi]) << '\n';
    if (!out) throw std::runtime_error("write failed: " + file);
}

void write_fig2_csv(const std::string& file, const Fig2Report& rep) {
    auto out = open_out(file);
    out << "pair,point,alpha_field,alpha_ito\n";
    const std::size_t np = rep.config.points.size();
    for (std::size_t p = 0; p < rep.config.n_pairs; ++p)
        for (std::size_t q = 0; q < np; ++q)
            out << p << ',' << format_double(rep.config.points[q]) << ','
                << format_double(rep.alpha_field[p * np + q]) << ','
                << format_double(rep.alpha_ito[p * np + q]) << '\n';
    if (!out) throw std::runtime_error("write failed: " + file);
}

}  // namespace multifrac
