#pragma once

// Monte Carlo survey of 1-distillability over random density matrices drawn
// from the simplex x Haar product measure, with CSV persistence, resume
// support, and deterministic parallelism (per-sample derived rng streams).

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "distilkit/criteria.hpp"
#include "distilkit/linalg.hpp"
#include "distilkit/peasant.hpp"
#include "distilkit/rng.hpp"

namespace distilkit {

struct VolumeConfig {
    std::vector<int> dims;
    int samples_per_dim = 1;
    SearchConfig search;
    std::uint64_t master_seed = 0;
    std::string output_path;  // empty: keep records in memory only
    int n_workers = 1;
};

struct VolumeRecord {
    int d = 0;
    int sample_index = 0;
    bool npt = false;
    bool detected = false;
    std::optional<int> first_hit;
    double best_value = 0.0;
};

inline constexpr const char* kVolumeCsvHeader =
    "d,sample_index,npt,detected,first_hit,best_value";

namespace detail {

inline std::string format_g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline void validate_volume_config(const VolumeConfig& cfg) {
    if (cfg.dims.empty())
        throw std::invalid_argument("VolumeConfig: dims must be nonempty");
    for (int d : cfg.dims)
        if (d < 2) throw std::invalid_argument("VolumeConfig: dims must be >= 2");
    if (cfg.samples_per_dim < 1)
        throw std::invalid_argument("VolumeConfig: samples_per_dim must be >= 1");
    if (cfg.n_workers < 1)
        throw std::invalid_argument("VolumeConfig: n_workers must be >= 1");
}

}  // namespace detail

inline std::string format_record(const VolumeRecord& r) {
    std::string line = std::to_string(r.d) + "," +
                       std::to_string(r.sample_index) + "," +
                       (r.npt ? "1" : "0") + "," + (r.detected ? "1" : "0") +
                       ",";
    if (r.first_hit) line += std::to_string(*r.first_hit);
    line += "," + detail::format_g17(r.best_value);
    return line;
}

inline std::vector<VolumeRecord> load_records(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) return {};
    std::string line;
    std::vector<VolumeRecord> out;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != kVolumeCsvHeader)
                throw std::runtime_error("volume CSV: bad header at line 1 of " +
                                         path);
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (line.back() == ',') fields.push_back("");
        try {
            if (fields.size() != 6) throw std::runtime_error("field count");
            VolumeRecord r;
            r.d = std::stoi(fields[0]);
            r.sample_index = std::stoi(fields[1]);
            if (fields[2] != "0" && fields[2] != "1")
                throw std::runtime_error("npt flag");
            if (fields[3] != "0" && fields[3] != "1")
                throw std::runtime_error("detected flag");
            r.npt = fields[2] == "1";
            r.detected = fields[3] == "1";
            if (!fields[4].empty()) r.first_hit = std::stoi(fields[4]);
            r.best_value = std::stod(fields[5]);
            if (r.detected != r.first_hit.has_value())
                throw std::runtime_error("first_hit/detected mismatch");
            out.push_back(r);
        } catch (const std::exception& e) {
            throw std::runtime_error("volume CSV: malformed row at line " +
                                     std::to_string(line_no) + " of " + path +
                                     " (" + e.what() + ")");
        }
    }
    return out;
}

inline void persist_records(const std::vector<VolumeRecord>& records,
                            const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out.good())
        throw std::runtime_error("volume CSV: cannot write " + path);
    out << kVolumeCsvHeader << "\n";
    for (const VolumeRecord& r : records) out << format_record(r) << "\n";
}

// One sample: fully determined by (master_seed, d, sample_index).  PPT draws
// skip the search; their best_value records the PT minimum eigenvalue.
inline VolumeRecord volume_sample(const VolumeConfig& cfg, int d, int index) {
    Rng rng = Rng::substream(cfg.master_seed, static_cast<std::uint64_t>(d),
                             static_cast<std::uint64_t>(index), 0);
    DenseOperator rho = random_density(d, d, rng);
    double pt_min = min_eigenvalue(partial_transpose(rho));
    VolumeRecord r;
    r.d = d;
    r.sample_index = index;
    r.npt = pt_min < -1e-10;
    if (!r.npt) {
        r.best_value = pt_min;
        return r;
    }
    SearchConfig sc = cfg.search;
    sc.seed = Rng::substream(cfg.master_seed, static_cast<std::uint64_t>(d),
                             static_cast<std::uint64_t>(index), 1)
                  .raw();
    SearchOutcome o = random_search(rho, sc);
    r.detected = o.detected;
    r.first_hit = o.first_hit_index;
    r.best_value = o.best_value;
    return r;
}

// Runs (or resumes) the survey.  Completed records are appended to the output
// CSV one at a time in (dims-order, sample_index) order, so an interrupted
// run resumes at the next record boundary and produces byte-identical output.
inline std::vector<VolumeRecord> run_volume(const VolumeConfig& cfg) {
    detail::validate_volume_config(cfg);

    std::vector<VolumeRecord> records;
    std::set<std::pair<int, int>> have;
    const bool persist = !cfg.output_path.empty();
    if (persist) {
        records = load_records(cfg.output_path);
        for (const VolumeRecord& r : records)
            have.insert({r.d, r.sample_index});
    }

    std::ofstream out;
    if (persist) {
        const bool fresh = records.empty();
        out.open(cfg.output_path, fresh ? std::ios::trunc : std::ios::app);
        if (!out.good())
            throw std::runtime_error("volume CSV: cannot write " +
                                     cfg.output_path);
        if (fresh) out << kVolumeCsvHeader << "\n" << std::flush;
    }

    std::vector<std::pair<int, int>> todo;
    for (int d : cfg.dims)
        for (int i = 0; i < cfg.samples_per_dim; ++i)
            if (!have.count({d, i})) todo.emplace_back(d, i);

    for (std::size_t base = 0; base < todo.size();
         base += static_cast<std::size_t>(cfg.n_workers)) {
        const std::size_t batch =
            std::min(static_cast<std::size_t>(cfg.n_workers),
                     todo.size() - base);
        std::vector<VolumeRecord> chunk(batch);
        if (batch == 1) {
            chunk[0] = volume_sample(cfg, todo[base].first, todo[base].second);
        } else {
            std::vector<std::thread> workers;
            for (std::size_t k = 0; k < batch; ++k)
                workers.emplace_back([&cfg, &chunk, &todo, base, k] {
                    chunk[k] = volume_sample(cfg, todo[base + k].first,
                                             todo[base + k].second);
                });
            for (std::thread& w : workers) w.join();
        }
        for (VolumeRecord& r : chunk) {
            if (persist) out << format_record(r) << "\n" << std::flush;
            records.push_back(std::move(r));
        }
    }
    return records;
}

struct VolumeSummaryRow {
    int d = 0;
    int n_samples = 0;
    double frac_npt = 0, se_npt = 0;
    double frac_npt_undetected = 0, se_npt_undetected = 0;
    double frac_all_undetected = 0, se_all_undetected = 0;
    // fraction of NPT samples whose first random test already detected them
    double frac_first_test = 0, se_first_test = 0;
};

inline std::vector<VolumeSummaryRow> summarize(
    const std::vector<VolumeRecord>& records) {
    if (records.empty())
        throw std::invalid_argument("summarize: no records");
    std::map<int, std::vector<const VolumeRecord*>> by_d;
    for (const VolumeRecord& r : records) by_d[r.d].push_back(&r);

    auto se = [](double p, int n) {
        return n > 0 ? std::sqrt(p * (1 - p) / n) : 0.0;
    };
    std::vector<VolumeSummaryRow> out;
    for (auto& [d, rs] : by_d) {
        VolumeSummaryRow row;
        row.d = d;
        row.n_samples = static_cast<int>(rs.size());
        int n_npt = 0, n_npt_undet = 0, n_all_undet = 0, n_first = 0;
        for (const VolumeRecord* r : rs) {
            if (r->npt) {
                ++n_npt;
                if (!r->detected) ++n_npt_undet;
                if (r->first_hit && *r->first_hit == 1) ++n_first;
            }
            if (!r->detected) ++n_all_undet;
        }
        row.frac_npt = double(n_npt) / row.n_samples;
        row.se_npt = se(row.frac_npt, row.n_samples);
        if (n_npt > 0) {
            row.frac_npt_undetected = double(n_npt_undet) / n_npt;
            row.se_npt_undetected = se(row.frac_npt_undetected, n_npt);
            row.frac_first_test = double(n_first) / n_npt;
            row.se_first_test = se(row.frac_first_test, n_npt);
        }
        row.frac_all_undetected = double(n_all_undet) / row.n_samples;
        row.se_all_undetected = se(row.frac_all_undetected, row.n_samples);
        out.push_back(row);
    }
    return out;
}

}  // namespace distilkit
