#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "distilkit/volume.hpp"

using namespace distilkit;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

VolumeConfig small_config() {
    VolumeConfig cfg;
    cfg.dims = {3};
    cfg.samples_per_dim = 60;
    cfg.search.n_tests = 20;
    cfg.search.opt_steps = 10;
    cfg.master_seed = 2024;
    return cfg;
}

bool same_records(const std::vector<VolumeRecord>& a,
                  const std::vector<VolumeRecord>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (format_record(a[i]) != format_record(b[i])) return false;
    return true;
}

}  // namespace

TEST_CASE("volume config validation") {
    VolumeConfig cfg = small_config();
    cfg.dims = {};
    REQUIRE_THROWS_AS(run_volume(cfg), std::invalid_argument);
    cfg.dims = {1};
    REQUIRE_THROWS_AS(run_volume(cfg), std::invalid_argument);
    cfg = small_config();
    cfg.samples_per_dim = 0;
    REQUIRE_THROWS_AS(run_volume(cfg), std::invalid_argument);
}

TEST_CASE("single sample is deterministic") {
    VolumeConfig cfg = small_config();
    cfg.samples_per_dim = 1;
    auto a = run_volume(cfg);
    auto b = run_volume(cfg);
    REQUIRE(a.size() == 1);
    REQUIRE(same_records(a, b));
}

TEST_CASE("record invariants hold across dimensions") {
    VolumeConfig cfg = small_config();
    cfg.dims = {2, 3};
    cfg.samples_per_dim = 40;
    auto records = run_volume(cfg);
    REQUIRE(records.size() == 80);
    int n_ppt = 0, n_det = 0;
    for (const VolumeRecord& r : records) {
        if (r.detected) REQUIRE(r.npt);
        REQUIRE(r.detected == r.first_hit.has_value());
        if (!r.npt) {
            ++n_ppt;
            REQUIRE_FALSE(r.detected);
            REQUIRE(r.best_value >= -1e-10);  // PT minimum eigenvalue
        }
        if (r.detected) ++n_det;
    }
    REQUIRE(n_ppt > 0);   // 2x2 draws are often PPT
    REQUIRE(n_det > 0);   // NPT d=3 draws are often caught
}

TEST_CASE("csv round-trip identity") {
    VolumeConfig cfg = small_config();
    auto records = run_volume(cfg);
    const std::string path = "/tmp/distilkit_vol_roundtrip.csv";
    persist_records(records, path);
    auto loaded = load_records(path);
    REQUIRE(same_records(records, loaded));
    std::remove(path.c_str());
}

TEST_CASE("load of empty or missing file") {
    const std::string path = "/tmp/distilkit_vol_empty.csv";
    std::remove(path.c_str());
    REQUIRE(load_records(path).empty());
    std::ofstream(path).close();
    REQUIRE(load_records(path).empty());
    std::remove(path.c_str());
}

TEST_CASE("malformed row is reported with its line number") {
    const std::string path = "/tmp/distilkit_vol_bad.csv";
    {
        std::ofstream out(path);
        out << kVolumeCsvHeader << "\n";
        out << "3,0,1,0,,-0.25\n";
        out << "3,1,banana,0,,-0.25\n";
    }
    try {
        load_records(path);
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        REQUIRE(std::string(e.what()).find("line 3") != std::string::npos);
    }
    std::remove(path.c_str());
}

TEST_CASE("resume produces byte-identical output") {
    VolumeConfig cfg = small_config();
    cfg.samples_per_dim = 12;
    cfg.output_path = "/tmp/distilkit_vol_full.csv";
    std::remove(cfg.output_path.c_str());
    run_volume(cfg);
    std::string full = slurp(cfg.output_path);

    // simulate a kill after 5 records: keep header + 5 lines, then resume
    std::stringstream ss(full);
    std::string line, partial;
    for (int i = 0; i < 6 && std::getline(ss, line); ++i)
        partial += line + "\n";
    {
        std::ofstream out(cfg.output_path, std::ios::trunc);
        out << partial;
    }
    auto resumed = run_volume(cfg);
    REQUIRE(slurp(cfg.output_path) == full);
    REQUIRE(resumed.size() == 12);

    // a no-op rerun leaves the file untouched
    run_volume(cfg);
    REQUIRE(slurp(cfg.output_path) == full);
    std::remove(cfg.output_path.c_str());
}

TEST_CASE("parallel and serial runs agree") {
    VolumeConfig cfg = small_config();
    cfg.samples_per_dim = 30;
    auto serial = run_volume(cfg);
    cfg.n_workers = 8;
    auto parallel = run_volume(cfg);
    REQUIRE(same_records(serial, parallel));
}

TEST_CASE("detection is monotone in the search budget") {
    VolumeConfig small = small_config();
    small.search.opt_steps = 0;
    small.search.n_tests = 10;
    VolumeConfig large = small;
    large.search.n_tests = 40;
    auto a = run_volume(small);
    auto b = run_volume(large);
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(b[i].best_value <= a[i].best_value + 1e-15);
        if (a[i].detected) {
            REQUIRE(b[i].detected);
            REQUIRE(*b[i].first_hit == *a[i].first_hit);
        }
    }
}

TEST_CASE("summarize") {
    REQUIRE_THROWS_AS(summarize({}), std::invalid_argument);

    // synthetic all-detected records
    std::vector<VolumeRecord> synth;
    for (int i = 0; i < 10; ++i)
        synth.push_back(VolumeRecord{3, i, true, true, i % 3 + 1, -0.1});
    auto rows = summarize(synth);
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].frac_npt == 1.0);
    REQUIRE(rows[0].frac_npt_undetected == 0.0);
    REQUIRE(rows[0].frac_all_undetected == 0.0);

    // real records: counting identities
    VolumeConfig cfg = small_config();
    cfg.dims = {2, 3};
    cfg.samples_per_dim = 40;
    auto records = run_volume(cfg);
    for (const VolumeSummaryRow& row : summarize(records)) {
        REQUIRE(row.n_samples == 40);
        REQUIRE(row.frac_npt >= 0.0);
        REQUIRE(row.frac_npt <= 1.0);
        REQUIRE(row.frac_all_undetected >=
                row.frac_npt_undetected * row.frac_npt - 1e-12);
        REQUIRE(row.se_npt >= 0.0);
    }
}
