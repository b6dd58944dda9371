// distilkit: distillability classification, sweeps, searches, and surveys
// for bipartite quantum states.  All commands are seeded and reproducible;
// results are emitted as CSV on stdout (or --out), human notes on stderr.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "distilkit/criteria.hpp"
#include "distilkit/families.hpp"
#include "distilkit/peasant.hpp"
#include "distilkit/protocols.hpp"
#include "distilkit/rng.hpp"
#include "distilkit/volume.hpp"

using namespace distilkit;
using nlohmann::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 12345;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("DISTILKIT_SEED"))
        return std::strtoull(env, nullptr, 10);
    return kDefaultSeed;
}

std::string g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// output selector: --out path or stdout
struct Output {
    std::ofstream file;
    std::ostream* os = &std::cout;
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file.open(path, std::ios::trunc);
            if (!file.good())
                throw std::runtime_error("cannot write output file " + path);
            os = &file;
        }
    }
    std::ostream& stream() { return *os; }
};

struct FamilyFlags {
    std::string family;
    int d = 3;
    int m = 3;
    double beta = 0.0, alpha = 0.0, epsilon = 0.0, delta = 0.0;

    void attach(CLI::App* cmd, bool family_required = true) {
        auto* f = cmd->add_option("--family", family,
                                  "werner|isotropic|uuvvf|watrous|rainbow");
        if (family_required) f->required();
        cmd->add_option("--d", d, "local dimension d");
        cmd->add_option("--m", m, "smaller local dimension (rainbow)");
        cmd->add_option("--beta", beta, "werner parameter");
        cmd->add_option("--alpha", alpha, "isotropic parameter");
        cmd->add_option("--epsilon", epsilon, "two-pair family parameter");
        cmd->add_option("--delta", delta, "two-pair family parameter");
    }

    FamilyState build() const {
        if (family == "werner") return werner(d, beta);
        if (family == "isotropic") return isotropic(d, alpha);
        if (family == "uuvvf") return uuvvf(d, epsilon, delta);
        if (family == "watrous") return watrous(d, epsilon);
        if (family == "rainbow") return rainbow(m, d, epsilon, delta);
        throw std::invalid_argument("unknown family: " + family);
    }

    std::string echo() const {
        std::ostringstream ss;
        ss << "family=" << family << " d=" << d;
        if (family == "rainbow") ss << " m=" << m;
        if (family == "werner") ss << " beta=" << beta;
        if (family == "isotropic") ss << " alpha=" << alpha;
        if (family == "uuvvf" || family == "rainbow")
            ss << " epsilon=" << epsilon << " delta=" << delta;
        if (family == "watrous") ss << " epsilon=" << epsilon;
        return ss.str();
    }
};

RegionVerdict classify_family(const FamilyFlags& f) {
    if (f.family == "werner") {
        RegionVerdict v;
        const double margin = 1.0 + 2.0 * f.beta;
        v.certificates.emplace_back("one_dist_margin", margin);
        if (f.beta >= -1.0 / f.d - 1e-12)
            v.label = RegionLabel::Separable;
        else if (margin < -1e-12)
            v.label = RegionLabel::OneDistillable;
        else
            v.label = RegionLabel::Unknown;  // conjectured undistillable
        return v;
    }
    if (f.family == "isotropic") {
        RegionVerdict v;
        const int k = isotropic_schmidt_number(f.d, f.alpha);
        v.certificates.emplace_back("schmidt_number", double(k));
        v.label = (k == 1) ? RegionLabel::Separable
                           : RegionLabel::OneDistillable;
        return v;
    }
    if (f.family == "uuvvf") return uuvvf_region(f.d, f.epsilon, f.delta);
    if (f.family == "watrous")
        return uuvvf_region(f.d, f.epsilon, watrous_delta(f.d, f.epsilon));
    if (f.family == "rainbow")
        return rainbow_region(f.m, f.d, f.epsilon, f.delta);
    throw std::invalid_argument("unknown family: " + f.family);
}

int run_classify(const FamilyFlags& f, const std::string& out_path,
                 std::uint64_t seed) {
    std::cerr << "classify " << f.echo() << " seed=" << seed << "\n";
    if (f.family != "werner" && f.family != "isotropic")
        (void)f.build();  // validate parameters, reporting the inequality
    RegionVerdict v = classify_family(f);
    Output out(out_path);
    out.stream() << "field,value\n";
    out.stream() << "label," << to_string(v.label) << "\n";
    for (const auto& [name, value] : v.certificates)
        out.stream() << name << "," << g17(value) << "\n";
    std::cerr << "label: " << to_string(v.label) << "\n";
    return 0;
}

int run_region_sweep(const FamilyFlags& f, double grid,
                     const std::string& line, const std::string& out_path) {
    Output out(out_path);
    if (f.family == "uuvvf") {
        std::cerr << "region-sweep family=uuvvf d=" << f.d << " grid=" << grid
                  << "\n";
        out.stream() << "epsilon,delta,label\n";
        const int n = static_cast<int>(std::llround(0.5 / grid));
        for (int ie = -n; ie <= n; ++ie)
            for (int id = -n; id <= n; ++id) {
                const double eps = ie * grid, delta = id * grid;
                auto iq = uuvvf_inequalities(f.d, eps, delta);
                if (iq[0] < -kBoundaryTol || iq[1] < -kBoundaryTol ||
                    iq[2] < -kBoundaryTol)
                    continue;
                out.stream() << g17(eps) << "," << g17(delta) << ","
                             << to_string(uuvvf_region(f.d, eps, delta).label)
                             << "\n";
            }
        return 0;
    }
    if (f.family == "rainbow") {
        if (line != "top")
            throw std::invalid_argument("region-sweep rainbow: --line must be 'top'");
        const double step = (grid == 0.05) ? 0.005 : grid;  // finer default
        std::cerr << "region-sweep family=rainbow m=" << f.m << " d=" << f.d
                  << " line=top step=" << step << "\n";
        out.stream() << "epsilon,delta,label\n";
        const int md = f.m * f.d;
        for (double eps = -0.3; eps <= 0.125 + 1e-12; eps += step) {
            // the tight positivity boundary (symmetric on the smaller pair,
            // antisymmetric on the larger)
            const double delta = 1.0 - 1.0 / md + eps * (f.m + f.d) / md +
                                 1.0 / f.d - 1.0 / f.m;
            auto iq = rainbow_inequalities(f.m, f.d, eps, delta);
            bool ok = true;
            for (double v : iq) ok = ok && v >= -kBoundaryTol;
            if (!ok) continue;
            out.stream() << g17(eps) << "," << g17(delta) << ","
                         << to_string(
                                rainbow_region(f.m, f.d, eps, delta).label)
                         << "\n";
        }
        return 0;
    }
    throw std::invalid_argument("region-sweep: family must be uuvvf or rainbow");
}

int run_peasant(const FamilyFlags& f, int n_copies, int tests, int opt_steps,
                std::uint64_t seed, const std::string& sampler, int grid_n,
                bool compose, const std::string& out_path) {
    FamilyState s = f.build();
    SearchConfig cfg;
    cfg.n_tests = tests;
    cfg.opt_steps = opt_steps;
    cfg.seed = seed;
    if (sampler == "grid") {
        cfg.sampler = SamplerKind::Grid;
        cfg.grid_n = grid_n;
    } else if (sampler != "haar") {
        throw std::invalid_argument("peasant: --sampler must be haar or grid");
    }
    std::cerr << "peasant " << f.echo() << " n-copies=" << n_copies
              << " tests=" << tests << " opt-steps=" << opt_steps
              << " sampler=" << sampler << " compose=" << compose
              << " seed=" << seed << "\n";
    SearchOutcome o = (compose && n_copies == 2)
                          ? two_copy_protocol_search(s, cfg)
                          : n_copy_search(s, n_copies, cfg);
    Output out(out_path);
    out.stream() << "detected,best_value,first_hit,tests_run\n";
    out.stream() << (o.detected ? "1" : "0") << "," << g17(o.best_value) << ",";
    if (o.first_hit_index) out.stream() << *o.first_hit_index;
    out.stream() << "," << o.tests_run << "\n";
    std::cerr << (o.detected ? "detected" : "not detected")
              << " best_value=" << g17(o.best_value) << "\n";
    return 0;
}

int run_protocol(const FamilyFlags& f, const std::string& out_path) {
    FamilyState s = f.build();
    std::cerr << "protocol " << f.echo() << "\n";
    ProtocolTrace t = iterate_protocol(s);
    Output out(out_path);
    out.stream() << "step,epsilon,delta\n";
    for (std::size_t i = 0; i < t.steps.size(); ++i)
        out.stream() << i << "," << g17(t.steps[i].first) << ","
                     << g17(t.steps[i].second) << "\n";
    if (t.verdict == ProtocolVerdict::DistillableAfter)
        std::cerr << "verdict: DistillableAfter " << t.distillable_after
                  << " (recursion dimension " << t.dim << ")\n";
    else
        std::cerr << "verdict: Inconclusive after " << t.steps.size() - 1
                  << " iterations\n";
    return 0;
}

VolumeConfig volume_config_from_json(const std::string& path) {
    std::ifstream in(path);
    if (!in.good())
        throw std::runtime_error("volume: cannot read config " + path);
    json j = json::parse(in);
    VolumeConfig cfg;
    cfg.dims = j.at("dims").get<std::vector<int>>();
    cfg.samples_per_dim = j.value("samples_per_dim", 2000);
    cfg.master_seed = j.value("master_seed", kDefaultSeed);
    cfg.output_path = j.value("output_path", std::string());
    cfg.n_workers = j.value("n_workers", 1);
    if (j.contains("search")) {
        const json& s = j["search"];
        cfg.search.n_tests = s.value("n_tests", 200);
        cfg.search.opt_steps = s.value("opt_steps", 0);
        cfg.search.tau = s.value("tau", -1e-9);
        cfg.search.seed = s.value("seed", std::uint64_t{0});
        if (s.value("sampler", std::string("haar_columns")) == "grid")
            cfg.search.sampler = SamplerKind::Grid;
        cfg.search.grid_n = s.value("grid_n", 1);
    } else {
        cfg.search.n_tests = 200;
    }
    return cfg;
}

void print_summary(const std::vector<VolumeRecord>& records, Output& out) {
    out.stream() << "d,n_samples,frac_npt,se_npt,frac_npt_undetected,"
                    "se_npt_undetected,frac_all_undetected,se_all_undetected,"
                    "frac_first_test,se_first_test\n";
    for (const VolumeSummaryRow& r : summarize(records)) {
        out.stream() << r.d << "," << r.n_samples << "," << g17(r.frac_npt)
                     << "," << g17(r.se_npt) << ","
                     << g17(r.frac_npt_undetected) << ","
                     << g17(r.se_npt_undetected) << ","
                     << g17(r.frac_all_undetected) << ","
                     << g17(r.se_all_undetected) << ","
                     << g17(r.frac_first_test) << "," << g17(r.se_first_test)
                     << "\n";
    }
}

int run_volume_cmd(const std::string& config_path, std::vector<int> dims,
                   int samples, int tests, int opt_steps, std::uint64_t seed,
                   const std::string& records_path,
                   const std::string& out_path) {
    std::vector<VolumeRecord> records;
    if (!config_path.empty()) {
        VolumeConfig cfg = volume_config_from_json(config_path);
        std::cerr << "volume config=" << config_path
                  << " master_seed=" << cfg.master_seed << "\n";
        records = run_volume(cfg);
    } else {
        if (dims.empty()) dims = {3, 4, 5, 6, 7};
        std::cerr << "volume dims=";
        for (std::size_t i = 0; i < dims.size(); ++i)
            std::cerr << (i ? "," : "") << dims[i];
        std::cerr << " samples=" << samples << " tests=" << tests
                  << " opt-steps=" << (opt_steps < 0 ? "50*d" : std::to_string(opt_steps))
                  << " seed=" << seed << "\n";
        for (int d : dims) {
            VolumeConfig cfg;
            cfg.dims = {d};
            cfg.samples_per_dim = samples;
            cfg.master_seed = seed;
            cfg.output_path = records_path;
            cfg.search.n_tests = tests;
            cfg.search.opt_steps = opt_steps < 0 ? 50 * d : opt_steps;
            auto part = run_volume(cfg);
            records.insert(records.end(), part.begin(), part.end());
        }
    }
    Output out(out_path);
    print_summary(records, out);
    return 0;
}

int run_curve(int d, int samples, int tests, std::uint64_t seed,
              const std::string& out_path) {
    std::cerr << "curve d=" << d << " samples=" << samples
              << " tests=" << tests << " seed=" << seed << "\n";
    std::vector<DenseOperator> npt;
    std::uint64_t draw = 0;
    while (static_cast<int>(npt.size()) < samples) {
        Rng rng = Rng::substream(seed, draw++);
        DenseOperator rho = random_density(d, d, rng);
        if (!is_ppt(rho)) npt.push_back(std::move(rho));
    }
    SearchConfig cfg;
    cfg.n_tests = tests;
    cfg.seed = seed;
    std::vector<double> curve = detection_curve(npt, cfg);
    Output out(out_path);
    out.stream() << "test_index,cumulative_fraction\n";
    for (int t = 0; t < tests; ++t)
        out.stream() << t + 1 << "," << g17(curve[t]) << "\n";
    std::cerr << "first-test fraction: " << g17(curve.front()) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"distilkit: distillability surveys of bipartite states"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed_flag;
    std::string out_path;
    app.add_option("--seed", seed_flag,
                   "rng seed (default: DISTILKIT_SEED env, then 12345)");
    app.add_option("--out", out_path, "write CSV here instead of stdout");

    FamilyFlags fam;
    double grid = 0.05;
    std::string line = "top";
    int n_copies = 1, tests = 1000, opt_steps = 0, grid_n = 2;
    std::string sampler = "haar";
    bool compose = false;
    std::string config_path, records_path, dims_csv;
    int vol_samples = 2000, vol_tests = 200, vol_opt = -1;
    int curve_d = 3, curve_samples = 2000, curve_tests = 20;

    CLI::App* c_classify = app.add_subcommand("classify", "label one state");
    fam.attach(c_classify);

    CLI::App* c_sweep =
        app.add_subcommand("region-sweep", "labels over a parameter region");
    fam.attach(c_sweep);
    c_sweep->add_option("--grid", grid, "grid step (default 0.05)");
    c_sweep->add_option("--line", line, "rainbow sweep line (top)");

    CLI::App* c_peasant =
        app.add_subcommand("peasant", "randomized distillability search");
    fam.attach(c_peasant);
    c_peasant->add_option("--n-copies", n_copies, "copies (1 or 2)");
    c_peasant->add_option("--tests", tests, "number of random tests");
    c_peasant->add_option("--opt-steps", opt_steps, "local optimization steps");
    c_peasant->add_option("--sampler", sampler, "haar|grid");
    c_peasant->add_option("--grid-n", grid_n, "grid resolution N");
    c_peasant->add_flag("--compose", compose,
                        "two-copy search through the recursion projection");

    CLI::App* c_protocol =
        app.add_subcommand("protocol", "iterate the recursion maps");
    fam.attach(c_protocol);

    CLI::App* c_volume =
        app.add_subcommand("volume", "Monte Carlo volume survey");
    c_volume->add_option("--config", config_path, "JSON config file");
    c_volume->add_option("--dims", dims_csv, "comma-separated d list");
    c_volume->add_option("--samples", vol_samples, "samples per d");
    c_volume->add_option("--tests", vol_tests, "random tests per sample");
    c_volume->add_option("--opt-steps", vol_opt,
                         "optimization steps (default 50*d)");
    c_volume->add_option("--records", records_path,
                         "per-sample record CSV (enables resume)");

    CLI::App* c_curve =
        app.add_subcommand("curve", "detection probability by test index");
    c_curve->add_option("--d", curve_d, "local dimension");
    c_curve->add_option("--samples", curve_samples, "number of NPT states");
    c_curve->add_option("--tests", curve_tests, "tests per state");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::uint64_t seed = resolve_seed(seed_flag);
    try {
        if (c_classify->parsed()) return run_classify(fam, out_path, seed);
        if (c_sweep->parsed())
            return run_region_sweep(fam, grid, line, out_path);
        if (c_peasant->parsed())
            return run_peasant(fam, n_copies, tests, opt_steps, seed, sampler,
                               grid_n, compose, out_path);
        if (c_protocol->parsed()) return run_protocol(fam, out_path);
        if (c_volume->parsed()) {
            std::vector<int> dims;
            if (!dims_csv.empty()) {
                std::stringstream ss(dims_csv);
                std::string tok;
                while (std::getline(ss, tok, ','))
                    dims.push_back(std::stoi(tok));
            }
            return run_volume_cmd(config_path, dims, vol_samples, vol_tests,
                                  vol_opt, seed, records_path, out_path);
        }
        if (c_curve->parsed())
            return run_curve(curve_d, curve_samples, curve_tests, seed,
                             out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
