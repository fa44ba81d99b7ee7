// trl: command-line front end. Every command writes CSV (or JSON for verify)
// to --out or stdout; experiments prefix one '#' comment line with the version,
// the echoed configuration and a timestamp, and write a JSON summary next to
// the CSV. Exit codes: 0 ok, 1 invariant failure, 2 budget exceeded,
// 3 numerical nonconvergence, 64 invalid arguments.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "trl/energy.hpp"
#include "trl/error.hpp"
#include "trl/estimator.hpp"
#include "trl/kernel.hpp"
#include "trl/lattice.hpp"
#include "trl/propagator.hpp"
#include "trl/verify.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

enum Exit { kOk = 0, kInvariant = 1, kBudget = 2, kNonconvergence = 3, kUsage = 64 };

struct Config {
    int d = 2;
    trl::i64 lambda = -1;
    std::string N = "";
    double p = 4;
    int n = 2;
    std::string Q = "";
    int s = 2;
    std::string model = "constant";
    std::uint64_t seed = 20240601;
    std::size_t samples = 0;  // 0: command default
    std::size_t x_samples = 32;
    std::string piece = "K";
    std::string cache_dir;
    std::string out;
    std::string summary;
    double budget_ops = 4e9;
    bool quick = false;
    bool dump = false;
    std::string suite = "all";
    std::string inject_fault;
    std::string kind;
};

trl::i64 parse_int(const std::string& s) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    trl::require(pos == s.size() && !s.empty(), trl::ErrorCode::InvalidArgument, "not an integer: '" + s + "'");
    return v;
}

// "a..b" or "a,b,c" or "a"
std::vector<trl::i64> parse_N_list(const std::string& s) {
    trl::require(!s.empty(), trl::ErrorCode::InvalidArgument, "--N is required");
    std::vector<trl::i64> out;
    if (const auto dots = s.find(".."); dots != std::string::npos) {
        const trl::i64 a = parse_int(s.substr(0, dots)), b = parse_int(s.substr(dots + 2));
        trl::require(1 <= a && a <= b, trl::ErrorCode::InvalidArgument, "bad range " + s);
        for (trl::i64 x = a; x <= b; ++x) out.push_back(x);
        return out;
    }
    std::stringstream ss(s);
    for (std::string tok; std::getline(ss, tok, ',');) {
        out.push_back(parse_int(tok));
        trl::require(out.back() >= 1, trl::ErrorCode::InvalidArgument, "N must be >= 1");
    }
    return out;
}

// "N,2N,4N,100": multiples of N or plain integers
std::vector<trl::i64> parse_Q_list(const std::string& s, trl::i64 N) {
    if (s.empty()) return {N, 2 * N, 4 * N};
    std::vector<trl::i64> out;
    std::stringstream ss(s);
    for (std::string tok; std::getline(ss, tok, ',');) {
        if (!tok.empty() && tok.back() == 'N') {
            const std::string c = tok.substr(0, tok.size() - 1);
            out.push_back((c.empty() ? 1 : parse_int(c)) * N);
        } else {
            out.push_back(parse_int(tok));
        }
    }
    return out;
}

std::string timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string config_echo(const Config& c) {
    std::ostringstream os;
    os << "kind=" << c.kind << " d=" << c.d << " N=" << c.N << " p=" << c.p << " n=" << c.n << " Q=" << c.Q
       << " s=" << c.s << " model=" << c.model << " seed=" << c.seed << " samples=" << c.samples
       << " budget_ops=" << c.budget_ops << (c.quick ? " quick" : "");
    return os.str();
}

// Output sink: the file named by --out, or stdout.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            trl::require(static_cast<bool>(file_), trl::ErrorCode::Io, "cannot write " + path);
        }
    }
    std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

void write_summary(const Config& c, const nlohmann::json& j) {
    std::string path = c.summary;
    if (path.empty() && !c.out.empty()) path = c.out + ".json";
    if (path.empty()) {
        std::cerr << j.dump(2) << '\n';
        return;
    }
    std::ofstream f(path);
    trl::require(static_cast<bool>(f), trl::ErrorCode::Io, "cannot write " + path);
    f << j.dump(2) << '\n';
}

trl::EnumerationLimits enum_limits(const Config& c) {
    trl::EnumerationLimits lim;
    lim.max_ops = c.budget_ops;
    return lim;
}

trl::sparse::ConvLimits conv_limits(const Config& c) {
    trl::sparse::ConvLimits lim;
    lim.max_ops = c.budget_ops;
    return lim;
}

int cmd_shell(const Config& c) {
    trl::require(c.lambda >= 0, trl::ErrorCode::InvalidArgument, "--lambda is required");
    trl::ShellCache cache(c.cache_dir, enum_limits(c));
    const trl::Shell shell = cache.get(c.d, c.lambda);
    Sink sink(c.out);
    sink.os() << "d,lambda,count\n" << c.d << ',' << c.lambda << ',' << shell.count() << '\n';
    if (c.dump) {
        for (std::size_t i = 0; i < shell.count(); ++i) {
            const auto k = shell.point(i);
            for (std::size_t j = 0; j < k.size(); ++j) sink.os() << (j ? "," : "") << k[j];
            sink.os() << '\n';
        }
    }
    return kOk;
}

int cmd_verify(const Config& c) {
    trl::VerifyOptions opt;
    opt.quick = c.quick;
    opt.seed = c.seed;
    opt.inject_fault = c.inject_fault;
    const auto verdicts = trl::run_verify(c.suite, opt);
    Sink sink(c.out);
    sink.os() << trl::verdicts_json(verdicts) << '\n';
    for (const auto& v : verdicts) {
        if (!v.passed) {
            std::cerr << "FAIL " << v.suite << '/' << v.invariant << ": " << v.counterexample << '\n';
            return kInvariant;
        }
    }
    return kOk;
}

int experiment_energy(const Config& c, std::ostream& os) {
    trl::ShellCache cache(c.cache_dir, enum_limits(c));
    const auto rep = trl::energy_scaling_experiment(c.d, c.n, parse_N_list(c.N), &cache, conv_limits(c));
    trl::write_energy_csv(os, rep);
    nlohmann::json j{{"d", rep.d}, {"n", rep.n}, {"target_exponent", rep.target_exponent}, {"slope", rep.slope}};
    bool ok = true;
    for (const auto& r : rep.rows) {
        j["rows"].push_back({{"N", r.N}, {"count", r.count}, {"exact", r.exact}, {"ratio", r.ratio}, {"cs_ratio", r.cs_ratio}});
        if (r.exact && r.energy_exact < r.cs_floor) ok = false;
    }
    j["cauchy_schwarz_ok"] = ok;
    write_summary(c, j);
    return ok ? kOk : kInvariant;
}

int experiment_restriction(const Config& c, std::ostream& os) {
    trl::ShellCache cache(c.cache_dir, enum_limits(c));
    trl::RestrictionOptions opt;
    opt.seed = c.seed;
    opt.cache = &cache;
    opt.limits = conv_limits(c);
    if (c.samples) opt.samples = c.samples;
    if (c.quick) opt.samples = std::min<std::size_t>(opt.samples, 4000);
    const auto rep = trl::restriction_scaling_experiment(c.d, c.p, parse_N_list(c.N), trl::parse_model(c.model), opt);
    trl::write_restriction_csv(os, rep);
    write_summary(c, nlohmann::json::parse(trl::restriction_summary_json(rep)));
    return kOk;
}

trl::KernelPiece parse_piece(const std::string& s) {
    for (auto p : {trl::KernelPiece::K, trl::KernelPiece::K0, trl::KernelPiece::KQ, trl::KernelPiece::KQs, trl::KernelPiece::Kerr})
        if (trl::to_string(p) == s) return p;
    throw trl::Error(trl::ErrorCode::InvalidArgument, "unknown kernel piece '" + s + "'");
}

int experiment_kernel_scan(const Config& c, std::ostream& os) {
    const auto Ns = parse_N_list(c.N);
    trl::ShellCache cache(c.cache_dir, enum_limits(c));
    const auto piece = parse_piece(c.piece);
    std::vector<trl::ScanRow> rows;
    nlohmann::json j{{"d", c.d}, {"piece", c.piece}};
    for (trl::i64 N : Ns) {
        const auto spec = trl::make_kernel_spec(c.d, N, &cache);
        trl::i64 Q = 0;
        if (piece == trl::KernelPiece::KQ) Q = parse_Q_list(c.Q, N).front();
        if (piece == trl::KernelPiece::KQs) Q = c.Q.empty() ? 2 : parse_int(c.Q);
        const auto part = trl::kernel_sup_scan(spec, piece, Q, c.s, c.samples ? c.samples : (c.quick ? 16 : 64));
        double worst = 0;
        for (const auto& r : part) worst = std::max(worst, r.ratio);
        j["max_ratio"][std::to_string(N)] = worst;
        rows.insert(rows.end(), part.begin(), part.end());
    }
    trl::write_scan_csv(os, rows);
    write_summary(c, j);
    return kOk;
}

int experiment_dispersive(const Config& c, std::ostream& os) {
    nlohmann::json j;
    bool ok = true;
    bool header = true;
    for (trl::i64 N : parse_N_list(c.N)) {
        const trl::i64 T = c.samples ? static_cast<trl::i64>(c.samples) : (c.quick ? 128 : 1024);
        const auto rep = trl::dispersive_ratio_scan(N, T, static_cast<trl::i64>(c.x_samples), true);
        std::ostringstream part;
        trl::write_dispersive_csv(part, rep);
        std::string body = part.str();
        if (!header) body = body.substr(body.find('\n') + 1);
        header = false;
        os << body;
        j["N"][std::to_string(N)] = {{"max_ratio", rep.max_ratio},       {"max_ratio_t", rep.max_ratio_t},
                                     {"max_ratio_x", rep.max_ratio_x},   {"prime_arc_max", rep.prime_arc_max},
                                     {"prime_arc_q", rep.prime_arc_q},   {"histogram", rep.histogram}};
        ok = ok && rep.all_finite_positive;
    }
    write_summary(c, j);
    return ok ? kOk : kInvariant;
}

int experiment_fourier(const Config& c, std::ostream& os) {
    const auto Ns = parse_N_list(c.N);
    trl::ShellCache cache(c.cache_dir, enum_limits(c));
    nlohmann::json j;
    bool ok = true;
    bool header = true;
    for (trl::i64 N : Ns) {
        const auto spec = trl::make_kernel_spec(c.d, N, &cache);
        const auto rows = trl::fourier_bounds_experiment(spec, parse_Q_list(c.Q, N), c.samples ? c.samples : (c.quick ? 2000 : 20000), c.seed);
        std::ostringstream part;
        trl::write_fourier_csv(part, spec, rows);
        std::string body = part.str();
        if (!header) body = body.substr(body.find('\n') + 1);
        header = false;
        os << body;
        double lo = INFINITY, hi = 0, kqs = 0;
        for (const auto& r : rows) {
            if (r.piece == trl::KernelPiece::Kerr) {
                lo = std::min(lo, r.scaled);
                hi = std::max(hi, r.scaled);
            } else {
                kqs = std::max(kqs, r.scaled);
                ok = ok && r.scaled <= 1.0 + 1e-12;
            }
        }
        j["N"][std::to_string(N)] = {{"kerr_scaled_variation", hi / lo}, {"kqs_max_over_ceiling", kqs}};
    }
    write_summary(c, j);
    return ok ? kOk : kInvariant;
}

int cmd_experiment(const Config& c) {
    Sink sink(c.out);
    std::ostringstream body;
    int code = kOk;
    if (c.kind == "energy-scaling") code = experiment_energy(c, body);
    else if (c.kind == "restriction-scaling") code = experiment_restriction(c, body);
    else if (c.kind == "kernel-scan") code = experiment_kernel_scan(c, body);
    else if (c.kind == "dispersive-scan") code = experiment_dispersive(c, body);
    else if (c.kind == "fourier-bounds") code = experiment_fourier(c, body);
    sink.os() << "# trl " << kVersion << " | " << config_echo(c) << " | " << timestamp() << '\n' << body.str();
    return code;
}

int exit_code(trl::ErrorCode code) {
    switch (code) {
        case trl::ErrorCode::ScaleExceeded: return kBudget;
        case trl::ErrorCode::QuadratureNonConvergence:
        case trl::ErrorCode::NyquistViolation: return kNonconvergence;
        case trl::ErrorCode::InvalidArgument:
        case trl::ErrorCode::DimensionTooSmall:
        case trl::ErrorCode::EmptyShell:
        case trl::ErrorCode::EmptyArcSet:
        case trl::ErrorCode::NotCoprime:
        case trl::ErrorCode::EvenModulus: return kUsage;
        default: return kInvariant;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for eigenfunctions on the square torus"};
    app.set_version_flag("--version", kVersion);
    app.set_config("--config", "", "flat key=value file; command-line flags override it");
    app.require_subcommand(1);

    Config c;
    c.cache_dir = trl::default_cache_dir().string();
    app.add_option("--d", c.d, "dimension")->check(CLI::Range(1, trl::kMaxDimension));
    app.add_option("--lambda", c.lambda, "squared radius")->check(CLI::NonNegativeNumber);
    app.add_option("--N", c.N, "radius: single value, list a,b,c or range a..b")
        ->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::Join);
    app.add_option("--p", c.p, "Lebesgue exponent")->check(CLI::Range(1.0, 1e6));
    app.add_option("--n", c.n, "fold count for the additive energy")->check(CLI::Range(1, 16));
    app.add_option("--Q", c.Q, "arc parameter(s), e.g. N,2N,4N")
        ->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::Join);
    app.add_option("--s", c.s, "dyadic level")->check(CLI::Range(0, 62));
    app.add_option("--model", c.model, "eigenfunction model")->check(CLI::IsMember({"constant", "rademacher", "gaussian"}));
    app.add_option("--seed", c.seed, "random seed");
    app.add_option("--samples", c.samples, "sample / scan point count (0 = default)");
    app.add_option("--x-samples", c.x_samples, "x grid size for dispersive scans")->check(CLI::PositiveNumber);
    app.add_option("--piece", c.piece, "kernel piece for kernel-scan")->check(CLI::IsMember({"K", "K0", "KQ", "KQs", "Kerr"}));
    app.add_option("--cache-dir", c.cache_dir, "shell cache directory (default $TRL_CACHE_DIR or .trl_cache)");
    app.add_option("--out", c.out, "output file (default stdout)");
    app.add_option("--summary", c.summary, "JSON summary file (default <out>.json, or stderr)");
    app.add_option("--budget-ops", c.budget_ops, "operation budget for enumeration and convolution")->check(CLI::PositiveNumber);
    app.add_flag("--quick", c.quick, "reduced sizes");

    auto* shell = app.add_subcommand("shell", "count (and optionally dump) the lattice points with |k|^2 = lambda");
    shell->add_flag("--dump", c.dump, "print the points after the count row");
    auto* verify = app.add_subcommand("verify", "run invariant suites, JSON verdicts");
    verify->add_option("--suite", c.suite, "suite")->check(CLI::IsMember({"arith", "expsum", "propagator", "kernel", "energy", "estimator", "all"}));
    verify->add_option("--inject-fault", c.inject_fault, "corrupt one comparison in this suite (harness check)");
    auto* experiment = app.add_subcommand("experiment", "scaling experiments, CSV plus JSON summary");
    experiment->add_option("kind", c.kind, "experiment kind")
        ->required()
        ->check(CLI::IsMember({"energy-scaling", "restriction-scaling", "kernel-scan", "dispersive-scan", "fourier-bounds"}));
    for (auto* sub : {shell, verify, experiment}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kUsage;
    }

    try {
        if (c.budget_ops <= 0) throw trl::Error(trl::ErrorCode::InvalidArgument, "budget must be positive");
        if (shell->parsed()) return cmd_shell(c);
        if (verify->parsed()) return cmd_verify(c);
        return cmd_experiment(c);
    } catch (const trl::Error& e) {
        std::cerr << "trl: " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "trl: " << e.what() << '\n';
        return kInvariant;
    }
}
