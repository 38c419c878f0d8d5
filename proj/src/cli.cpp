#include "rankone/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "rankone/ami.hpp"
#include "rankone/bench.hpp"
#include "rankone/diagnostics.hpp"
#include "rankone/error.hpp"
#include "rankone/solvers.hpp"

namespace rankone {

namespace {

std::ofstream open_output(const std::string& path)
{
    std::ofstream f(path);
    if (!f)
        throw Error("cannot open '" + path + "' for writing");
    return f;
}

std::ifstream open_input(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw ParseError(0, "cannot open '" + path + "'");
    return f;
}

void print_vector(std::ostream& out, const Vector& v)
{
    for (Eigen::Index k = 0; k < v.size(); ++k)
        out << (k ? " " : "") << v[k];
}

void write_trace_csv(std::ostream& out, const SolverTrace& trace)
{
    out.precision(17);
    out << "iteration,f_before,f_after,fit,fitchange,cumulative_calls,seconds\n";
    for (std::size_t k = 0; k < trace.iterations.size(); ++k) {
        const auto& r = trace.iterations[k];
        out << k + 1 << ',' << r.f_before << ',' << r.f_after << ',' << r.fit << ',' << r.fitchange
            << ',' << r.cumulative_calls << ',' << r.seconds << '\n';
    }
}

struct DecomposeArgs {
    std::string input;
    std::string method = "als";
    std::uint64_t seed = 0;
    std::string init = "random";
    std::size_t max_iters = 10;
    double tol = 1e-4;
    std::string trace;
    std::string tuple_out;
};

int cmd_decompose(const DecomposeArgs& a, std::ostream& out)
{
    const Tensor t = read_tensor_file(a.input);
    SolverConfig cfg;
    cfg.method = parse_method(a.method);
    cfg.max_iterations = a.max_iters;
    cfg.fitchange_tol = a.tol;
    if (a.init == "hosvd")
        cfg.init = InitStrategy::hosvd();
    else if (a.init == "random")
        cfg.init = InitStrategy::random(a.seed);
    else
        throw UnsupportedConfiguration("unknown init '" + a.init + "'");

    const Rank1Result r = solve(t, cfg);
    const CriticalityReport crit = criticality(t, r.axes);
    double seconds = 0.0;
    for (const auto& it : r.trace.iterations)
        seconds += it.seconds;

    out.precision(17);
    out << "method = " << to_string(cfg.method) << '\n';
    out << "lambda = " << r.lambda << '\n';
    out << "fit = " << r.fit << '\n';
    out << "rel_error = " << r.residual / t.norm() << '\n';
    out << "iterations = " << r.iterations << '\n';
    out << "opt_calls = " << r.optimization_calls << '\n';
    out << "converged_by = " << to_string(r.converged_by) << '\n';
    out << "max_singular_residual = " << crit.max_residual << '\n';
    for (std::size_t i = 0; i < r.axes.order(); ++i) {
        out << "axis." << i + 1 << " = ";
        print_vector(out, r.axes[i]);
        out << '\n';
    }
    out << "wall_seconds = " << seconds << '\n';

    if (!a.trace.empty()) {
        auto f = open_output(a.trace);
        write_trace_csv(f, r.trace);
    }
    if (!a.tuple_out.empty()) {
        auto f = open_output(a.tuple_out);
        write_tuple_text(f, r.axes.vectors());
    }
    return exit_ok;
}

struct VerifyArgs {
    std::string input;
    std::string tuple;
    int level = 1;
    double tol = 1e-6;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err)
{
    const Tensor t = read_tensor_file(a.input);
    VectorTuple v = read_tuple_file(a.tuple);
    if (v.size() != t.order())
        throw DimensionError("tuple has " + std::to_string(v.size()) + " vectors, tensor has " +
                             std::to_string(t.order()) + " modes");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (static_cast<std::size_t>(v[i].size()) != t.dim(i))
            throw DimensionError("vector " + std::to_string(i + 1) + " has length " +
                                 std::to_string(v[i].size()) + ", mode dimension is " +
                                 std::to_string(t.dim(i)));
        if (std::abs(v[i].norm() - 1.0) > 1e-12)
            err << "warning: vector " << i + 1 << " is not unit length; normalizing\n";
    }
    const UnitTuple u(std::move(v));
    const SemiMaxLevel level = a.level == 2 ? SemiMaxLevel::two_semi : SemiMaxLevel::one_semi;

    const SemiMaxReport semi = check_semi_max(t, u, level, a.tol);
    const CriticalityReport crit = criticality(t, u);
    const bool critical = crit.max_residual <= a.tol * t.norm();
    write_report(out, crit);
    write_report(out, semi);
    const bool pass = critical && semi.all_passed();
    out << "verify.critical = " << (critical ? "true" : "false") << '\n';
    out << "verify.pass = " << (pass ? "true" : "false") << '\n';
    return pass ? exit_ok : exit_verification_failed;
}

struct BenchArgs {
    std::vector<std::size_t> sizes{4, 8, 16, 32, 64};
    std::vector<std::string> datasets{"uniform8", "symmetric8"};
    std::vector<std::string> methods{"als", "asvd", "mals", "masvd"};
    std::size_t order = 3;
    std::size_t runs = 10;
    std::string out = "-";
    std::size_t parallel = 1;
    std::uint64_t seed = 0;
    std::size_t max_iters = 10;
    double tol = 1e-4;
    std::string volume_file;
    std::vector<std::size_t> volume_dims;
    int volume_bits = 16;
};

// "uniform8" -> (random_uniform, 8); a bare kind leaves the depth unset.
std::pair<DatasetSpec, bool> parse_dataset(const std::string& token)
{
    std::size_t cut = token.size();
    while (cut > 0 && std::isdigit(static_cast<unsigned char>(token[cut - 1])))
        --cut;
    DatasetSpec spec;
    spec.kind = parse_dataset_kind(token.substr(0, cut));
    const bool has_bits = cut < token.size();
    if (has_bits)
        spec.bits = std::stoi(token.substr(cut));
    return {spec, has_bits};
}

std::vector<DatasetSpec> expand_specs(const BenchArgs& a)
{
    std::vector<DatasetSpec> specs;
    for (const auto& token : a.datasets) {
        const auto [base, has_bits] = parse_dataset(token);
        for (std::size_t size : a.sizes) {
            DatasetSpec spec = base;
            spec.seed = a.seed;
            if (spec.kind == DatasetSpec::Kind::volume_file) {
                if (a.volume_file.empty() || a.volume_dims.empty())
                    throw ContractViolation("the volume dataset needs --volume-file and --volume-dims");
                if (!has_bits)
                    spec.bits = a.volume_bits;
                spec.path = a.volume_file;
                spec.dims = a.volume_dims;
                std::size_t from = a.volume_dims.front();
                while (from > size && from % 2 == 0) {
                    from /= 2;
                    ++spec.halvings;
                }
                if (from != size)
                    throw ContractViolation("size " + std::to_string(size) +
                                            " is not reachable by halving the volume dimensions");
            } else {
                spec.dims = Shape(a.order, size);
            }
            specs.push_back(std::move(spec));
        }
    }
    return specs;
}

int cmd_bench(const BenchArgs& a, std::ostream& out)
{
    const std::vector<DatasetSpec> specs = expand_specs(a);
    std::vector<Method> methods;
    for (const auto& m : a.methods)
        methods.push_back(parse_method(m));
    BenchOptions opt;
    opt.runs = a.runs;
    opt.workers = a.parallel;
    opt.config.max_iterations = a.max_iters;
    opt.config.fitchange_tol = a.tol;

    const BenchResult result = run_bench(specs, methods, opt);
    if (a.out == "-") {
        write_csv(out, result.records);
    } else {
        auto f = open_output(a.out);
        write_csv(f, result.records);
        write_summary(out, result.rows);
    }
    return exit_ok;
}

struct AmiArgs {
    std::string input;
    std::string basin;
    std::size_t sweeps = 100;
};

int cmd_ami(const AmiArgs& a, std::ostream& out)
{
    auto in = open_input(a.input);
    const BlockQuadraticForm q = read_quadratic_form(in);
    const AmiSpectrumReport r = analyze(q);
    write_report(out, r);
    if (!a.basin.empty()) {
        auto bin = open_input(a.basin);
        const Vector xi0 = read_vector(bin, q.size());
        const BasinTrajectory b = basin_experiment(q, xi0, a.sweeps);
        const auto old = out.precision(17);
        for (std::size_t k = 0; k < b.norms.size(); ++k)
            out << "basin." << k << " = " << b.norms[k] << ' ' << b.f_values[k] << '\n';
        out << "basin.sweeps = " << b.norms.size() - 1 << '\n';
        out << "basin.converged_to_zero = " << (b.converged_to_zero ? "true" : "false") << '\n';
        out << "basin.f_nondecreasing = " << (b.f_nondecreasing ? "true" : "false") << '\n';
        out.precision(old);
    }
    return r.theorem_holds.value_or(true) ? exit_ok : exit_verification_failed;
}

} // namespace

VectorTuple read_tuple_text(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&](const std::string& what) {
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                return;
        }
        throw ParseError(line_no + 1, "missing " + what);
    };

    next_line("order line");
    std::size_t d = 0;
    {
        std::istringstream ls(line);
        long long v = 0;
        std::string extra;
        if (!(ls >> v) || v <= 0 || (ls >> extra))
            throw ParseError(line_no, "expected a positive number of vectors");
        d = static_cast<std::size_t>(v);
    }
    VectorTuple out;
    for (std::size_t i = 0; i < d; ++i) {
        next_line("vector " + std::to_string(i + 1));
        std::istringstream ls(line);
        std::vector<double> values;
        std::string tok;
        while (ls >> tok) {
            std::size_t pos = 0;
            double v = 0.0;
            try {
                v = std::stod(tok, &pos);
            } catch (const std::exception&) {
                throw ParseError(line_no, "'" + tok + "' is not a number");
            }
            if (pos != tok.size() || !std::isfinite(v))
                throw ParseError(line_no, "'" + tok + "' is not a finite number");
            values.push_back(v);
        }
        out.push_back(Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size())));
    }
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") != std::string::npos)
            throw ParseError(line_no, "unexpected content after " + std::to_string(d) + " vectors");
    }
    return out;
}

VectorTuple read_tuple_file(const std::string& path)
{
    auto in = open_input(path);
    return read_tuple_text(in);
}

void write_tuple_text(std::ostream& out, const VectorTuple& v)
{
    const auto old = out.precision(17);
    out << v.size() << '\n';
    for (const auto& x : v) {
        print_vector(out, x);
        out << '\n';
    }
    out.precision(old);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Best rank-one approximation of real tensors", "rankone"};
    app.require_subcommand(1);

    DecomposeArgs dec;
    auto* decompose = app.add_subcommand("decompose", "Rank-one approximation of a tensor file");
    decompose->add_option("--input", dec.input, "Tensor text file")->required();
    decompose->add_option("--method", dec.method, "als, asvd, mals or masvd")->capture_default_str();
    decompose->add_option("--seed", dec.seed, "Seed of the random start")->capture_default_str();
    decompose->add_option("--init", dec.init, "random or hosvd")->capture_default_str();
    decompose->add_option("--max-iters", dec.max_iters, "Maximum number of sweeps")->capture_default_str();
    decompose->add_option("--tol", dec.tol, "Stop when the fit changes by less than this")
        ->capture_default_str();
    decompose->add_option("--trace", dec.trace, "Write a per-iteration CSV trace here (off by default)");
    decompose->add_option("--tuple-out", dec.tuple_out, "Write the unit vectors here (off by default)");

    VerifyArgs ver;
    auto* verify = app.add_subcommand("verify", "Check criticality and semi-maximality of a tuple");
    verify->add_option("--input", ver.input, "Tensor text file")->required();
    verify->add_option("--tuple", ver.tuple, "Tuple text file")->required();
    verify->add_option("--level", ver.level, "1 (single modes) or 2 (pairs, 3-mode tensors only)")
        ->check(CLI::IsMember({1, 2}))
        ->capture_default_str();
    verify->add_option("--tol", ver.tol, "Tolerance relative to the tensor norm")->capture_default_str();

    BenchArgs ben;
    auto* bench = app.add_subcommand("bench", "Seeded benchmark runs written as CSV");
    bench->add_option("--sizes", ben.sizes, "Edge lengths")->delimiter(',')->capture_default_str();
    bench->add_option("--datasets", ben.datasets,
                      "uniform8, uniform16, symmetric8, symmetric16, rank_one, blob, volume")
        ->delimiter(',')
        ->capture_default_str();
    bench->add_option("--methods", ben.methods, "Subset of als,asvd,mals,masvd")
        ->delimiter(',')
        ->capture_default_str();
    bench->add_option("--order", ben.order, "Number of modes of generated data")->capture_default_str();
    bench->add_option("--runs", ben.runs, "Runs per dataset and method")->capture_default_str();
    bench->add_option("--out", ben.out, "CSV path, - for standard output")->capture_default_str();
    bench->add_option("--parallel", ben.parallel, "Worker threads")->capture_default_str();
    bench->add_option("--seed", ben.seed, "Base seed; run r uses seed + r")->capture_default_str();
    bench->add_option("--max-iters", ben.max_iters, "Maximum number of sweeps")->capture_default_str();
    bench->add_option("--tol", ben.tol, "Fit-change tolerance")->capture_default_str();
    bench->add_option("--volume-file", ben.volume_file, "Raw volume for the volume dataset");
    bench->add_option("--volume-dims", ben.volume_dims, "Dimensions of the raw volume")->delimiter(',');
    bench->add_option("--volume-bits", ben.volume_bits, "8 or 16")->capture_default_str();

    AmiArgs am;
    auto* ami = app.add_subcommand("ami", "Spectral analysis of the alternating maximization iteration");
    ami->add_option("--input", am.input, "Block quadratic form text file")->required();
    ami->add_option("--basin", am.basin, "Starting vector for a trajectory (optional)");
    ami->add_option("--sweeps", am.sweeps, "Sweeps of the trajectory")->capture_default_str();

    std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
    std::reverse(rest.begin(), rest.end());
    try {
        app.parse(rest);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_input_error;
    }

    try {
        if (*decompose)
            return cmd_decompose(dec, out);
        if (*verify)
            return cmd_verify(ver, out, err);
        if (*bench)
            return cmd_bench(ben, out);
        if (*ami)
            return cmd_ami(am, out);
    } catch (const BreakdownError& e) {
        err << "error: " << e.what() << '\n';
        return exit_breakdown;
    } catch (const InternalError& e) {
        err << "error: " << e.what() << '\n';
        return exit_breakdown;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_input_error;
    }
    return exit_input_error;
}

} // namespace rankone
