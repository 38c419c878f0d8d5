#include "rankone/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <thread>

#include "rankone/error.hpp"

namespace rankone {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void require_bits(int bits)
{
    if (bits != 8 && bits != 16)
        throw UnsupportedConfiguration("bit depth must be 8 or 16, got " + std::to_string(bits));
}

void require_dims(const Shape& dims)
{
    if (dims.empty())
        throw DimensionError("dataset needs at least one dimension");
    for (std::size_t m : dims)
        if (m == 0)
            throw DimensionError("zero dimension in dataset");
}

Tensor uniform(const Shape& dims, int bits, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<std::uint32_t> dist(0, (1u << bits) - 1u);
    Tensor t(dims);
    for (double& v : t.data())
        v = static_cast<double>(dist(gen));
    return t;
}

// Every orbit of index permutations gets the mean of the draw over that orbit,
// so the result is symmetric bit for bit.
Tensor symmetrize(const Tensor& draw)
{
    const Shape& dims = draw.dims();
    for (std::size_t m : dims)
        if (m != dims.front())
            throw DimensionError("symmetric data needs equal dimensions, got " + format_dims(dims));
    const std::size_t d = dims.size();
    Tensor out(dims);
    std::vector<std::size_t> index(d, 0);
    for (std::size_t flat = 0; flat < draw.size(); ++flat) {
        std::size_t rest = flat;
        for (std::size_t k = d; k-- > 0;) {
            index[k] = rest % dims[k];
            rest /= dims[k];
        }
        if (!std::is_sorted(index.begin(), index.end()))
            continue;
        std::vector<std::size_t> perm = index;
        double sum = 0.0;
        std::size_t count = 0;
        do {
            sum += draw(perm);
            ++count;
        } while (std::next_permutation(perm.begin(), perm.end()));
        const double mean = sum / static_cast<double>(count);
        perm = index;
        do {
            out(perm) = mean;
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return out;
}

Tensor planted_rank_one(const Shape& dims, std::uint64_t seed)
{
    const UnitTuple u = init_random(dims, seed);
    return outer(u.vectors());
}

Tensor smooth_blob(const Shape& dims, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> pos(0.2, 0.8), width(0.1, 0.3), height(0.5, 1.0);
    const std::size_t d = dims.size();
    struct Bump {
        std::vector<double> center;
        double width;
        double height;
    };
    std::vector<Bump> bumps(3);
    for (auto& b : bumps) {
        for (std::size_t k = 0; k < d; ++k)
            b.center.push_back(pos(gen));
        b.width = width(gen);
        b.height = height(gen);
    }
    Tensor t(dims);
    std::vector<std::size_t> index(d, 0);
    for (std::size_t flat = 0; flat < t.size(); ++flat) {
        std::size_t rest = flat;
        for (std::size_t k = d; k-- > 0;) {
            index[k] = rest % dims[k];
            rest /= dims[k];
        }
        double v = 0.0;
        for (const auto& b : bumps) {
            double r2 = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double x = (static_cast<double>(index[k]) + 0.5) / static_cast<double>(dims[k]);
                r2 += (x - b.center[k]) * (x - b.center[k]);
            }
            v += b.height * std::exp(-r2 / (2.0 * b.width * b.width));
        }
        t.data()[flat] = v;
    }
    return t;
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_seconds(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

RunRecord run_one(const Tensor& t, const DatasetSpec& spec, Method method, const BenchOptions& opt,
                  std::size_t spec_index, std::size_t run, std::uint64_t seed)
{
    RunRecord rec;
    rec.method = method;
    rec.dataset = spec.label();
    rec.dims = t.dims();
    rec.spec_index = spec_index;
    rec.run = run;
    rec.seed = seed;
    rec.tensor_norm = t.norm();

    SolverConfig cfg = opt.config;
    cfg.method = method;
    cfg.init = InitStrategy::random(splitmix64(seed ^ 0x5eedULL));
    try {
        const auto t0 = std::chrono::steady_clock::now();
        const Rank1Result r = solve(t, cfg);
        rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rec.iterations = r.iterations;
        rec.opt_calls = r.optimization_calls;
        rec.lambda = r.lambda;
        rec.rel_error = std::clamp(r.residual / rec.tensor_norm, 0.0, 1.0);
        rec.fit = r.fit;
        rec.converged_by = to_string(r.converged_by);
    } catch (const Error& e) {
        rec.failed = true;
        rec.error = e.what();
        rec.converged_by = "error";
    }
    return rec;
}

} // namespace

std::string format_dims(const Shape& dims)
{
    std::string s;
    for (std::size_t k = 0; k < dims.size(); ++k)
        s += (k ? "x" : "") + std::to_string(dims[k]);
    return s;
}

std::string DatasetSpec::label() const
{
    switch (kind) {
    case Kind::random_uniform: return "uniform" + std::to_string(bits);
    case Kind::symmetric_random: return "symmetric" + std::to_string(bits);
    case Kind::volume_file: return "volume" + std::to_string(bits);
    case Kind::rank_one: return "rank_one";
    case Kind::smooth_blob: return "blob";
    }
    return "?";
}

Shape DatasetSpec::tensor_dims() const
{
    Shape out = dims;
    if (kind == Kind::volume_file)
        for (auto& m : out)
            m >>= halvings;
    return out;
}

DatasetSpec::Kind parse_dataset_kind(const std::string& name)
{
    using K = DatasetSpec::Kind;
    static const std::map<std::string, K> names{
        {"random_uniform", K::random_uniform}, {"uniform", K::random_uniform},
        {"symmetric_random", K::symmetric_random}, {"symmetric", K::symmetric_random},
        {"volume_file", K::volume_file}, {"volume", K::volume_file},
        {"rank_one", K::rank_one}, {"smooth_blob", K::smooth_blob}, {"blob", K::smooth_blob},
    };
    const auto it = names.find(name);
    if (it == names.end())
        throw UnsupportedConfiguration("unknown dataset kind '" + name + "'");
    return it->second;
}

Tensor generate(const DatasetSpec& spec)
{
    require_dims(spec.dims);
    switch (spec.kind) {
    case DatasetSpec::Kind::random_uniform:
        require_bits(spec.bits);
        return uniform(spec.dims, spec.bits, spec.seed);
    case DatasetSpec::Kind::symmetric_random:
        require_bits(spec.bits);
        return symmetrize(uniform(spec.dims, spec.bits, spec.seed));
    case DatasetSpec::Kind::volume_file: {
        Tensor t = read_volume(spec.path, spec.dims, spec.bits);
        for (std::size_t k = 0; k < spec.halvings; ++k)
            t = downsample2(t);
        return t;
    }
    case DatasetSpec::Kind::rank_one:
        return planted_rank_one(spec.dims, spec.seed);
    case DatasetSpec::Kind::smooth_blob:
        return smooth_blob(spec.dims, spec.seed);
    }
    throw UnsupportedConfiguration("unknown dataset kind");
}

void write_volume(const std::string& path, const Tensor& t, int bits)
{
    require_bits(bits);
    const double top = static_cast<double>((1u << bits) - 1u);
    std::vector<unsigned char> bytes;
    bytes.reserve(t.size() * static_cast<std::size_t>(bits / 8));
    for (double v : t.data()) {
        if (!(v >= 0.0 && v <= top && std::floor(v) == v))
            throw ContractViolation("value " + fmt(v) + " does not fit " + std::to_string(bits) +
                                    "-bit unsigned storage");
        const auto u = static_cast<std::uint32_t>(v);
        bytes.push_back(static_cast<unsigned char>(u & 0xffu));
        if (bits == 16)
            bytes.push_back(static_cast<unsigned char>(u >> 8));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ParseError(0, "cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw ParseError(0, "write to '" + path + "' failed");
}

Tensor read_volume(const std::string& path, const Shape& dims, int bits)
{
    require_bits(bits);
    require_dims(dims);
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError(0, "cannot open '" + path + "'");
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                           std::istreambuf_iterator<char>());
    Tensor t(dims);
    const std::size_t width = static_cast<std::size_t>(bits / 8);
    if (bytes.size() != t.size() * width)
        throw DimensionError("'" + path + "' has " + std::to_string(bytes.size()) + " bytes, " +
                             format_dims(dims) + " at " + std::to_string(bits) + " bits needs " +
                             std::to_string(t.size() * width));
    auto data = t.data();
    for (std::size_t k = 0; k < t.size(); ++k) {
        std::uint32_t v = bytes[k * width];
        if (width == 2)
            v |= static_cast<std::uint32_t>(bytes[k * width + 1]) << 8;
        data[k] = static_cast<double>(v);
    }
    return t;
}

Tensor downsample2(const Tensor& t)
{
    const Shape& dims = t.dims();
    const std::size_t d = dims.size();
    Shape half(d);
    for (std::size_t k = 0; k < d; ++k) {
        if (dims[k] % 2 != 0)
            throw DimensionError("mode " + std::to_string(k + 1) + " has odd dimension " +
                                 std::to_string(dims[k]));
        half[k] = dims[k] / 2;
    }
    Tensor out(half);
    std::vector<std::size_t> index(d, 0), src(d, 0);
    const std::size_t corners = std::size_t{1} << d;
    const double scale = 1.0 / static_cast<double>(corners);
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
        std::size_t rest = flat;
        for (std::size_t k = d; k-- > 0;) {
            index[k] = rest % half[k];
            rest /= half[k];
        }
        double sum = 0.0;
        for (std::size_t c = 0; c < corners; ++c) {
            for (std::size_t k = 0; k < d; ++k)
                src[k] = 2 * index[k] + ((c >> k) & 1u);
            sum += t(src);
        }
        out.data()[flat] = sum * scale;
    }
    return out;
}

const char* const bench_csv_header =
    "method,dataset,dims,run,seed,iterations,opt_calls,lambda,rel_error,fit,converged_by,wall_seconds";

BenchResult run_bench(const std::vector<DatasetSpec>& specs, const std::vector<Method>& methods,
                      const BenchOptions& options)
{
    if (specs.empty() || methods.empty())
        throw ContractViolation("bench needs at least one dataset and one method");
    if (options.runs < 1)
        throw ContractViolation("bench needs runs >= 1");
    options.config.validate();

    struct Job {
        std::size_t spec;
        std::size_t run;
    };
    std::vector<Job> jobs;
    for (std::size_t s = 0; s < specs.size(); ++s)
        for (std::size_t r = 0; r < options.runs; ++r)
            jobs.push_back({s, r});

    // Slot layout: spec-major, then method, then run.
    const std::size_t per_spec = methods.size() * options.runs;
    std::vector<RunRecord> records(specs.size() * per_spec);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            const auto [s, r] = jobs[j];
            DatasetSpec spec = specs[s];
            const std::uint64_t seed = specs[s].seed + r;
            spec.seed = splitmix64(seed);
            std::optional<Tensor> t;
            std::string failure;
            try {
                t = generate(spec);
            } catch (const Error& e) {
                failure = e.what();
            }
            for (std::size_t m = 0; m < methods.size(); ++m) {
                RunRecord& rec = records[s * per_spec + m * options.runs + r];
                if (t) {
                    rec = run_one(*t, specs[s], methods[m], options, s, r, seed);
                } else {
                    rec.method = methods[m];
                    rec.dataset = specs[s].label();
                    rec.dims = specs[s].tensor_dims();
                    rec.spec_index = s;
                    rec.run = r;
                    rec.seed = seed;
                    rec.failed = true;
                    rec.error = failure;
                    rec.converged_by = "error";
                }
            }
        }
    };

    const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, jobs.size());
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }

    BenchResult result;
    result.records = std::move(records);
    for (std::size_t s = 0; s < specs.size(); ++s) {
        for (std::size_t m = 0; m < methods.size(); ++m) {
            BenchRow row;
            row.method = methods[m];
            row.dataset = specs[s].label();
            row.dims = specs[s].tensor_dims();
            row.runs = options.runs;
            std::size_t ok = 0;
            for (std::size_t r = 0; r < options.runs; ++r) {
                const RunRecord& rec = result.records[s * per_spec + m * options.runs + r];
                if (rec.failed) {
                    ++row.failures;
                    continue;
                }
                row.min_seconds = ok ? std::min(row.min_seconds, rec.wall_seconds) : rec.wall_seconds;
                row.max_seconds = ok ? std::max(row.max_seconds, rec.wall_seconds) : rec.wall_seconds;
                row.mean_seconds += rec.wall_seconds;
                row.mean_opt_calls += static_cast<double>(rec.opt_calls);
                row.mean_lambda += rec.lambda;
                row.mean_rel_error += rec.rel_error;
                row.mean_fit += rec.fit;
                ++ok;
            }
            if (ok) {
                const double n = static_cast<double>(ok);
                row.mean_seconds /= n;
                row.mean_opt_calls /= n;
                row.mean_lambda /= n;
                row.mean_rel_error /= n;
                row.mean_fit /= n;
            }
            result.rows.push_back(row);
        }
    }
    return result;
}

void write_csv(std::ostream& out, const std::vector<RunRecord>& records)
{
    out << bench_csv_header << '\n';
    for (const auto& r : records) {
        out << to_string(r.method) << ',' << r.dataset << ',' << format_dims(r.dims) << ',' << r.run
            << ',' << r.seed << ',';
        if (r.failed)
            out << ",,,,," << r.converged_by << ",\n";
        else
            out << r.iterations << ',' << r.opt_calls << ',' << fmt(r.lambda) << ','
                << fmt(r.rel_error) << ',' << fmt(r.fit) << ',' << r.converged_by << ','
                << fmt_seconds(r.wall_seconds) << '\n';
    }
}

void write_summary(std::ostream& out, const std::vector<BenchRow>& rows)
{
    out << "method dataset dims runs failures mean_s min_s max_s mean_calls mean_lambda "
           "mean_rel_error mean_fit\n";
    for (const auto& r : rows)
        out << to_string(r.method) << ' ' << r.dataset << ' ' << format_dims(r.dims) << ' ' << r.runs
            << ' ' << r.failures << ' ' << fmt_seconds(r.mean_seconds) << ' '
            << fmt_seconds(r.min_seconds) << ' ' << fmt_seconds(r.max_seconds) << ' '
            << fmt(r.mean_opt_calls) << ' ' << fmt(r.mean_lambda) << ' ' << fmt(r.mean_rel_error)
            << ' ' << fmt(r.mean_fit) << '\n';
}

double lambda_agreement_rate(const BenchResult& result, double fitchange_tol)
{
    std::map<std::pair<std::size_t, std::size_t>, std::vector<const RunRecord*>> groups;
    for (const auto& r : result.records)
        groups[{r.spec_index, r.run}].push_back(&r);
    if (groups.empty())
        return 0.0;
    std::size_t agree = 0;
    for (const auto& [key, recs] : groups) {
        bool ok = true;
        double lo = 0.0, hi = 0.0;
        for (std::size_t k = 0; k < recs.size(); ++k) {
            if (recs[k]->failed) {
                ok = false;
                break;
            }
            lo = k ? std::min(lo, recs[k]->lambda) : recs[k]->lambda;
            hi = k ? std::max(hi, recs[k]->lambda) : recs[k]->lambda;
        }
        if (ok && hi - lo <= 2.0 * fitchange_tol * recs.front()->tensor_norm)
            ++agree;
    }
    return static_cast<double>(agree) / static_cast<double>(groups.size());
}

} // namespace rankone
