#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rankone/solvers.hpp"
#include "rankone/tensor.hpp"

namespace rankone {

struct DatasetSpec {
    enum class Kind {
        random_uniform,   // i.i.d. integers in [0, 2^bits - 1]
        symmetric_random, // random_uniform averaged over index permutations
        volume_file,      // raw little-endian unsigned integers
        rank_one,         // planted lambda x_1 o ... o x_d, lambda = 1
        smooth_blob,      // sum of a few Gaussian bumps, stands in for correlated volumes
    };

    Kind kind = Kind::random_uniform;
    int bits = 8;
    Shape dims;
    std::uint64_t seed = 0;
    std::string path;          // volume_file only
    std::size_t halvings = 0;  // volume_file only: downsample2 applied this many times

    // CSV label, e.g. "uniform8", "symmetric8", "volume16", "rank_one", "blob".
    std::string label() const;
    // Shape of the generated tensor (dims halved `halvings` times for volume_file).
    Shape tensor_dims() const;
};

DatasetSpec::Kind parse_dataset_kind(const std::string& name);

// Deterministic in spec.seed. volume_file ignores the seed.
Tensor generate(const DatasetSpec& spec);

// Writes the tensor as raw little-endian unsigned integers; every entry must be
// an integer within the range of `bits`.
void write_volume(const std::string& path, const Tensor& t, int bits);
Tensor read_volume(const std::string& path, const Shape& dims, int bits);

// Mean over each 2^d block; every dimension must be even.
Tensor downsample2(const Tensor& t);

struct BenchOptions {
    std::size_t runs = 10;
    std::size_t workers = 1;
    SolverConfig config; // method is overridden per job; init is always a seeded random start
};

// One solve. Failed runs keep the error message and write converged_by = error.
struct RunRecord {
    Method method = Method::als;
    std::string dataset;
    Shape dims;
    std::size_t spec_index = 0;
    std::size_t run = 0;
    std::uint64_t seed = 0;
    std::size_t iterations = 0;
    std::size_t opt_calls = 0;
    double lambda = 0.0;
    double rel_error = 0.0;
    double fit = 0.0;
    double tensor_norm = 0.0;
    std::string converged_by;
    double wall_seconds = 0.0;
    bool failed = false;
    std::string error;
};

struct BenchRow {
    Method method = Method::als;
    std::string dataset;
    Shape dims;
    std::size_t runs = 0;
    std::size_t failures = 0;
    double mean_seconds = 0.0;
    double min_seconds = 0.0;
    double max_seconds = 0.0;
    double mean_opt_calls = 0.0;
    double mean_lambda = 0.0;
    double mean_rel_error = 0.0;
    double mean_fit = 0.0;
};

struct BenchResult {
    std::vector<BenchRow> rows;    // one per (spec, method), in input order
    std::vector<RunRecord> records; // spec-major, then method, then run
};

// Run r of a spec uses seed spec.seed + r; random data is regenerated per run
// and shared by every method, the start vectors are drawn from the same seed.
BenchResult run_bench(const std::vector<DatasetSpec>& specs, const std::vector<Method>& methods,
                      const BenchOptions& options);

extern const char* const bench_csv_header;
void write_csv(std::ostream& out, const std::vector<RunRecord>& records);
void write_summary(std::ostream& out, const std::vector<BenchRow>& rows);

// Fraction of (spec, run) groups where all methods succeeded and their
// lambdas lie within 2 * fitchange_tol * ||T|| of each other.
double lambda_agreement_rate(const BenchResult& result, double fitchange_tol);

std::string format_dims(const Shape& dims);

} // namespace rankone
