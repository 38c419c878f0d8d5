#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rankone/ami.hpp"
#include "rankone/bench.hpp"
#include "rankone/cli.hpp"
#include "rankone/error.hpp"

using namespace rankone;

namespace {

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args)
{
    args.insert(args.begin(), "rankone");
    std::ostringstream out, err;
    Outcome r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string temp_path(const std::string& name)
{
    return (std::filesystem::temp_directory_path() / ("rankone_cli_" + name)).string();
}

std::string write_file(const std::string& name, const std::string& text)
{
    const std::string path = temp_path(name);
    std::ofstream(path) << text;
    return path;
}

std::string write_tensor(const std::string& name, const Tensor& t)
{
    std::ostringstream s;
    write_tensor_text(s, t);
    return write_file(name, s.str());
}

std::string write_tuple(const std::string& name, const VectorTuple& v)
{
    std::ostringstream s;
    write_tuple_text(s, v);
    return write_file(name, s.str());
}

std::map<std::string, std::string> keys(const std::string& text)
{
    std::map<std::string, std::string> m;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        const auto eq = line.find(" = ");
        if (eq != std::string::npos)
            m[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return m;
}

std::string drop_key(const std::string& text, const std::string& key)
{
    std::string out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        if (line.rfind(key + " = ", 0) != 0)
            out += line + "\n";
    return out;
}

std::string read_all(const std::string& path)
{
    std::ifstream in(path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string without_seconds(const std::string& csv)
{
    std::string out;
    std::istringstream in(csv);
    for (std::string line; std::getline(in, line);)
        out += line.substr(0, line.rfind(',')) + "\n";
    return out;
}

} // namespace

TEST(TupleText, RoundTripAndErrors)
{
    std::mt19937_64 gen(1);
    const VectorTuple v = oracle::random_unit_tuple({3, 2, 4}, gen);
    std::stringstream s;
    write_tuple_text(s, v);
    const VectorTuple back = read_tuple_text(s);
    ASSERT_EQ(back.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i)
        EXPECT_EQ(back[i], v[i]);

    auto line_of = [](const std::string& text) -> std::size_t {
        std::istringstream in(text);
        try {
            read_tuple_text(in);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    EXPECT_EQ(line_of("0\n"), 1u);
    EXPECT_EQ(line_of("2\n1 2\n3 x\n"), 3u);
    EXPECT_EQ(line_of("1\n1 2\n5\n"), 3u);
    EXPECT_EQ(line_of("2\n1 2\n"), 3u);
}

TEST(Decompose, PlantedTensor)
{
    std::mt19937_64 gen(2);
    const auto p = oracle::planted_rank_one({4, 3, 5}, 3.0, gen);
    const std::string in = write_tensor("planted.txt", p.t);
    const std::string tuple = temp_path("planted_tuple.txt");
    const std::string trace = temp_path("planted_trace.csv");
    for (const char* m : {"als", "asvd", "mals", "masvd"}) {
        const Outcome r = run({"decompose", "--input", in, "--method", m, "--max-iters", "200", "--tol", "1e-14",
                           "--tuple-out", tuple, "--trace", trace});
        ASSERT_EQ(r.code, exit_ok) << r.err;
        const auto k = keys(r.out);
        EXPECT_EQ(k.at("method"), m);
        EXPECT_NEAR(std::stod(k.at("lambda")), 3.0, 1e-8 * 3.0);
        EXPECT_LE(std::stod(k.at("rel_error")), 1e-8);
        EXPECT_LE(std::stod(k.at("max_singular_residual")), 1e-8);
        EXPECT_EQ(k.count("axis.3"), 1u);

        const VectorTuple axes = read_tuple_file(tuple);
        for (std::size_t i = 0; i < 3; ++i)
            EXPECT_LE(oracle::sign_distance(axes[i], p.axes[i]), 1e-6);
        const std::string csv = read_all(trace);
        EXPECT_EQ(csv.rfind("iteration,f_before,f_after,fit,fitchange,cumulative_calls,seconds\n", 0), 0u);
    }
    std::filesystem::remove(tuple);
    std::filesystem::remove(trace);
}

TEST(Decompose, DeterministicExceptTiming)
{
    std::mt19937_64 gen(3);
    const std::string in = write_tensor("det.txt", oracle::random_tensor({4, 4, 4}, gen));
    const Outcome a = run({"decompose", "--input", in, "--method", "mals", "--seed", "5"});
    const Outcome b = run({"decompose", "--input", in, "--method", "mals", "--seed", "5"});
    ASSERT_EQ(a.code, exit_ok);
    EXPECT_EQ(drop_key(a.out, "wall_seconds"), drop_key(b.out, "wall_seconds"));
    const Outcome h = run({"decompose", "--input", in, "--init", "hosvd"});
    EXPECT_EQ(h.code, exit_ok) << h.err;
}

TEST(Decompose, InputErrors)
{
    const std::string bad = write_file("bad_dims.txt", "3\n2 2 x\n1 2 3 4 5 6 7 8\n");
    const Outcome r = run({"decompose", "--input", bad});
    EXPECT_EQ(r.code, exit_input_error);
    EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;

    EXPECT_EQ(run({"decompose", "--input", temp_path("missing.txt")}).code, exit_input_error);

    const std::string ok = write_file("ok.txt", "2\n2 2\n1 0 0 1\n");
    EXPECT_EQ(run({"decompose", "--input", ok, "--method", "nope"}).code, exit_input_error);
    EXPECT_EQ(run({"decompose", "--input", ok, "--max-iters", "0"}).code, exit_input_error);
    // two modes leave no pair to fix for ASVD
    EXPECT_EQ(run({"decompose", "--input", ok, "--method", "asvd"}).code, exit_input_error);

    const std::string zero = write_file("zero.txt", "3\n2 2 2\n0 0 0 0 0 0 0 0\n");
    EXPECT_NE(run({"decompose", "--input", zero}).code, exit_ok);
}

TEST(Verify, ConvergedAndPerturbedTuples)
{
    std::mt19937_64 gen(4);
    const auto p = oracle::planted_rank_one({4, 4, 4}, 1.0, gen);
    const std::string in = write_tensor("verify.txt", p.t);
    const std::string good = write_tuple("good.txt", p.axes);
    const Outcome ok = run({"verify", "--input", in, "--tuple", good});
    EXPECT_EQ(ok.code, exit_ok) << ok.out;
    EXPECT_EQ(keys(ok.out).at("verify.pass"), "true");
    EXPECT_EQ(run({"verify", "--input", in, "--tuple", good, "--level", "2"}).code, exit_ok);

    // rotate the first vector by 1e-2 radians
    VectorTuple x = p.axes;
    Vector w = Vector::Unit(4, 0) - x[0][0] * x[0];
    w.normalize();
    x[0] = std::cos(1e-2) * x[0] + std::sin(1e-2) * w;
    const Outcome off = run({"verify", "--input", in, "--tuple", write_tuple("off.txt", x)});
    EXPECT_EQ(off.code, exit_verification_failed);
    const auto k = keys(off.out);
    EXPECT_NEAR(std::stod(k.at("criticality.max_residual")), 1e-2, 1e-4);
    EXPECT_EQ(k.at("verify.critical"), "false");

    VectorTuple scaled = p.axes;
    scaled[1] *= 2.0;
    const Outcome warn = run({"verify", "--input", in, "--tuple", write_tuple("scaled.txt", scaled)});
    EXPECT_EQ(warn.code, exit_ok);
    EXPECT_NE(warn.err.find("warning: vector 2"), std::string::npos);
}

TEST(Verify, Errors)
{
    std::mt19937_64 gen(5);
    const Shape dims{2, 2, 2, 2};
    const std::string in = write_tensor("four.txt", oracle::random_tensor(dims, gen));
    const std::string tuple = write_tuple("four_tuple.txt", oracle::random_unit_tuple(dims, gen));
    EXPECT_EQ(run({"verify", "--input", in, "--tuple", tuple, "--level", "2"}).code, exit_input_error);
    EXPECT_EQ(run({"verify", "--input", in, "--tuple", tuple, "--level", "3"}).code, exit_input_error);
    const std::string shortt = write_tuple("short.txt", oracle::random_unit_tuple({2, 2, 2}, gen));
    EXPECT_EQ(run({"verify", "--input", in, "--tuple", shortt}).code, exit_input_error);
}

TEST(Bench, CsvToStdoutAndFile)
{
    const Outcome a = run({"bench", "--runs", "2", "--sizes", "4", "--methods", "als", "--datasets", "uniform8"});
    ASSERT_EQ(a.code, exit_ok) << a.err;
    std::istringstream in(a.out);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);)
        lines.push_back(line);
    ASSERT_EQ(lines.size(), 3u);
    EXPECT_EQ(lines[0], bench_csv_header);

    const Outcome b = run({"bench", "--runs", "2", "--sizes", "4", "--methods", "als", "--datasets", "uniform8"});
    EXPECT_EQ(without_seconds(a.out), without_seconds(b.out));

    const std::string out = temp_path("bench.csv");
    const Outcome f = run({"bench", "--runs", "2", "--sizes", "4,6", "--methods", "als,masvd", "--datasets",
                       "uniform8,symmetric8", "--out", out, "--parallel", "2"});
    ASSERT_EQ(f.code, exit_ok) << f.err;
    const std::string csv = read_all(out);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 2 * 2 * 2);
    EXPECT_FALSE(f.out.empty());
    std::filesystem::remove(out);
}

TEST(Bench, VolumeAndErrors)
{
    std::mt19937_64 gen(6);
    Tensor v({8, 8, 8});
    std::uniform_int_distribution<int> value(0, 65535);
    for (double& x : v.data())
        x = value(gen);
    const std::string path = temp_path("vol16.raw");
    write_volume(path, v, 16);
    const Outcome r = run({"bench", "--runs", "1", "--sizes", "4", "--methods", "als", "--datasets", "volume16",
                       "--volume-file", path, "--volume-dims", "8,8,8"});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    EXPECT_NE(r.out.find("als,volume16,4x4x4,"), std::string::npos) << r.out;
    // 6 is not reachable by halving 8
    EXPECT_EQ(run({"bench", "--runs", "1", "--sizes", "6", "--datasets", "volume16", "--volume-file", path,
                   "--volume-dims", "8,8,8"})
                  .code,
              exit_input_error);
    std::filesystem::remove(path);

    EXPECT_EQ(run({"bench", "--datasets", "nope"}).code, exit_input_error);
    EXPECT_EQ(run({"bench", "--methods", "xyz"}).code, exit_input_error);
}

TEST(Ami, PositiveDefiniteFixture)
{
    const std::string in = write_file("pd.txt", "3\n1 2\n4 1 0\n1 3 1\n0 1 2\n");
    const Outcome r = run({"ami", "--input", in});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    const auto k = keys(r.out);
    EXPECT_EQ(k.at("ami.theorem_holds"), "true");
    EXPECT_EQ(k.at("ami.ostrowski"), "true");
    EXPECT_EQ(k.at("ami.beta"), "0");
}

TEST(Ami, Errors)
{
    const std::string singular = write_file("singular.txt", "2\n1 1\n1 1\n1 0\n");
    const Outcome r = run({"ami", "--input", singular});
    EXPECT_EQ(r.code, exit_input_error);
    EXPECT_NE(r.err.find("block 2"), std::string::npos) << r.err;

    const std::string asym = write_file("asym.txt", "2\n1 1\n1 2\n0 1\n");
    EXPECT_EQ(run({"ami", "--input", asym}).code, exit_input_error);
    const std::string partition = write_file("partition.txt", "2\n1 2\n1 0\n0 1\n");
    const Outcome p = run({"ami", "--input", partition});
    EXPECT_EQ(p.code, exit_input_error);
}

TEST(Ami, NullVectorBasinIsConstant)
{
    // H = I - v v^T with v = (1, 1) / sqrt 2, blocks of size 1
    const std::string in = write_file("null.txt", "2\n1 1\n0.5 -0.5\n-0.5 0.5\n");
    const std::string start = write_file("null_start.txt", "1 1\n");
    const Outcome r = run({"ami", "--input", in, "--basin", start, "--sweeps", "5"});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    const auto k = keys(r.out);
    EXPECT_EQ(k.at("ami.gamma"), "1");
    EXPECT_EQ(k.at("basin.sweeps"), "5");
    EXPECT_EQ(k.at("basin.converged_to_zero"), "false");
    EXPECT_EQ(k.at("basin.f_nondecreasing"), "true");
    for (int s = 0; s <= 5; ++s) {
        std::istringstream line(k.at("basin." + std::to_string(s)));
        double norm = 0, f = 1;
        line >> norm >> f;
        EXPECT_NEAR(norm, std::sqrt(2.0), 1e-14);
        EXPECT_NEAR(f, 0.0, 1e-14);
    }
}

TEST(Parsing, UnknownFlagAndHelp)
{
    EXPECT_EQ(run({"decompose", "--bogus"}).code, exit_input_error);
    EXPECT_EQ(run({}).code, exit_input_error);
    EXPECT_EQ(run({"frobnicate"}).code, exit_input_error);
    const Outcome h = run({"--help"});
    EXPECT_EQ(h.code, exit_ok);
    EXPECT_NE(h.out.find("decompose"), std::string::npos);
}
